"""Command-line entry point: every experiment as a subcommand emitting CSV.

Outputs land in --outdir (or $FASTFODE_OUTDIR, default cwd). Each run also
writes a JSON manifest with the fully resolved configuration so identical
manifests imply identical outputs. Exit codes: 0 ok, 2 configuration error,
3 acceptance check failed (--check).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .contour import ContourKind
from .fastconv import FastConvState
from .fracweights import (
    Family,
    GeneratingFunction,
    convolution_weights,
    starting_weight_table,
    weight_table_to_csv,
)
from .odesolve import (
    Backend,
    InstabilityError,
    SchemeConfig,
    error_report,
    mittag_leffler_neg_t,
    observed_orders,
    semi_implicit_solve,
)
from .pde2d import CoupledProblem, Grid2D, l2_error, solve_coupled
from .problems import case_sigma, pde_case1_terms, pde_case2_terms, scalar_case
from .stability import StabilityProblem, region_raster, stability_interval

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK = 3

# Printed stability intervals (lambda = -1, rho = -2, GNGF-2, q = 2); "inf"
# rows start at the unconditional threshold kappa = 1.25.
TABLE1_REFERENCE: dict[float, dict[float, float]] = {
    0.1: {0.0: 5.31e-7, 0.2: 3.04e-6, 0.4: 2.51e-5, 0.6: 3.67e-4, 0.8: 1.45e-2,
          1.0: 5.19e0, 1.2: 5.07e7, 1.24: 4.95e14, 1.25: math.inf, 1.26: math.inf,
          1.4: math.inf},
    0.2: {0.0: 1.59e-3, 0.2: 3.81e-3, 0.4: 1.10e-2, 0.6: 4.19e-2, 0.8: 2.63e-1,
          1.0: 4.98e0, 1.2: 1.56e4, 1.24: 4.86e7, 1.25: math.inf, 1.26: math.inf,
          1.4: math.inf},
    0.5: {0.0: 1.80e-1, 0.2: 2.55e-1, 0.4: 3.89e-1, 0.6: 6.66e-1, 0.8: 1.39e0,
          1.0: 4.50e0, 1.2: 1.13e2, 1.24: 2.81e3, 1.25: math.inf, 1.26: math.inf,
          1.4: math.inf},
    0.9: {0.0: 6.83e-1, 0.2: 8.28e-1, 0.4: 1.05e0, 0.6: 1.41e0, 0.8: 2.12e0,
          1.0: 4.08e0, 1.2: 2.44e1, 1.24: 1.46e2, 1.25: math.inf, 1.26: math.inf,
          1.4: math.inf},
}

TABLE2_M3_REFERENCE = [6.4330e-5, 3.2473e-5, 1.5317e-5, 6.7300e-6, 2.8040e-6]
TABLE2_ORDER_REFERENCE = {1: [0.5520, 0.6161, 0.6657, 0.7030],
                          2: [0.9189, 1.0007, 1.0664, 1.1187],
                          3: [0.9862, 1.0841, 1.1865, 1.2631],
                          0: [0.2361, 0.2706, 0.2988, 0.3215]}
TABLE6_REFERENCE_ERR = 2.8700e-4  # tau = 2^-5, alpha = 0.5


class ConfigError(ValueError):
    pass


def _parse_list(text: str, cast=float) -> list:
    return [cast(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]


def _parse_tau_sweep(text: str) -> list[float]:
    """Parse '2^-5..2^-9' or a comma list of floats / 2^k literals."""

    def one(tok: str) -> float:
        tok = tok.strip()
        if "^" in tok:
            base, expo = tok.split("^")
            return float(base) ** float(expo)
        return float(tok)

    if ".." in text:
        lo, hi = text.split("..")
        if "^" not in lo or "^" not in hi:
            raise ConfigError("tau sweep ranges need 2^k endpoints")
        k0 = int(lo.split("^")[1])
        k1 = int(hi.split("^")[1])
        step = -1 if k1 < k0 else 1
        return [2.0**k for k in range(k0, k1 + step, step)]
    return [one(tok) for tok in text.split(",")]


def _outdir(args) -> Path:
    out = Path(args.outdir or os.environ.get("FASTFODE_OUTDIR") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(path: Path, command: str, resolved: dict) -> None:
    manifest = {
        "command": command,
        "config": resolved,
        "versions": {
            "fastfode": __version__,
            "numpy": np.__version__,
        },
        "seed": 0,
    }
    path.with_suffix(".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8",
    )


def _write_csv(path: Path, header: list[str], rows, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf"
        return repr(x)
    return str(x)


def _backend_from_args(args) -> Backend:
    return Backend(kind=args.backend, B=args.bin_base, n0=args.local_window,
                   contour=ContourKind(args.contour), N=args.nodes)


# --- subcommands ---------------------------------------------------------------


def cmd_weights(args) -> int:
    out = _outdir(args)
    gf = GeneratingFunction(Family(args.family), args.p, args.alpha, args.tau)
    table = convolution_weights(gf, args.n)
    dest = out / (args.output or "weights.csv")
    weight_table_to_csv(table, dest)
    resolved = {"family": args.family, "p": args.p, "alpha": args.alpha,
                "tau": args.tau, "n": args.n, "sigma": args.sigma}
    if args.sigma:
        sigma = _parse_list(args.sigma)
        w = starting_weight_table(gf, sigma, args.n)
        cols = ["n"] + [f"w_{j + 1}" for j in range(len(sigma))]
        _write_csv(dest.with_name(dest.stem + "_starting.csv"), cols,
                   ([i, *w[i]] for i in range(args.n + 1)),
                   comment=f"sigma={sigma}")
    _write_manifest(dest, "weights", resolved)
    print(f"wrote {dest}")
    return EXIT_OK


def cmd_stability(args) -> int:
    out = _outdir(args)
    if args.mode == "interval":
        prob = StabilityProblem(family=Family(args.family), p=args.p,
                                alpha=args.alpha, q=args.q, lam=args.lam,
                                rho=args.rho, kappa=args.kappa)
        tau_star = stability_interval(prob)
        dest = out / (args.output or "stability_interval.csv")
        _write_csv(dest, ["alpha", "kappa", "tau_star"],
                   [[args.alpha, args.kappa, tau_star]])
        _write_manifest(dest, "stability-interval", vars(args))
        print(f"alpha={args.alpha} kappa={args.kappa}: tau* = {_fmt(tau_star)}")
        return EXIT_OK
    if args.mode == "table":
        alphas = _parse_list(args.alphas)
        kappas = _parse_list(args.kappas)
        rows = []
        ok = True
        for alpha in alphas:
            for kappa in kappas:
                prob = StabilityProblem(family=Family(args.family), p=args.p,
                                        alpha=alpha, q=args.q, lam=args.lam,
                                        rho=args.rho, kappa=kappa)
                tau_star = stability_interval(prob)
                rows.append([alpha, kappa, tau_star])
                if args.check:
                    ref = TABLE1_REFERENCE.get(alpha, {}).get(kappa)
                    if ref is None:
                        continue
                    if math.isinf(ref) != math.isinf(tau_star):
                        ok = False
                    elif not math.isinf(ref) and abs(tau_star / ref - 1.0) > 0.05:
                        ok = False
        dest = out / (args.output or "stability_table.csv")
        _write_csv(dest, ["alpha", "kappa", "tau_star"], rows)
        _write_manifest(dest, "stability-table", vars(args))
        print(f"wrote {dest} ({len(rows)} cells)")
        if args.check and not ok:
            print("stability table check FAILED", file=sys.stderr)
            return EXIT_CHECK
        return EXIT_OK
    # raster
    re_grid = np.linspace(args.re_min, args.re_max, args.grid)
    im_grid = np.linspace(args.im_min, args.im_max, args.grid)
    stable = region_raster(Family(args.family), args.p, args.alpha, args.q,
                           args.gamma, args.theta, re_grid, im_grid)
    dest = out / (args.output or "stability_raster.csv")
    rows = ([re_grid[j], im_grid[i], int(stable[i, j])]
            for i in range(args.grid) for j in range(args.grid))
    _write_csv(dest, ["re_xi", "im_xi", "stable01"], rows,
               comment=f"alpha={args.alpha},q={args.q},gamma={args.gamma},theta={args.theta}")
    _write_manifest(dest, "stability-raster", vars(args))
    print(f"wrote {dest}")
    return EXIT_OK


def _write_trajectory(dest: Path, traj, reference=None) -> None:
    if reference is not None:
        sup = float(np.max(np.abs(reference)))
        rows = ([t, u, r, abs(u - r)] for t, u, r in
                zip(traj.t, traj.values, reference))
        _write_csv(dest, ["t", "U", "ref", "abs_err"], rows, comment=f"sup_ref={sup!r}")
    else:
        _write_csv(dest, ["t", "U"], zip(traj.t, traj.values))


def _scalar_scheme(args, alpha: float, tau: float, m: int, T: float) -> SchemeConfig:
    case = scalar_case(args.case)
    sig = case_sigma(case, alpha, m)
    return SchemeConfig(
        family=Family(args.family), p=args.p, alpha=alpha, q=args.q, lam=-1.0,
        kappa=args.kappa if args.kappa is not None else case.kappa_default,
        sigma=sig, sigma_u=sig, delta_f=sig, tau=tau, T=T,
        backend=_backend_from_args(args),
    )


def _solve_scalar_once(args, alpha: float, tau: float, m: int, T: float):
    case = scalar_case(args.case)
    cfg = _scalar_scheme(args, alpha, tau, m, T)
    f = case.make_f(alpha)
    start = None
    if m > 0 and case.reference is not None:
        # Published tables assume known starting values for n <= m.
        start = case.reference(alpha, np.arange(1, m + 1) * tau)
    return semi_implicit_solve(cfg, f, case.u0, df=case.df, start_values=start)


def _solve_scalar_case(args) -> int:
    out = _outdir(args)
    case = scalar_case(args.case)
    T = args.T if args.T is not None else {"1.1": 40.0, "1.2": 5.0, "1.3": 50.0}[args.case]
    if args.tau_sweep:
        taus = _parse_tau_sweep(args.tau_sweep)
        if args.case == "1.2":
            groups = [("alpha", a) for a in _parse_list(args.alphas or "0.2,0.5,0.8")]
        elif args.case == "1.1":
            groups = [("m", m) for m in _parse_list(args.m_list or "0,1,2,3", int)]
        else:
            groups = [("alpha", a) for a in _parse_list(args.alphas or "0.1,0.2,0.5,0.8")]
        header = ["tau"]
        for kind, val in groups:
            header += [f"err_{kind}{val}", f"order_{kind}{val}"]
        table = {tau: [tau] for tau in taus}
        check_ok = True
        for kind, val in groups:
            alpha = val if kind == "alpha" else args.alpha
            m = val if kind == "m" else args.m
            errs = []
            ref_traj = None
            at_final = args.at_final or args.case == "1.2"  # Table-6 metric is at t=T
            if case.reference is None:
                cfg_ref = _scalar_scheme(args, alpha, args.ref_tau, 2, T)
                ref_traj = semi_implicit_solve(cfg_ref, case.make_f(alpha), case.u0,
                                               df=case.df)
            for tau in taus:
                traj = _solve_scalar_once(args, alpha, tau, m, T)
                if case.reference is not None:
                    ref = case.reference(alpha, traj.t)
                    if at_final:
                        sup = float(np.max(np.abs(ref)))
                        err = abs(traj.values[-1] - ref[-1]) / sup
                    else:
                        err = error_report(traj, ref).max_relative
                else:
                    sup = float(np.max(np.abs(ref_traj.values)))
                    err = abs(traj.values[-1] - ref_traj.values[-1]) / sup
                errs.append(err)
            orders = [math.nan] + observed_orders(errs)
            for tau, e, o in zip(taus, errs, orders):
                table[tau] += [e, o]
            if args.check:
                if args.case == "1.2":
                    fine = observed_orders(errs)[-1]
                    if abs(fine - 2.0) > 0.05:
                        check_ok = False
                    if abs(val - 0.5) < 1e-12 and abs(taus[0] - 2.0**-5) < 1e-12:
                        if abs(errs[0] / TABLE6_REFERENCE_ERR - 1.0) > 0.02:
                            check_ok = False
                if args.case == "1.1" and kind == "m" and val == 3:
                    for e, ref_e in zip(errs, TABLE2_M3_REFERENCE):
                        if e > 1.5 * ref_e or e < ref_e / 1.5:
                            check_ok = False
                if args.case == "1.3":
                    if abs(observed_orders(errs)[-1] - 2.0) > 0.15:
                        check_ok = False
        dest = out / (args.output or f"convergence_case{args.case}.csv")
        _write_csv(dest, header, (table[tau] for tau in taus))
        _write_manifest(dest, "solve-sweep", vars(args))
        print(f"wrote {dest}")
        if args.check and not check_ok:
            print("convergence check FAILED", file=sys.stderr)
            return EXIT_CHECK
        return EXIT_OK
    # single run
    tau = args.tau
    if tau is None:
        raise ConfigError("--tau required for a single solve")
    m = args.m if not args.save_ref else max(args.m, 2)
    try:
        traj = _solve_scalar_once(args, args.alpha, tau, m, T)
    except InstabilityError as exc:
        print(f"UNSTABLE: {exc}", file=sys.stderr)
        dest = out / (args.output or f"trajectory_case{args.case}.csv")
        _write_csv(dest, ["t", "U"], [], comment=f"diverged at step {exc.step}")
        _write_manifest(dest, "solve", vars(args))
        return EXIT_OK
    ref = case.reference(args.alpha, traj.t) if case.reference is not None else None
    name = args.output or (
        f"reference_case{args.case}_alpha{args.alpha}.csv" if args.save_ref
        else f"trajectory_case{args.case}.csv")
    dest = out / name
    _write_trajectory(dest, traj, ref)
    _write_manifest(dest, "solve", vars(args))
    print(f"wrote {dest}")
    return EXIT_OK


def _solve_pde_case(args) -> int:
    out = _outdir(args)
    alpha1 = args.alpha
    alpha2 = args.alpha2 if args.alpha2 is not None else args.alpha
    T = args.T if args.T is not None else 2.0
    tau = args.tau if args.tau is not None else 1.0 / 32.0
    grid = Grid2D(args.h)
    kappa = args.kappa if args.kappa is not None else 2.0
    prob = CoupledProblem(alpha1=alpha1, alpha2=alpha2, mu1=args.mu, mu2=args.mu2,
                          kappa1=kappa, kappa2=kappa)
    X, Y = grid.meshgrid()
    if args.case == "2.1":
        f, g, uex, vex = pde_case1_terms(alpha1, alpha2, args.mu, args.mu2)
        u0, v0 = uex(X, Y, 0.0), vex(X, Y, 0.0)
    else:
        f, g, u0f, v0f = pde_case2_terms()
        u0, v0 = u0f(X, Y), v0f(X, Y)
        uex = vex = None
    res = solve_coupled(prob, grid, f, g, u0, v0, tau=tau, T=T,
                        scheme=args.scheme, backend=_backend_from_args(args),
                        snapshot_times=(T,))
    dest = out / (args.output or f"fields_case{args.case}.csv")
    rows = ([X[i, j], Y[i, j], res.u[i, j], res.v[i, j]]
            for i in range(grid.M) for j in range(grid.M))
    _write_csv(dest, ["x", "y", "u", "v"], rows,
               comment=f"t={T},h=1/{grid.M},tau={tau},alpha1={alpha1},alpha2={alpha2}")
    timing_dest = dest.with_name(dest.stem + "_timing.csv")
    _write_csv(timing_dest, ["t", "cumulative_seconds", "backend"],
               ([t, s, args.backend] for t, s in res.timing))
    if uex is not None:
        eu = l2_error(grid, res.u, uex(X, Y, T))
        ev = l2_error(grid, res.v, vex(X, Y, T))
        print(f"L2 errors at t={T}: u={eu:.4e} v={ev:.4e} "
              f"(wall {res.wall_time:.2f}s, picard mean "
              f"{np.mean(res.picard_iterations) if res.picard_iterations else 0:.1f})")
    _write_manifest(dest, "solve-pde", vars(args))
    print(f"wrote {dest}")
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.case in ("1.1", "1.2", "1.3"):
        return _solve_scalar_case(args)
    if args.case in ("2.1", "2.2"):
        return _solve_pde_case(args)
    raise ConfigError(f"unknown case {args.case!r}")


def cmd_bench(args) -> int:
    out = _outdir(args)
    case = scalar_case(args.case)
    f = case.make_f(args.alpha)
    n_list = _parse_list(args.n_list, int)
    rows = []
    times = {"direct": [], "fast": []}
    for n_t in n_list:
        tau = args.T / n_t
        sig = case_sigma(case, args.alpha, 1)
        per = {}
        vals = {}
        peak = {}
        for kind in ("direct", "fast"):
            cfg = SchemeConfig(
                family=Family(args.family), p=args.p, alpha=args.alpha, q=args.q,
                lam=-1.0, kappa=case.kappa_default, sigma=sig, sigma_u=sig,
                delta_f=sig, tau=tau, T=args.T,
                backend=Backend(kind=kind, contour=ContourKind(args.contour),
                                N=args.nodes),
            )
            traj = semi_implicit_solve(cfg, f, case.u0, df=case.df)  # warm-up
            best = math.inf
            for _ in range(args.repeats):
                t0 = time.perf_counter()
                traj = semi_implicit_solve(cfg, f, case.u0, df=case.df)
                best = min(best, time.perf_counter() - t0)
            per[kind] = best
            vals[kind] = traj.values
            state = cfg.backend.make_state(cfg.gf, n_t)
            peak[kind] = (n_t + 1 if kind == "direct" else state.state_scalar_count)
            times[kind].append(best)
        rel = float(np.max(np.abs(vals["direct"] - vals["fast"]))
                    / np.max(np.abs(vals["direct"])))
        rows.append([n_t, per["direct"], per["fast"], rel, peak["fast"]])
    dest = out / (args.output or "bench.csv")
    _write_csv(dest, ["n", "direct_time_s", "fast_time_s", "max_rel_err",
                      "peak_state_scalars"], rows)
    _write_manifest(dest, "bench", vars(args))
    print(f"wrote {dest}")
    if args.check:
        ok = True
        for i in range(len(n_list) - 1):
            dratio = times["direct"][i + 1] / times["direct"][i]
            fratio = times["fast"][i + 1] / times["fast"][i]
            print(f"n {n_list[i]}->{n_list[i + 1]}: direct x{dratio:.2f} fast x{fratio:.2f}")
            if not 3.0 <= dratio <= 5.0 or fratio > 2.5:
                ok = False
        if not ok:
            print("bench complexity check FAILED", file=sys.stderr)
            return EXIT_CHECK
    return EXIT_OK


def cmd_fastconv_check(args) -> int:
    out = _outdir(args)
    gf = GeneratingFunction(Family(args.family), args.p, args.alpha, args.tau)
    if args.dump_quadrature:
        from .contour import quadrature_to_csv, talbot_quadrature

        plan_levels = 1
        while args.n - args.local_window + 1 >= 2 * args.bin_base**plan_levels:
            plan_levels += 1
        for ell in range(1, plan_levels + 1):
            t_level = (2 * args.bin_base**ell - 2 + args.local_window) * args.tau
            quadrature_to_csv(talbot_quadrature(args.nodes, t_level),
                              out / f"quadrature_level{ell}.csv")
    n_max = args.n
    t = np.arange(n_max + 1) * args.tau
    u = t**2 + t
    omega = convolution_weights(gf, n_max).omega
    direct = np.convolve(omega, u)[: n_max + 1]
    rows = []
    worst = {}
    for kind in (ContourKind.TALBOT, ContourKind.HYPERBOLIC):
        nodes = args.nodes if kind is ContourKind.TALBOT else None
        state = FastConvState(gf, n_max, B=args.bin_base, n0=args.local_window,
                              contour=kind, N=nodes)
        bad = 0.0
        for n in range(n_max + 1):
            state.push(u[n])
            if n > args.local_window:
                rel = abs(state.evaluate() - direct[n]) / abs(direct[n])
                bad = max(bad, rel)
                if n % args.stride == 0:
                    rows.append([kind.value, n, rel])
        worst[kind.value] = bad
        print(f"{kind.value}: N={state.N} max rel err {bad:.3e}")
    dest = out / (args.output or "fastconv_check.csv")
    _write_csv(dest, ["contour", "n", "rel_err"], rows,
               comment=f"alpha={args.alpha},tau={args.tau},u=t^2+t")
    _write_manifest(dest, "fastconv-check", vars(args))
    print(f"wrote {dest}")
    if args.check and max(worst.values()) > 1e-8:
        print("fast convolution check FAILED", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def _add_scheme_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", default="gngf", choices=["gngf", "fbdf"])
    p.add_argument("-p", "--p", type=int, default=2, help="method order")
    p.add_argument("-q", "--q", type=int, default=2, help="perturbation order")


def _add_backend_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", default="fast", choices=["fast", "direct"])
    p.add_argument("--contour", default="talbot", choices=["talbot", "hyperbolic"])
    p.add_argument("-N", "--nodes", type=int, default=32, help="contour half node count")
    p.add_argument("--bin-base", type=int, default=5, help="window growth basis B")
    p.add_argument("--local-window", type=int, default=50, help="exact window length n0")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fastfode", description=__doc__)
    ap.add_argument("--outdir", default=None, help="output directory "
                    "(default $FASTFODE_OUTDIR or cwd)")
    ap.add_argument("--config", default=None, help="JSON config file with defaults")
    sub = ap.add_subparsers(dest="command", required=True)

    w = sub.add_parser("weights", help="emit convolution / starting weight tables")
    w.add_argument("--family", default="gngf", choices=["gngf", "fbdf"])
    w.add_argument("-p", "--p", type=int, default=2)
    w.add_argument("--alpha", type=float, required=True)
    w.add_argument("--tau", type=float, default=1.0)
    w.add_argument("-n", "--n", type=int, default=100)
    w.add_argument("--sigma", default=None, help="comma list of correction exponents")
    w.add_argument("-o", "--output", default=None)
    w.set_defaults(func=cmd_weights)

    s = sub.add_parser("stability", help="stability intervals, tables, region rasters")
    s.add_argument("--mode", default="table", choices=["table", "interval", "raster"])
    _add_scheme_flags(s)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--alphas", default="0.1,0.2,0.5,0.9")
    s.add_argument("--kappa", type=float, default=0.0)
    s.add_argument("--kappas", default="0,0.2,0.4,0.6,0.8,1.0,1.2,1.24,1.25,1.26,1.4")
    s.add_argument("--lam", type=float, default=-1.0)
    s.add_argument("--rho", type=float, default=-2.0)
    s.add_argument("--gamma", type=float, default=2.0)
    s.add_argument("--theta", type=float, default=0.5)
    s.add_argument("--grid", type=int, default=201)
    s.add_argument("--re-min", type=float, default=-8.0)
    s.add_argument("--re-max", type=float, default=2.0)
    s.add_argument("--im-min", type=float, default=-5.0)
    s.add_argument("--im-max", type=float, default=5.0)
    s.add_argument("--check", action="store_true")
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_stability)

    so = sub.add_parser("solve", help="run a benchmark case")
    so.add_argument("--case", required=True, choices=["1.1", "1.2", "1.3", "2.1", "2.2"])
    _add_scheme_flags(so)
    _add_backend_flags(so)
    so.add_argument("--alpha", type=float, default=0.5)
    so.add_argument("--alpha2", type=float, default=None, help="second field order (PDE)")
    so.add_argument("--alphas", default=None, help="sweep alpha group list")
    so.add_argument("--tau", type=float, default=None)
    so.add_argument("--tau-sweep", default=None, help="e.g. 2^-5..2^-9")
    so.add_argument("--T", type=float, default=None)
    so.add_argument("-m", "--m", type=int, default=1, help="correction term count")
    so.add_argument("--m-list", default=None, help="sweep m group list (case 1.1)")
    so.add_argument("--kappa", type=float, default=None)
    so.add_argument("--ref-tau", type=float, default=2.0**-13)
    so.add_argument("--at-final", action="store_true",
                    help="report the error at t=T instead of the sup over time")
    so.add_argument("--save-ref", action="store_true")
    so.add_argument("--h", type=int, default=32, help="PDE cells per dimension")
    so.add_argument("--mu", type=float, default=1.0)
    so.add_argument("--mu2", type=float, default=1.0)
    so.add_argument("--scheme", default="semi", choices=["semi", "implicit"])
    so.add_argument("--check", action="store_true")
    so.add_argument("-o", "--output", default=None)
    so.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="direct vs fast timing and memory scaling")
    b.add_argument("--case", default="1.3", choices=["1.1", "1.2", "1.3"])
    _add_scheme_flags(b)
    b.add_argument("--alpha", type=float, default=0.5)
    b.add_argument("--n-list", default="4096,8192,16384")
    b.add_argument("--T", type=float, default=20.0)
    b.add_argument("--contour", default="talbot", choices=["talbot", "hyperbolic"])
    b.add_argument("-N", "--nodes", type=int, default=32)
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--check", action="store_true")
    b.add_argument("-o", "--output", default=None)
    b.set_defaults(func=cmd_bench)

    fc = sub.add_parser("fastconv-check", help="fast vs direct convolution errors")
    fc.add_argument("--family", default="gngf", choices=["gngf", "fbdf"])
    fc.add_argument("-p", "--p", type=int, default=2)
    fc.add_argument("--alpha", type=float, default=0.5)
    fc.add_argument("--tau", type=float, default=0.01)
    fc.add_argument("-n", "--n", type=int, default=10000)
    fc.add_argument("-N", "--nodes", type=int, default=32)
    fc.add_argument("--bin-base", type=int, default=5)
    fc.add_argument("--local-window", type=int, default=50)
    fc.add_argument("--stride", type=int, default=10)
    fc.add_argument("--check", action="store_true")
    fc.add_argument("--dump-quadrature", action="store_true",
                    help="also write per-level node/weight CSVs (debug)")
    fc.add_argument("-o", "--output", default=None)
    fc.set_defaults(func=cmd_fastconv_check)
    return ap


def _apply_config_file(ap: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold --config file values in as defaults (flags still win)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        cfg_path = argv[i + 1]
    except IndexError:
        raise ConfigError("--config needs a file argument") from None
    data = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {a.dest for a in ap._actions}
    for sp in ap._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
        known |= {a.dest for a in sp._actions}
    extra: list[str] = []
    for key, val in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        extra += [f"--{key.replace('_', '-')}", str(val)]
    # Insert config-derived flags right after the subcommand token so that
    # explicit command-line flags (parsed later) win.
    subcommands = set(ap._subparsers._group_actions[0].choices)  # type: ignore[union-attr]
    out = argv[:i] + argv[i + 2 :]
    for j, tok in enumerate(out):
        if tok in subcommands:
            return out[: j + 1] + extra + out[j + 1 :]
    return out + extra


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        argv = _apply_config_file(ap, argv)
        args = ap.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
