"""Figure renderers for the fastfode CLI's CSV artifacts (CSV contract only)."""

__version__ = "0.1.0"
