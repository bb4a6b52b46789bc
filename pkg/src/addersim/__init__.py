"""Switch-level MOS simulation and comparison of low-transistor-count full adders."""

__version__ = "0.1.0"
