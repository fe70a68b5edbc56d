"""Limited-memory multipoint symmetric secant trust-region methods."""

__version__ = "0.1.0"
