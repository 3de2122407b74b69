"""omegasieve: omega_k(n) over h-free and h-full integers, with certified constants."""

__version__ = "1.0.0"
