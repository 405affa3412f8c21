"""Numerical laboratory for self-approximation of the Riemann zeta function."""

from .zeta_kernel import EvalParams, RectRegion, count_zeros, log_zeta, zeta

__all__ = ["EvalParams", "RectRegion", "count_zeros", "log_zeta", "zeta"]
__version__ = "0.1.0"
