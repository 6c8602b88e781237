"""Elliptic Bloch groups: periods, Eisenstein-Kronecker series, heights,
divisor-level symbols and the exact-couple machinery behind them."""

__version__ = "0.1.0"

from .analytic import PrecisionCtx, elliptic_log, periods
from .curve import CurvePoint, RationalCurve, curve_by_label

__all__ = ["CurvePoint", "PrecisionCtx", "RationalCurve", "curve_by_label", "elliptic_log", "periods", "__version__"]
