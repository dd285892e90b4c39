"""Cylindrical Bessel/Hankel functions and the smooth cutoff window.

All kernel evaluations in the package reduce to H0^(1), H1^(1) of real
positive argument and to the C-infinity compactly supported window chi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "WindowSpec",
    "bessel_j0j1y0y1",
    "hankel1",
    "window_chi",
]


def _check_positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("Bessel Y/Hankel functions require x > 0")
    return x


def bessel_j0j1y0y1(x):
    """Return (J0, J1, Y0, Y1) at real x > 0.

    Accepts scalars or arrays; raises ValueError for nonpositive input
    (Y0, Y1 are singular at the origin).
    """
    x = _check_positive(x)
    return _sp.j0(x), _sp.j1(x), _sp.y0(x), _sp.y1(x)


def hankel1(order, x):
    """H_n^(1)(x) = J_n(x) + i Y_n(x) for n in {0, 1} and real x > 0."""
    if order not in (0, 1):
        raise ValueError("only orders 0 and 1 are supported")
    x = _check_positive(x)
    return _sp.hankel1(order, x)


@dataclass(frozen=True)
class WindowSpec:
    """Smooth cutoff: chi(s) = 1 for s <= c1, 0 for s >= 1.

    The transition on (c1, 1) uses the canonical C-infinity bump
    chi(s) = exp(2 e^{-1/u} / (u - 1)) with u = (s - c1)/(1 - c1),
    which is monotone non-increasing and vanishes with all derivatives
    at both ends of the transition interval.
    """

    c1: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.c1 < 1.0:
            raise ValueError(f"window ratio c1 must lie in (0, 1), got {self.c1}")


def window_chi(s, spec: WindowSpec = WindowSpec()):
    """Evaluate the window and its exact derivative at s >= 0.

    Returns (value, derivative) with the same shape as s.  The derivative
    is the analytic d(chi)/ds, identically zero outside (c1, 1).
    """
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    val = np.zeros_like(s)
    der = np.zeros_like(s)

    c1 = spec.c1
    val[s <= c1] = 1.0
    mid = (s > c1) & (s < 1.0)
    if np.any(mid):
        u = (s[mid] - c1) / (1.0 - c1)
        e = np.exp(-1.0 / u)
        g = 2.0 * e / (u - 1.0)
        v = np.exp(g)
        # d/du [2 e^{-1/u}/(u-1)] = 2 e^{-1/u} [1/u^2 (u-1) - 1] / (u-1)^2
        dg = 2.0 * e * ((u - 1.0) / u**2 - 1.0) / (u - 1.0) ** 2
        val[mid] = v
        der[mid] = v * dg / (1.0 - c1)
    if scalar:
        return float(val[0]), float(der[0])
    return val, der
