"""Dense complex linear algebra helpers.

Thin wrappers over LAPACK (via scipy) providing LU factorization with a
1-norm condition estimate, and the jacobian-weighted discrete L2 norm used
throughout the Robin-to-Robin machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack as _lapack
from scipy.linalg import lu_solve

__all__ = [
    "LUFactors",
    "lu_factor",
    "solve",
    "weighted_norm",
    "trig_interp",
    "SingularMatrixError",
]


class SingularMatrixError(np.linalg.LinAlgError):
    """LU pivot breakdown; carries the offending pivot index."""

    def __init__(self, pivot_index, cond_estimate=np.inf):
        self.pivot_index = pivot_index
        self.cond_estimate = cond_estimate
        super().__init__(
            f"matrix is singular to working precision (pivot {pivot_index})"
        )


@dataclass(frozen=True)
class LUFactors:
    lu: np.ndarray
    piv: np.ndarray
    cond_estimate: float

    @property
    def n(self):
        return self.lu.shape[0]


def lu_factor(a) -> LUFactors:
    """LU with partial pivoting plus a 1-norm condition estimate.

    Raises SingularMatrixError on exact or near-exact singularity
    (pivot magnitude below 1e-14 * ||A||_1).
    """
    a = np.ascontiguousarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"square matrix required, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    anorm = np.linalg.norm(a, 1)
    lu, piv, info = _lapack.zgetrf(a)
    if info > 0:
        raise SingularMatrixError(info - 1)
    diag = np.abs(np.diagonal(lu))
    small = diag < 1e-14 * max(anorm, 1e-300)
    if np.any(small):
        raise SingularMatrixError(int(np.argmax(small)))
    rcond, _ = _lapack.zgecon(lu, anorm)
    cond = np.inf if rcond == 0.0 else 1.0 / rcond
    return LUFactors(lu, piv, float(cond))


def solve(factors: LUFactors, b):
    """Solve A x = b for one right-hand side or a matrix of them."""
    b = np.asarray(b, dtype=complex)
    return lu_solve((factors.lu, factors.piv), b)


def inv(factors: LUFactors):
    return solve(factors, np.eye(factors.n, dtype=complex))


def trig_interp(values, m_fine):
    """Trigonometric interpolation of equispaced periodic samples.

    Zero-pads the discrete spectrum (splitting the Nyquist coefficient)
    to m_fine equispaced nodes over the same period.
    """
    values = np.asarray(values, dtype=complex)
    m = len(values)
    if m_fine == m:
        return values.copy()
    if m_fine < m or m % 2 != 0:
        raise ValueError("m_fine must exceed the even input length")
    spec = np.fft.fft(values)
    out = np.zeros(m_fine, dtype=complex)
    h = m // 2
    out[:h] = spec[:h]
    out[h] = 0.5 * spec[h]
    out[m_fine - h] = 0.5 * spec[h]
    out[m_fine - h + 1 :] = spec[h + 1 :]
    return np.fft.ifft(out) * (m_fine / m)


def weighted_norm(v, weights):
    """Discrete L2 norm with positive quadrature weights: sqrt(sum w |v|^2)."""
    v = np.asarray(v)
    weights = np.asarray(weights, dtype=float)
    if np.any(weights <= 0):
        raise ValueError("quadrature weights must be positive")
    return float(np.sqrt(np.sum(weights * np.abs(v) ** 2)))
