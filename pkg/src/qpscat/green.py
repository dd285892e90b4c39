"""Quasi-periodic Green functions: windowed and shifted evaluators plus
their spectral-series oracles, Rayleigh mode tables and Wood-set detection.

Conventions.  alpha_r = alpha + 2*pi*r/d and beta_r = sqrt(k^2 - alpha_r^2)
with the branch that is positive real for propagating orders and positive
imaginary for evanescent ones.  The free-space kernel is
G_k(x) = (i/4) H0^(1)(k |x|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .specfun import WindowSpec, hankel1, window_chi

__all__ = [
    "ModeTable",
    "GreenParams",
    "WoodFrequencyError",
    "ForbiddenShiftError",
    "SingularPointError",
    "mode_table",
    "free_green",
    "grad_free_green",
    "windowed_qp_green",
    "grad_windowed_qp_green",
    "shifted_windowed_qp_green",
    "grad_shifted_windowed_qp_green",
    "spectral_qp_green",
    "spectral_shifted_qp_green",
    "default_cr",
]

DEFAULT_WOOD_TOL = 0.05


class WoodFrequencyError(ValueError):
    """Plain quasi-periodic machinery requested at (or near) a Wood frequency."""


class ForbiddenShiftError(ValueError):
    """Shift h for which some propagating order satisfies e^{i beta_r h} = 1."""


class SingularPointError(ValueError):
    """Green function evaluated at (or too close to) a singular point/pole."""


# ---------------------------------------------------------------------------
# Rayleigh orders


def _beta(k, alpha_r):
    return np.sqrt(np.asarray(k**2 - np.asarray(alpha_r) ** 2, dtype=complex))


@dataclass(frozen=True)
class ModeTable:
    """Rayleigh orders r with alpha_r, beta_r and their classification."""

    k: float
    d: float
    alpha: float
    wood_tol: float
    r: np.ndarray = field(repr=False)
    alpha_r: np.ndarray = field(repr=False)
    beta_r: np.ndarray = field(repr=False)
    classification: np.ndarray = field(repr=False)

    @property
    def wood_set(self):
        """Orders classified as grazing (the set W)."""
        return [int(r) for r in self.r[self.classification == "grazing"]]

    @property
    def propagating(self):
        return [int(r) for r in self.r[self.classification == "propagating"]]

    def beta_of(self, r):
        idx = np.searchsorted(self.r, r)
        if idx >= len(self.r) or self.r[idx] != r:
            raise KeyError(f"order {r} outside tabulated range")
        return complex(self.beta_r[idx])


def mode_table(k, d, alpha, wood_tol=DEFAULT_WOOD_TOL, guard=8) -> ModeTable:
    """Tabulate all orders with |alpha_r| <= k plus `guard` evanescent orders
    on each side; grazing means |beta_r| <= wood_tol * (2*pi/d)."""
    if k <= 0 or d <= 0:
        raise ValueError("k and d must be positive")
    kd = 2.0 * np.pi / d
    r_lo = math.floor((-k - alpha) / kd) - guard
    r_hi = math.ceil((k - alpha) / kd) + guard
    r = np.arange(r_lo, r_hi + 1)
    alpha_r = alpha + kd * r
    beta_r = _beta(k, alpha_r)
    cls = np.where(
        np.abs(beta_r) <= wood_tol * kd,
        "grazing",
        np.where(beta_r.real > 0, "propagating", "evanescent"),
    )
    return ModeTable(float(k), float(d), float(alpha), float(wood_tol), r, alpha_r, beta_r, cls)


# ---------------------------------------------------------------------------
# Parameters


@dataclass(frozen=True)
class GreenParams:
    """Evaluation recipe for one quasi-periodic Green function.

    mode 'plain' is the windowed lattice sum of eq-type G_k^{q,A}; mode
    'shifted' adds j_shifts binomial shifts of size h plus the grazing-mode
    correction with coefficients c_r on the Wood set.
    """

    k: float
    d: float
    alpha: float
    A: float
    window: WindowSpec = WindowSpec()
    mode: str = "plain"
    h: float = 0.0
    j_shifts: int = 0
    wood_tol: float = DEFAULT_WOOD_TOL
    c_r: dict | None = None
    forbidden_tol: float = 1e-6

    def __post_init__(self):
        if self.d <= 0 or self.k <= 0:
            raise ValueError("k and d must be positive")
        if self.A <= self.d:
            raise ValueError(f"window size A = {self.A} must exceed the period d = {self.d}")
        if self.mode not in ("plain", "shifted"):
            raise ValueError(f"unknown mode {self.mode!r}")
        modes = self.modes
        if self.mode == "plain":
            if modes.wood_set:
                raise WoodFrequencyError(
                    f"k = {self.k} is a Wood frequency for d = {self.d}, "
                    f"alpha = {self.alpha} (grazing orders {modes.wood_set}); "
                    "use the shifted Green function"
                )
        else:
            if self.h == 0.0 or self.j_shifts < 1:
                raise ValueError("shifted mode requires h != 0 and j_shifts >= 1")
            check_shift(modes, self.h, self.forbidden_tol)
            for r, c in self.cr_table.items():
                if c == 0:
                    raise ValueError(f"coefficient c_{r} must be nonzero")

    @cached_property
    def modes(self) -> ModeTable:
        return mode_table(self.k, self.d, self.alpha, self.wood_tol)

    @cached_property
    def cr_table(self) -> dict:
        if self.mode != "shifted":
            return {}
        if self.c_r is not None:
            return {int(r): complex(c) for r, c in self.c_r.items()}
        return default_cr(self.modes)

    @property
    def n_images(self):
        """One-sided image count: terms beyond the window support vanish."""
        return int(np.ceil(self.A / self.d)) + 1


def default_cr(modes: ModeTable) -> dict:
    """Default grazing-mode coefficients c_r = i/(2d) for r in W."""
    return {r: 1j / (2.0 * modes.d) for r in modes.wood_set}


def check_shift(modes: ModeTable, h, forbidden_tol=1e-6):
    """Reject shifts on the explicitly computable forbidden set."""
    bad = [
        int(r)
        for r, b, c in zip(modes.r, modes.beta_r, modes.classification)
        if c == "propagating" and abs(1.0 - np.exp(1j * b * abs(h))) <= forbidden_tol
    ]
    if bad:
        raise ForbiddenShiftError(
            f"shift h = {h} satisfies e^(i beta_r h) = 1 for propagating orders {bad}"
        )


# ---------------------------------------------------------------------------
# Free-space kernel


def _radii(x):
    x = np.asarray(x, dtype=float)
    return np.hypot(x[..., 0], x[..., 1])


def free_green(k, x):
    """(i/4) H0^(1)(k |x|)."""
    rho = _radii(x)
    if np.any(rho == 0):
        raise SingularPointError("free-space Green function evaluated at its singularity")
    return 0.25j * hankel1(0, k * rho)


def grad_free_green(k, x):
    """Gradient of free_green with respect to x: -(ik/4) H1^(1)(k|x|) x/|x|."""
    x = np.asarray(x, dtype=float)
    rho = _radii(x)
    if np.any(rho == 0):
        raise SingularPointError("free-space Green function evaluated at its singularity")
    fac = -0.25j * k * hankel1(1, k * rho) / rho
    return fac[..., None] * x


# ---------------------------------------------------------------------------
# Windowed lattice sums


def _image_term(p: GreenParams, x, n, ell=0):
    """One lattice image: value and (chi-weighted) pieces for gradients."""
    x = np.asarray(x, dtype=float)
    z = x.copy()
    z[..., 0] += n * p.d
    z[..., 1] += ell * p.h
    rho = np.hypot(z[..., 0], z[..., 1])
    return z, rho


def windowed_qp_green(p: GreenParams, x):
    """Windowed quasi-periodic Green function G_k^{q,A} at points x."""
    if p.mode != "plain":
        raise ValueError("windowed_qp_green requires plain mode; see shifted_windowed_qp_green")
    return _windowed_sum(p, x, grad=False)


def grad_windowed_qp_green(p: GreenParams, x):
    if p.mode != "plain":
        raise ValueError("windowed_qp_green requires plain mode; see shifted_windowed_qp_green")
    return _windowed_sum(p, x, grad=True)


def _windowed_sum(p, x, grad, shifts=((0, 1.0),)):
    """Sum over images n and (ell, binomial weight) pairs of the windowed kernel."""
    if grad:
        return _windowed_grad(p, x, shifts)
    x0 = np.asarray(x, dtype=float)
    x = x0.reshape(-1, 2)
    out = np.zeros(x.shape[:-1], dtype=complex)
    for n in range(-p.n_images, p.n_images + 1):
        phase = np.exp(-1j * p.alpha * n * p.d)
        for ell, w in shifts:
            _, rho = _image_term(p, x, n, ell)
            if np.any(rho < 1e-10 * p.d):
                raise SingularPointError(
                    f"evaluation point within 1e-10*d of the image/pole at n={n}, ell={ell}"
                )
            chi, _ = window_chi(rho / p.A, p.window)
            live = chi != 0.0
            if not np.any(live):
                continue
            g = np.zeros_like(out)
            g[live] = 0.25j * hankel1(0, p.k * rho[live])
            out += (phase * w) * g * chi
    return out.reshape(x0.shape[:-1])


def _windowed_grad(p, x, shifts):
    x0 = np.asarray(x, dtype=float)
    x = x0.reshape(-1, 2)
    gout = np.zeros(x.shape[:-1] + (2,), dtype=complex)
    for n in range(-p.n_images, p.n_images + 1):
        phase = np.exp(-1j * p.alpha * n * p.d)
        for ell, w in shifts:
            z, rho = _image_term(p, x, n, ell)
            if np.any(rho < 1e-10 * p.d):
                raise SingularPointError(
                    f"evaluation point within 1e-10*d of the image/pole at n={n}, ell={ell}"
                )
            chi, dchi = window_chi(rho / p.A, p.window)
            live = chi != 0.0
            if not np.any(live):
                continue
            rl = rho[live]
            rhat = z[live] / rl[..., None]
            g = 0.25j * hankel1(0, p.k * rl)
            dg = -0.25j * p.k * hankel1(1, p.k * rl)
            term = (chi[live] * dg + g * dchi[live] / p.A)[..., None] * rhat
            gout[live] += (phase * w) * term
    return gout.reshape(x0.shape[:-1] + (2,))


def _binomial_shifts(p: GreenParams):
    return [(ell, (-1.0) ** ell * math.comb(p.j_shifts, ell)) for ell in range(p.j_shifts + 1)]


def _wood_correction(p: GreenParams, x, grad=False):
    """Separable grazing-mode term sum_r c_r e^{i alpha_r x1 + i sign(h) beta_r x2}."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1], dtype=complex)
    gout = np.zeros(x.shape[:-1] + (2,), dtype=complex)
    sgn = np.sign(p.h)
    for r, c in p.cr_table.items():
        ar = p.alpha + 2.0 * np.pi * r / p.d
        br = complex(_beta(p.k, ar))
        e = c * np.exp(1j * ar * x[..., 0] + 1j * sgn * br * x[..., 1])
        out += e
        if grad:
            gout[..., 0] += 1j * ar * e
            gout[..., 1] += 1j * sgn * br * e
    return gout if grad else out


def shifted_windowed_qp_green(p: GreenParams, x):
    """Shifted windowed quasi-periodic Green function G_{k,h}^{q,j,A}."""
    if p.mode != "shifted":
        raise ValueError("shifted_windowed_qp_green requires shifted mode")
    return _windowed_sum(p, x, grad=False, shifts=_binomial_shifts(p)) + _wood_correction(p, x)


def grad_shifted_windowed_qp_green(p: GreenParams, x):
    if p.mode != "shifted":
        raise ValueError("shifted_windowed_qp_green requires shifted mode")
    return _windowed_grad(p, x, _binomial_shifts(p)) + _wood_correction(p, x, grad=True)


# ---------------------------------------------------------------------------
# Spectral (frequency-domain) oracles


def spectral_qp_green(k, d, alpha, x, tol=1e-16, max_orders=100000):
    """Frequency-domain series (i/2d) sum_r e^{i alpha_r x1 + i beta_r |x2|} / beta_r.

    Requires |x2| > 0; refuses at Wood frequencies where some beta_r = 0.
    Truncated once evanescent terms fall below tol of the running sum.
    """
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    if np.any(x2 == 0):
        raise ValueError("spectral series requires |x2| > 0")
    kd = 2.0 * np.pi / d
    out = np.zeros(x.shape[:-1], dtype=complex)
    r0 = int(np.round(-alpha / kd))
    r = 0
    while True:
        done = True
        for rr in {r0 + r, r0 - r}:
            ar = alpha + kd * rr
            br = complex(_beta(k, ar))
            if abs(br) < 1e-10 * kd:
                raise WoodFrequencyError(f"beta_{rr} = 0: spectral series diverges")
            term = (0.5j / d) * np.exp(1j * ar * x1 + 1j * br * np.abs(x2)) / br
            out += term
            if np.max(np.abs(term)) > tol * max(np.max(np.abs(out)), 1e-300):
                done = False
        if done and abs(alpha + kd * (r0 + r)) > k and abs(alpha + kd * (r0 - r)) > k:
            break
        r += 1
        if r > max_orders:
            raise RuntimeError("spectral series failed to converge")
    return out


def spectral_shifted_qp_green(p: GreenParams, x, tol=1e-16, max_orders=100000):
    """Frequency-domain form of the shifted Green function (radiating side).

    Valid for sign(x2) = sign(h):
      (i/2d) sum_{r not in W} e^{i alpha_r x1} (1 - e^{i beta_r |h|})^j
             e^{i beta_r |x2|} / beta_r  +  Wood correction.
    """
    if p.mode != "shifted":
        raise ValueError("spectral_shifted_qp_green requires shifted mode")
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    if np.any(x2 * np.sign(p.h) <= 0):
        raise ValueError("spectral form valid only on the radiating side sign(x2) = sign(h)")
    kd = 2.0 * np.pi / p.d
    wood = set(p.cr_table)
    out = np.zeros(x.shape[:-1], dtype=complex)
    r0 = int(np.round(-p.alpha / kd))
    r = 0
    while True:
        done = True
        for rr in {r0 + r, r0 - r}:
            if rr in wood:
                continue
            ar = p.alpha + kd * rr
            br = complex(_beta(p.k, ar))
            fac = (1.0 - np.exp(1j * br * abs(p.h))) ** p.j_shifts
            term = (0.5j / p.d) * fac * np.exp(1j * ar * x1 + 1j * br * np.abs(x2)) / br
            out += term
            if np.max(np.abs(term)) > tol * max(np.max(np.abs(out)), 1e-300):
                done = False
        if done and abs(p.alpha + kd * (r0 + r)) > p.k and abs(p.alpha + kd * (r0 - r)) > p.k:
            break
        r += 1
        if r > max_orders:
            raise RuntimeError("spectral series failed to converge")
    return out + _wood_correction(p, x)
