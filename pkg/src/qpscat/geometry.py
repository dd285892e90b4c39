"""Periodic interface profiles and their equispaced discretizations.

A profile is a finite Fourier graph x2 = F(x1) with period d.  Curves are
parameterized by t in [0, 2*pi) through x1 = d*t/(2*pi) so that quadrature
and trigonometric interpolation are independent of the period.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Profile", "DiscretizedCurve", "sample", "normal", "layer_width"]


@dataclass(frozen=True)
class Profile:
    """Graph interface x2 = F(x1), F given by a finite Fourier series.

    cos_coeffs[m] multiplies cos(2*pi*(m+1)*x1/d), sin_coeffs[m] the
    matching sine; vertical_offset shifts the whole graph.
    """

    d: float
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()
    vertical_offset: float = 0.0

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("period d must be positive")
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(c) for c in self.sin_coeffs))

    @classmethod
    def flat(cls, d, level=0.0):
        return cls(d=d, vertical_offset=level)

    @classmethod
    def cosine(cls, d, height, offset=0.0):
        """The grating x2 = (height/2) * cos(2*pi*x1/d), shifted by offset."""
        return cls(d=d, cos_coeffs=(height / 2.0,), vertical_offset=offset)

    @classmethod
    def multi_harmonic(cls, d, height, offset=0.0):
        """pi*height*(0.4 cos - 0.2 cos 2. + 0.4 cos 3.), shifted by offset."""
        h = np.pi * height
        return cls(d=d, cos_coeffs=(0.4 * h, -0.2 * h, 0.4 * h), vertical_offset=offset)

    def shifted(self, dy):
        return Profile(self.d, self.cos_coeffs, self.sin_coeffs, self.vertical_offset + dy)

    def height(self, t):
        """F at parameter t (x1 = d*t/(2*pi)); t may be an array."""
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.vertical_offset)
        for m, c in enumerate(self.cos_coeffs, start=1):
            out += c * np.cos(m * t)
        for m, c in enumerate(self.sin_coeffs, start=1):
            out += c * np.sin(m * t)
        return out

    def height_t(self, t):
        """dF/dt."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for m, c in enumerate(self.cos_coeffs, start=1):
            out -= c * m * np.sin(m * t)
        for m, c in enumerate(self.sin_coeffs, start=1):
            out += c * m * np.cos(m * t)
        return out

    def height_tt(self, t):
        """d^2F/dt^2."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for m, c in enumerate(self.cos_coeffs, start=1):
            out -= c * m * m * np.cos(m * t)
        for m, c in enumerate(self.sin_coeffs, start=1):
            out -= c * m * m * np.sin(m * t)
        return out

    @property
    def max_height(self):
        t = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
        return float(np.max(self.height(t)))

    @property
    def min_height(self):
        t = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
        return float(np.min(self.height(t)))


@dataclass(frozen=True)
class DiscretizedCurve:
    """Equispaced samples of a profile with analytic differential geometry.

    All arrays have length M.  x is (M, 2); xp and xpp are the first and
    second t-derivatives of the parameterization; jacobian = |x'(t)|.
    """

    profile: Profile
    M: int
    t: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    xp: np.ndarray = field(repr=False)
    xpp: np.ndarray = field(repr=False)
    jacobian: np.ndarray = field(repr=False)
    curvature: np.ndarray = field(repr=False)

    @property
    def d(self):
        return self.profile.d

    @property
    def weights(self):
        """Arc-length quadrature weights (2*pi/M) * |x'(t)| per node."""
        return (2.0 * np.pi / self.M) * self.jacobian


def sample(profile: Profile, M: int) -> DiscretizedCurve:
    """Discretize a profile at the M equispaced parameter nodes t = 2*pi*l/M."""
    if M % 2 != 0 or M < 8:
        raise ValueError(f"node count M must be even and >= 8, got {M}")
    t = 2.0 * np.pi * np.arange(M) / M
    scale = profile.d / (2.0 * np.pi)
    x = np.column_stack([scale * t, profile.height(t)])
    xp = np.column_stack([np.full(M, scale), profile.height_t(t)])
    xpp = np.column_stack([np.zeros(M), profile.height_tt(t)])
    jac = np.hypot(xp[:, 0], xp[:, 1])
    if np.any(jac <= 0):
        raise ValueError("degenerate parameterization: |x'(t)| must be positive")
    curv = (xp[:, 0] * xpp[:, 1] - xp[:, 1] * xpp[:, 0]) / jac**3
    return DiscretizedCurve(profile, M, t, x, xp, xpp, jac, curv)


def normal(curve: DiscretizedCurve, orientation: str) -> np.ndarray:
    """Unit normals per node; 'down' has negative x2-component on a graph."""
    n = np.column_stack([curve.xp[:, 1], -curve.xp[:, 0]]) / curve.jacobian[:, None]
    if orientation == "down":
        return n
    if orientation == "up":
        return -n
    raise ValueError(f"orientation must be 'up' or 'down', got {orientation!r}")


def layer_width(top: Profile, bottom: Profile) -> float:
    """Vertical extent max(top) - min(bottom) of the layer between two graphs."""
    return top.max_height - bottom.min_height
