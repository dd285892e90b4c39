"""Block-tridiagonal interface system for the layered transmission problem.

Unknowns are the incoming Robin data pairs f_j = [f_{j,j}; f_{j,j+1}] on
each interface (phase-extracted periodic samples).  The top pair holds the
scattered-field datum above Gamma_0 and the total-field datum below it; the
plane-wave forcing therefore enters only through the first interface.  The
solver eliminates interfaces top-to-bottom by recursive Schur complements,
which is algebraically the merge recursion on the Robin-to-Robin maps; a
dense assembly of the full system is kept as a reference oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .geometry import DiscretizedCurve, Profile, layer_width, normal, sample
from .rtr import ImpedanceSpec, RtRBlocks, rtr_middle, rtr_semi_infinite, select_green
from .specfun import WindowSpec

__all__ = [
    "Layer",
    "IncidentWave",
    "LayerStack",
    "StackBlocks",
    "SweepResult",
    "prepare_blocks",
    "build_rhs",
    "block2_inverse",
    "schur_sweep",
    "dense_reference_solve",
]


@dataclass(frozen=True)
class Layer:
    """Material of one layer: wavenumber k and transmission weight gamma."""

    k: float
    gamma: float = 1.0

    def __post_init__(self):
        if self.k <= 0 or self.gamma <= 0:
            raise ValueError("layer k and gamma must be positive")


@dataclass(frozen=True)
class IncidentWave:
    """Downgoing plane wave amplitude * e^{i(alpha x1 - beta x2)}."""

    k: float
    alpha: float = 0.0
    amplitude: complex = 1.0

    def __post_init__(self):
        if not abs(self.alpha) < self.k:
            raise ValueError("require |alpha| < k for a propagating incident wave")

    @classmethod
    def from_angle(cls, k, theta, amplitude=1.0):
        """theta is the angle from the downward vertical, in radians."""
        return cls(k=k, alpha=k * np.sin(theta), amplitude=amplitude)

    @property
    def beta(self):
        return float(np.sqrt(self.k**2 - self.alpha**2))

    def value(self, points):
        x = np.asarray(points, dtype=float)
        return self.amplitude * np.exp(
            1j * (self.alpha * x[..., 0] - self.beta * x[..., 1])
        )

    def gradient(self, points):
        v = self.value(points)
        return np.stack([1j * self.alpha * v, -1j * self.beta * v], axis=-1)


@dataclass(frozen=True)
class LayerStack:
    """N+2 layers separated by N+1 interface profiles, discretized with a
    common number of nodes M per period."""

    d: float
    layers: tuple[Layer, ...]
    profiles: tuple[Profile, ...]
    M: int
    eta: float = 1.0

    def __post_init__(self):
        if len(self.layers) != len(self.profiles) + 1:
            raise ValueError(
                f"{len(self.layers)} layers need {len(self.layers) - 1} "
                f"interfaces, got {len(self.profiles)}"
            )
        for p in self.profiles:
            if abs(p.d - self.d) > 1e-12 * self.d:
                raise ValueError("all interfaces must share the stack period")
        for upper, lower in zip(self.profiles, self.profiles[1:]):
            if upper.min_height <= lower.max_height:
                raise ValueError("interfaces must be strictly ordered top to bottom")

    @property
    def n_middle(self):
        return len(self.profiles) - 1

    @property
    def impedance(self):
        return ImpedanceSpec(eta=self.eta)

    def curves(self):
        return tuple(sample(p, self.M) for p in self.profiles)


@dataclass(frozen=True)
class StackBlocks:
    """Per-layer RtR maps: top semi-infinite, N middle, bottom semi-infinite."""

    stack: LayerStack
    curves: tuple[DiscretizedCurve, ...]
    top: RtRBlocks
    middle: tuple[RtRBlocks, ...]
    bottom: RtRBlocks

    @property
    def n_middle(self):
        return len(self.middle)


def prepare_blocks(
    stack: LayerStack,
    alpha,
    A,
    *,
    prefer="auto",
    j_shifts=3,
    shifts=None,
    wood_tol=0.05,
    window=WindowSpec(),
):
    """Compute every layer's RtR map.

    shifts optionally overrides the default shift per layer index
    (0 = top semi-infinite, ..., N+1 = bottom semi-infinite); entries may
    be None to keep the automatic choice.
    """
    curves = stack.curves()
    imp = stack.impedance
    n_layers = len(stack.layers)
    if shifts is None:
        shifts = [None] * n_layers
    if len(shifts) != n_layers:
        raise ValueError(f"need one shift entry per layer ({n_layers})")

    def green_for(idx, role, width=None):
        return select_green(
            stack.layers[idx].k, stack.d, alpha, A,
            role=role, width=width, prefer=prefer, j_shifts=j_shifts,
            h=shifts[idx], wood_tol=wood_tol, window=window,
        )

    top = rtr_semi_infinite(
        "top", curves[0], green_for(0, "top"), imp, stack.layers[0].gamma
    )
    middle = []
    for q in range(1, stack.n_middle + 1):
        width = layer_width(stack.profiles[q - 1], stack.profiles[q])
        middle.append(
            rtr_middle(
                curves[q - 1], curves[q], green_for(q, "middle", width),
                imp, stack.layers[q].gamma,
            )
        )
    bottom = rtr_semi_infinite(
        "bottom", curves[-1], green_for(n_layers - 1, "bottom"),
        imp, stack.layers[-1].gamma,
    )
    return StackBlocks(stack, curves, top, tuple(middle), bottom)


def build_rhs(blocks: StackBlocks, incident: IncidentWave):
    """Right-hand side of the interface system: zero except the first pair.

    The top pair carries minus the incoming/outgoing Robin data of the
    incident wave on Gamma_0, phase-extracted to periodic samples.
    """
    stack = blocks.stack
    if abs(incident.k - stack.layers[0].k) > 1e-12 * incident.k:
        raise ValueError("incident wavenumber must match the top layer")
    c0 = blocks.curves[0]
    n0 = normal(c0, "down")
    gamma0 = stack.layers[0].gamma
    eta = stack.eta
    u = incident.value(c0.x)
    dn = np.sum(incident.gradient(c0.x) * n0, axis=1)
    phase = np.exp(-1j * incident.alpha * c0.x[:, 0])
    f_in = -(gamma0 * dn - 1j * eta * u) * phase
    f_out = -(gamma0 * dn + 1j * eta * u) * phase
    rhs = np.zeros((stack.n_middle + 1, 2 * stack.M), dtype=complex)
    rhs[0, : stack.M] = f_in
    rhs[0, stack.M :] = f_out
    return rhs


@dataclass(frozen=True)
class Block2Inverse:
    """Explicit inverse of [[I, A], [B, I]] via the single factor (I - BA):
    [[I + A(I-BA)^{-1}B, -A(I-BA)^{-1}], [-(I-BA)^{-1}B, (I-BA)^{-1}]]."""

    a: np.ndarray
    b: np.ndarray
    inner: linalg.LUFactors  # LU of I - BA

    @property
    def cond_estimate(self):
        return self.inner.cond_estimate

    def apply(self, v):
        """Multiply the inverse by a stacked vector or matrix [v1; v2]."""
        v = np.asarray(v, dtype=complex)
        m = self.a.shape[0]
        v1, v2 = v[:m], v[m:]
        w2 = linalg.solve(self.inner, v2 - self.b @ v1)
        w1 = v1 - self.a @ w2
        return np.concatenate([w1, w2])

    def blocks(self):
        inv = linalg.inv(self.inner)
        return (
            np.eye(self.a.shape[0]) + self.a @ inv @ self.b,
            -self.a @ inv,
            -inv @ self.b,
            inv,
        )


def block2_inverse(a, b) -> Block2Inverse:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    inner = linalg.lu_factor(np.eye(a.shape[0]) - b @ a)
    return Block2Inverse(a, b, inner)


@dataclass(frozen=True)
class SweepResult:
    robin: np.ndarray  # (N+1, 2M) interface Robin pairs
    s_top_conds: tuple[float, ...]  # condition estimate per merge stage
    final_cond: float
    peak_cached_entries: int  # complex entries retained by the sweep cache


def schur_sweep(blocks: StackBlocks, rhs) -> SweepResult:
    """Forward elimination of the interface pairs through the layer chain,
    followed by the 2x2-block solve on the last interface and backward
    substitution.  Each stage factors one M x M matrix (I - S_top S_tt)."""
    stack = blocks.stack
    M = stack.M
    N = blocks.n_middle
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape != (N + 1, 2 * M):
        raise ValueError(f"rhs shape {rhs.shape}, expected {(N + 1, 2 * M)}")

    s_top = blocks.top.s
    r = rhs[0]
    cache = []  # per stage: (Dinv block column, Dinv @ r)
    conds = []
    peak = 0
    for j, mid in enumerate(blocks.middle, start=1):
        # eliminated diagonal at interface j-1: [[I, S_tt^j], [S_top, I]]
        dinv = block2_inverse(mid.s_tt, s_top)
        conds.append(dinv.cond_estimate)
        # coupling to f_j acts on its first component through S_tb^j
        dinv_a = dinv.apply(np.concatenate([mid.s_tb, np.zeros((M, M))]))
        dinv_r = dinv.apply(r)
        cache.append((dinv_a, dinv_r))
        peak = max(peak, sum(c[0].size + c[1].size for c in cache))
        # Schur update touches only the lower-left block: the result is the
        # merged map of everything above interface j
        s_top = mid.s_bb - mid.s_bt @ dinv_a[M:]
        r = np.concatenate([rhs[j][:M], rhs[j][M:] - mid.s_bt @ dinv_r[M:]])

    final = block2_inverse(blocks.bottom.s, s_top)
    f = np.zeros((N + 1, 2 * M), dtype=complex)
    f[N] = final.apply(r)
    for j in range(N, 0, -1):
        dinv_a, dinv_r = cache[j - 1]
        f[j - 1] = dinv_r - dinv_a @ f[j][:M]
    return SweepResult(f, tuple(conds), final.cond_estimate, peak)


def dense_reference_solve(blocks: StackBlocks, rhs, size_guard=6000):
    """Assemble and LU-solve the full block-tridiagonal interface system.

    Returns (robin data with the same layout as schur_sweep, condition
    estimate of the dense matrix).
    """
    stack = blocks.stack
    M = stack.M
    N = blocks.n_middle
    n = 2 * M * (N + 1)
    if n > size_guard:
        raise ValueError(
            f"dense reference size {n} exceeds the guard {size_guard}"
        )
    rhs = np.asarray(rhs, dtype=complex)
    big = np.zeros((n, n), dtype=complex)
    eye = np.eye(M)

    def put(bi, bj, mat):
        big[bi * M : (bi + 1) * M, bj * M : (bj + 1) * M] = mat

    # unknown layout: [f_{0,0}, f_{0,1}, f_{1,1}, f_{1,2}, ...]
    for j in range(N + 1):
        row_a, row_b = 2 * j, 2 * j + 1
        put(row_a, 2 * j, eye)
        below = blocks.middle[j] if j < N else None
        if below is not None:
            put(row_a, 2 * j + 1, below.s_tt)
            put(row_a, 2 * j + 2, below.s_tb)
        else:
            put(row_a, 2 * j + 1, blocks.bottom.s)
        above = blocks.middle[j - 1] if j > 0 else None
        if above is not None:
            put(row_b, 2 * j - 1, above.s_bt)
            put(row_b, 2 * j, above.s_bb)
        else:
            put(row_b, 2 * j, blocks.top.s)
        put(row_b, 2 * j + 1, eye)

    lu = linalg.lu_factor(big)
    sol = linalg.solve(lu, rhs.reshape(-1))
    return sol.reshape(N + 1, 2 * M), lu.cond_estimate
