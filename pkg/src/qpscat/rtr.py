"""Robin-to-Robin maps for semi-infinite and bounded periodic layers.

Each map sends incoming Robin data gamma*du/dn - i*eta*u on the layer
boundary to the outgoing combination gamma*du/dn + i*eta*u, computed by
representing the layer solution as single-layer potentials and inverting
the resulting boundary-integral system.  Also provides the merge recursion
that collapses a stack of layers into a single map on its lowest interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .bie import ADJOINT_DOUBLE_LAYER, SINGLE_LAYER, OperatorRequest, assemble
from .geometry import DiscretizedCurve, layer_width, normal
from .green import ForbiddenShiftError, GreenParams, check_shift, mode_table
from .specfun import WindowSpec

__all__ = [
    "ImpedanceSpec",
    "RtRBlocks",
    "select_green",
    "rtr_semi_infinite",
    "rtr_middle",
    "merge",
]


@dataclass(frozen=True)
class ImpedanceSpec:
    """Robin coupling constant eta > 0; per-layer impedance Z = i*eta/gamma."""

    eta: float = 1.0

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")

    def z(self, gamma):
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return 1j * self.eta / gamma


@dataclass(frozen=True)
class RtRBlocks:
    """Discretized RtR map plus the retained interior solve.

    kind 'semi_infinite': s maps Robin data on the single interface.
    kind 'middle': the 2M x 2M map is partitioned into s_tt (top from top),
    s_tb (top from bottom), s_bt, s_bb.  lu holds the factored interior
    BIE system so layer densities can be recovered as phi = A^{-1} g.
    """

    kind: str
    green: GreenParams
    lu: linalg.LUFactors
    s: np.ndarray | None = None
    s_tt: np.ndarray | None = None
    s_tb: np.ndarray | None = None
    s_bt: np.ndarray | None = None
    s_bb: np.ndarray | None = None
    curve: DiscretizedCurve | None = None
    curve_top: DiscretizedCurve | None = None
    curve_bottom: DiscretizedCurve | None = None
    z: complex = 0.0
    s_mat: np.ndarray | None = None

    @property
    def full(self):
        if self.kind == "semi_infinite":
            return self.s
        return np.block([[self.s_tt, self.s_tb], [self.s_bt, self.s_bb]])

    def densities(self, g):
        """Recover the layer potential densities from incoming Robin data."""
        return linalg.solve(self.lu, np.asarray(g, dtype=complex))


def select_green(
    k,
    d,
    alpha,
    A,
    *,
    role,
    width=None,
    prefer="auto",
    j_shifts=3,
    h=None,
    wood_tol=0.05,
    window=WindowSpec(),
    c_r=None,
):
    """Choose plain or shifted Green parameters for one layer.

    role is 'top', 'bottom' or 'middle'.  In auto mode the shifted kernel
    is engaged exactly when the layer has a nonempty Wood set.  Default
    shifts: +-max(0.3, 0.2 d) for the semi-infinite layers, 1.1x the layer
    width for middle layers, stepped upward past the forbidden set.
    """
    modes = mode_table(k, d, alpha, wood_tol)
    use_shifted = prefer == "shifted" or (prefer == "auto" and bool(modes.wood_set))
    if prefer not in ("auto", "plain", "shifted"):
        raise ValueError(f"prefer must be auto/plain/shifted, got {prefer!r}")
    if not use_shifted:
        return GreenParams(k=k, d=d, alpha=alpha, A=A, window=window, wood_tol=wood_tol)
    if h is None:
        h = _default_shift(modes, role, d, width)
    return GreenParams(
        k=k, d=d, alpha=alpha, A=A, window=window, mode="shifted",
        h=h, j_shifts=j_shifts, wood_tol=wood_tol, c_r=c_r,
    )


def _default_shift(modes, role, d, width):
    if role == "top":
        return max(0.3, 0.2 * d)
    if role == "bottom":
        return -max(0.3, 0.2 * d)
    if role != "middle":
        raise ValueError(f"role must be top/bottom/middle, got {role!r}")
    if width is None:
        raise ValueError("middle-layer shift default needs the layer width")
    h = 1.1 * width
    for _ in range(1000):
        try:
            check_shift(modes, h)
            return h
        except ForbiddenShiftError:
            h += 0.05 * d
    raise ForbiddenShiftError("no admissible shift found near 1.1x layer width")


def _operators(green, source, target, normals, self_interaction):
    s = assemble(
        OperatorRequest(SINGLE_LAYER, green, source, target, self_interaction=self_interaction)
    )
    kt = assemble(
        OperatorRequest(
            ADJOINT_DOUBLE_LAYER, green, source, target,
            target_normals=normals, self_interaction=self_interaction,
        )
    )
    return s, kt


def rtr_semi_infinite(side, curve, green, impedance=ImpedanceSpec(), gamma=1.0) -> RtRBlocks:
    """RtR map of a semi-infinite layer above (side='top') or below
    (side='bottom') the interface: S = I + 2Z S_mat (I/2 + K^T - Z S_mat)^{-1}.

    The adjoint double layer uses the normal pointing out of the layer;
    in shifted mode the images must move away from the layer (h > 0 on top,
    h < 0 on bottom).
    """
    if side not in ("top", "bottom"):
        raise ValueError("side must be 'top' or 'bottom'")
    if green.mode == "shifted":
        if side == "top" and green.h <= 0:
            raise ValueError("top layer needs shift h > 0 (images below the curve)")
        if side == "bottom" and green.h >= 0:
            raise ValueError("bottom layer needs shift h < 0 (images above the curve)")
    n = normal(curve, "down" if side == "top" else "up")
    z = impedance.z(gamma)
    s_mat, kt = _operators(green, curve, curve, n, True)
    a = 0.5 * np.eye(curve.M) + kt - z * s_mat
    lu = linalg.lu_factor(a)
    s = np.eye(curve.M) + 2.0 * z * (s_mat @ linalg.inv(lu))
    return RtRBlocks(
        kind="semi_infinite", green=green, lu=lu, s=s, curve=curve, z=z, s_mat=s_mat
    )


def rtr_middle(curve_top, curve_bottom, green, impedance=ImpedanceSpec(), gamma=1.0) -> RtRBlocks:
    """RtR map of the bounded layer between two interfaces (2M x 2M).

    Densities live on both curves; outward normals point up on the top
    curve and down on the bottom one.  Shifted mode requires h larger than
    the vertical extent of the layer so no kernel pole enters it.
    """
    width = layer_width(curve_top.profile, curve_bottom.profile)
    if green.mode == "shifted" and green.h <= width:
        raise ValueError(
            f"middle-layer shift h = {green.h} must exceed the layer width {width:.3f}"
        )
    n_t = normal(curve_top, "up")
    n_b = normal(curve_bottom, "down")
    z = impedance.z(gamma)
    M = curve_top.M
    s_tt, kt_tt = _operators(green, curve_top, curve_top, n_t, True)
    s_bb, kt_bb = _operators(green, curve_bottom, curve_bottom, n_b, True)
    s_bt, kt_bt = _operators(green, curve_bottom, curve_top, n_t, False)
    s_tb, kt_tb = _operators(green, curve_top, curve_bottom, n_b, False)
    eye = np.eye(M)
    a = np.block(
        [
            [0.5 * eye + kt_tt - z * s_tt, kt_bt - z * s_bt],
            [kt_tb - z * s_tb, 0.5 * eye + kt_bb - z * s_bb],
        ]
    )
    smat = np.block([[s_tt, s_bt], [s_tb, s_bb]])
    lu = linalg.lu_factor(a)
    s = np.eye(2 * M) + 2.0 * z * (smat @ linalg.inv(lu))
    return RtRBlocks(
        kind="middle",
        green=green,
        lu=lu,
        s_tt=s[:M, :M],
        s_tb=s[:M, M:],
        s_bt=s[M:, :M],
        s_bb=s[M:, M:],
        curve_top=curve_top,
        curve_bottom=curve_bottom,
        z=z,
        s_mat=smat,
    )


def merge(s_top_prev, mid: RtRBlocks):
    """Collapse the map above a layer with the layer's own map.

    Returns (merged matrix on the layer's bottom interface, condition
    estimate of the inner inverse I - S_top S_tt).
    """
    if mid.kind != "middle":
        raise ValueError("merge needs a middle-layer RtR map")
    M = mid.s_tt.shape[0]
    inner = np.eye(M) - s_top_prev @ mid.s_tt
    lu = linalg.lu_factor(inner)
    merged = mid.s_bt @ linalg.solve(lu, s_top_prev @ mid.s_tb) + mid.s_bb
    return merged, lu.cond_estimate
