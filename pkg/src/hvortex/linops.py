"""Linearized operators around the vortex.

Matrix-free actions for the first-order pair (L_Q, L_Q*) and their
nonlocal pieces (B_Q, B_Q*), the Darboux factors (A_Q, A_Q*), the
second-order Schrodinger operator R_Q on degree-(m+1) fields, and the
scalar elliptic operators calH = -Laplacian + Q^2 and its half-line
conjugate H.  Local operators are also assembled as tridiagonal
matrices: R_Q and calH symmetric in the sh-weighted inner product, H
symmetric in the flat one.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from hvortex.grid import ComplexRadialField, RadialGrid
from hvortex.vortex import VortexProfile

_LOCAL_KINDS = ("A_Q", "A_Q_star", "R_Q", "calH", "H")
_KINDS = ("L_Q", "L_Q_star", "B_Q", "B_Q_star") + _LOCAL_KINDS


@dataclass
class PotentialTable:
    """Tabulated potentials entering R_Q, H and calH.

    The d_r A_theta / sh term of R_Q is eliminated analytically with the
    Bogomolny equation before tabulation, so no derivative of the
    tabulated gauge field is ever taken.
    """

    grid: RadialGrid
    m: int
    V_RQ: np.ndarray
    V_H: np.ndarray
    V_calH: np.ndarray

    @classmethod
    def from_profile(cls, profile: VortexProfile) -> "PotentialTable":
        g = profile.grid
        sh, coth = g.sh, g.coth
        x = profile.one_minus_Q          # 1 - Q, no cancellation in the tail
        y = profile.m_minus_Atheta       # m - A_theta
        one_minus_Q2 = x * (2.0 - x)
        v1 = -y / sh                     # (A_theta - m)/sh
        V_RQ = 1.0 / sh**2 - 0.5 * one_minus_Q2 + 2.0 * coth * (y / sh) + v1**2
        V_H = -0.25 / sh**2 + 1.25 - one_minus_Q2
        V_calH = profile.Q**2
        return cls(grid=g, m=profile.m, V_RQ=V_RQ, V_H=V_H, V_calH=V_calH)

    @property
    def V_RQ_halfline(self) -> np.ndarray:
        """Potential of sh^{1/2} R_Q sh^{-1/2} = -d_r^2 + V."""
        return 1.25 - 0.25 / self.grid.sh**2 + self.V_RQ

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("r,V_RQ,V_H,V_calH\n")
        for r, a, b, c in zip(self.grid.r, self.V_RQ, self.V_H, self.V_calH):
            buf.write(f"{r:.17e},{a:.17e},{b:.17e},{c:.17e}\n")
        return buf.getvalue()


def _check(eps: ComplexRadialField, profile: VortexProfile, degree: int):
    if eps.grid is not profile.grid and not (
        eps.grid.n == profile.grid.n and eps.grid.r_max == profile.grid.r_max
    ):
        raise ValueError("field grid does not match profile grid")
    if eps.degree != degree:
        raise ValueError(f"field degree {eps.degree}, expected {degree}")


def apply_BQ(eps: ComplexRadialField, profile: VortexProfile) -> ComplexRadialField:
    """B_Q(eps) = (Q/sh) int_0^r Re(Q eps) sh ds.  Real-linear."""
    _check(eps, profile, profile.m)
    g = profile.grid
    integ = g.cumint(np.real(profile.Q * eps.values))
    return eps.with_values((profile.Q / g.sh) * integ)


def apply_BQ_star(f: ComplexRadialField, profile: VortexProfile) -> ComplexRadialField:
    """B_Q*(f) = Q int_r^rmax Re(f) ds (plain measure)."""
    g = profile.grid
    integ = g.cumint_tail(np.real(f.values))
    return f.with_values(profile.Q * integ)


def apply_LQ(eps: ComplexRadialField, profile: VortexProfile) -> ComplexRadialField:
    """L_Q eps = d_r eps + ((A_theta - m)/sh) eps - B_Q(eps)."""
    _check(eps, profile, profile.m)
    g = profile.grid
    out = g.ddr(eps.values) + profile.v1 * eps.values
    out -= apply_BQ(eps, profile).values
    return ComplexRadialField(g, out, profile.m + 1)


def apply_LQ_star(f: ComplexRadialField, profile: VortexProfile) -> ComplexRadialField:
    """L_Q* f = d_r* f + ((A_theta - m)/sh) f - B_Q*(Q f)."""
    _check(f, profile, profile.m + 1)
    g = profile.grid
    out = g.ddr_star(f.values) + profile.v1 * f.values
    out -= profile.Q * g.cumint_tail(np.real(profile.Q * f.values))
    return ComplexRadialField(g, out, profile.m)


def apply_AQ(f: ComplexRadialField, profile: VortexProfile) -> ComplexRadialField:
    g = profile.grid
    return f.with_values(g.ddr(f.values) + (profile.v1 - g.coth) * f.values)


def apply_AQ_star(f: ComplexRadialField, profile: VortexProfile) -> ComplexRadialField:
    g = profile.grid
    return f.with_values(g.ddr_star(f.values) + (profile.v1 - g.coth) * f.values)


def dstar_d(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Flux-form d_r* d_r, symmetric in the sh-weighted inner product.

    The face at r = 0 carries sh(0) = 0, which encodes regularity; the
    outer boundary is homogeneous Dirichlet (ghost node zero).
    """
    h = grid.h
    sh_face = np.sinh(np.arange(grid.n + 1) * h)  # faces at i*h
    out = np.empty_like(values)
    flux = np.zeros(grid.n + 1, dtype=values.dtype)
    flux[1:-1] = sh_face[1:-1] * (values[1:] - values[:-1]) / h
    flux[-1] = sh_face[-1] * (0.0 - values[-1]) / h
    out = -(flux[1:] - flux[:-1]) / (grid.sh * h)
    return out


def dstar_d_banded(grid: RadialGrid) -> np.ndarray:
    """(3, n) banded form of dstar_d for scipy.linalg.solve_banded."""
    h = grid.h
    sh_face = np.sinh(np.arange(grid.n + 1) * h)
    sh = grid.sh
    diag = (sh_face[:-1] + sh_face[1:]) / (sh * h * h)
    upper = np.zeros(grid.n)
    lower = np.zeros(grid.n)
    upper[1:] = -sh_face[1:-1] / (sh[:-1] * h * h)
    lower[:-1] = -sh_face[1:-1] / (sh[1:] * h * h)
    return np.vstack([upper, diag, lower])


def apply_RQ(eps1: ComplexRadialField, profile: VortexProfile) -> ComplexRadialField:
    """R_Q eps1 = (d_r* d_r + 1) eps1 + V_RQ eps1 on degree m+1."""
    _check(eps1, profile, profile.m + 1)
    table = PotentialTable.from_profile(profile)
    out = dstar_d(eps1.values, profile.grid) + (1.0 + table.V_RQ) * eps1.values
    return eps1.with_values(out)


def apply_calH(f: np.ndarray, profile: VortexProfile) -> np.ndarray:
    """calH f = (-Laplacian + Q^2) f on radial scalars (sh measure)."""
    return dstar_d(f, profile.grid) + profile.Q**2 * f


def apply_H(u: np.ndarray, profile: VortexProfile,
            table: PotentialTable | None = None) -> np.ndarray:
    """H u = -u'' + V_H u on the half line (flat measure)."""
    g = profile.grid
    if table is None:
        table = PotentialTable.from_profile(profile)
    h = g.h
    upp = np.empty_like(u)
    upp[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / (h * h)
    # one-sided second differences at the ends (4 nodes, O(h^2))
    upp[0] = (2 * u[0] - 5 * u[1] + 4 * u[2] - u[3]) / (h * h)
    upp[-1] = (2 * u[-1] - 5 * u[-2] + 4 * u[-3] - u[-4]) / (h * h)
    return -upp + table.V_H * u


def halfline_banded(V: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """(3, n) banded matrix of -d_r^2 + V with Dirichlet ends."""
    h2 = grid.h * grid.h
    n = grid.n
    diag = 2.0 / h2 + V
    off = np.full(n, -1.0 / h2)
    upper = off.copy()
    lower = off.copy()
    upper[0] = 0.0
    lower[-1] = 0.0
    return np.vstack([upper, diag, lower])


@dataclass
class OperatorHandle:
    """Dispatching wrapper; local kinds also expose a banded matrix."""

    kind: str
    profile: VortexProfile
    table: PotentialTable = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.table is None:
            self.table = PotentialTable.from_profile(self.profile)

    @property
    def is_local(self) -> bool:
        return self.kind in _LOCAL_KINDS

    def apply(self, f):
        p = self.profile
        if self.kind == "L_Q":
            return apply_LQ(f, p)
        if self.kind == "L_Q_star":
            return apply_LQ_star(f, p)
        if self.kind == "B_Q":
            return apply_BQ(f, p)
        if self.kind == "B_Q_star":
            return apply_BQ_star(f, p)
        if self.kind == "A_Q":
            return apply_AQ(f, p)
        if self.kind == "A_Q_star":
            return apply_AQ_star(f, p)
        if self.kind == "R_Q":
            return apply_RQ(f, p)
        if self.kind == "calH":
            return apply_calH(f, p)
        return apply_H(f, p, self.table)

    def banded(self) -> np.ndarray:
        """Tridiagonal matrix for the local second-order kinds."""
        g = self.profile.grid
        if self.kind == "R_Q":
            b = dstar_d_banded(g)
            b[1] += 1.0 + self.table.V_RQ
            return b
        if self.kind == "calH":
            b = dstar_d_banded(g)
            b[1] += self.table.V_calH
            return b
        if self.kind == "H":
            return halfline_banded(self.table.V_H, g)
        raise ValueError(f"no banded form for kind {self.kind!r}")

    def banded_text(self) -> str:
        b = self.banded()
        buf = io.StringIO()
        for off, row in zip((1, 0, -1), b):
            buf.write(str(off) + "," + ",".join(f"{v:.17e}" for v in row) + "\n")
        return buf.getvalue()


def build_H(profile: VortexProfile) -> OperatorHandle:
    return OperatorHandle("H", profile)


def build_calH(profile: VortexProfile) -> OperatorHandle:
    return OperatorHandle("calH", profile)
