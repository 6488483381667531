"""Radial grid on the hyperbolic plane with weighted calculus.

All integrals carry the measure sh(r) dr.  The grid is cell-centered,
r_i = (i - 1/2) h, so no node sits on the coordinate singularity r = 0
where coth(r) and 1/sh(r) blow up.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RadialGrid:
    """Uniform cell-centered discretization of (0, r_max].

    Nodes r_i = (i - 1/2) h for i = 1..n, midpoint quadrature weights
    w_i = sh(r_i) h.  Immutable; share freely across threads.
    """

    r_max: float
    n: int
    r: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)

    def __post_init__(self):
        if self.r_max <= 0 or self.n < 8:
            raise ValueError("need r_max > 0 and n >= 8")
        h = self.r_max / self.n
        r = (np.arange(1, self.n + 1) - 0.5) * h
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "_sh", np.sinh(r))
        object.__setattr__(self, "_ch", np.cosh(r))
        object.__setattr__(self, "_coth", np.cosh(r) / np.sinh(r))
        object.__setattr__(self, "_w", np.sinh(r) * h)

    @property
    def sh(self) -> np.ndarray:
        return self._sh

    @property
    def ch(self) -> np.ndarray:
        return self._ch

    @property
    def coth(self) -> np.ndarray:
        return self._coth

    @property
    def quad_weights(self) -> np.ndarray:
        """Midpoint weights for the hyperbolic measure sh(r) dr."""
        return self._w

    def integrate(self, values: np.ndarray) -> complex:
        """Integral over (0, r_max] against sh(r) dr."""
        return np.sum(values * self._w)

    def integrate_flat(self, values: np.ndarray) -> complex:
        """Integral over (0, r_max] against plain dr."""
        return np.sum(values) * self.h

    def cumint(self, values: np.ndarray) -> np.ndarray:
        """Running integral int_0^{r_i} f sh ds, midpoint rule.

        Node i sits at the center of cell i, so the running integral at
        r_i covers the first i-1 full cells plus half of cell i.
        """
        f = values * self._w
        c = np.cumsum(f)
        return c - 0.5 * f

    def cumint_tail(self, values: np.ndarray) -> np.ndarray:
        """Tail integral int_{r_i}^{r_max} f ds with plain dr measure."""
        f = values * self.h
        c = np.cumsum(f[::-1])[::-1]
        return c - 0.5 * f

    def cumint_tail_weighted(self, values: np.ndarray) -> np.ndarray:
        """Tail integral int_{r_i}^{r_max} f sh ds."""
        f = values * self._w
        c = np.cumsum(f[::-1])[::-1]
        return c - 0.5 * f

    def ddr(self, values: np.ndarray) -> np.ndarray:
        """Second-order first derivative; one-sided at the two ends."""
        v = np.asarray(values)
        d = np.empty_like(v)
        h = self.h
        d[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
        d[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
        return d

    def ddr_star(self, values: np.ndarray) -> np.ndarray:
        """Formal adjoint -d/dr - coth(r) under the sh dr inner product."""
        return -self.ddr(values) - self._coth * np.asarray(values)

    def d2dr(self, values: np.ndarray) -> np.ndarray:
        """Second-order second derivative, one-sided at the ends."""
        v = np.asarray(values)
        d = np.empty_like(v)
        h2 = self.h * self.h
        d[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h2
        d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
        d[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h2
        return d

    def refine(self) -> "RadialGrid":
        """Grid with the same r_max and half the spacing."""
        return RadialGrid(self.r_max, 2 * self.n)


class ComplexRadialField:
    """Complex radial sample with an equivariance degree.

    Values are immutable (array flagged read-only); build new fields
    rather than mutating.  Fields constructed by the admissible initial
    data generators fall off like r^degree at the origin.
    """

    def __init__(self, grid: RadialGrid, values, degree: int):
        if degree < 1:
            raise ValueError("equivariance degree must be >= 1")
        v = np.asarray(values, dtype=complex)
        if v.shape != grid.r.shape:
            raise ValueError("field/grid size mismatch")
        if not np.all(np.isfinite(v.view(float))):
            raise ValueError("non-finite field")
        v = v.copy()
        v.setflags(write=False)
        self.grid = grid
        self.values = v
        self.degree = int(degree)

    @classmethod
    def zero(cls, grid: RadialGrid, degree: int) -> "ComplexRadialField":
        return cls(grid, np.zeros(grid.n, dtype=complex), degree)

    def with_values(self, values) -> "ComplexRadialField":
        return ComplexRadialField(self.grid, values, self.degree)

    def admissible_origin(self, c: float = 50.0) -> bool:
        """|eps_i| <= c * r_i^degree on the first 10% of nodes."""
        k = max(4, self.grid.n // 10)
        r = self.grid.r[:k]
        return bool(np.all(np.abs(self.values[:k]) <= c * r**self.degree))

    def __add__(self, other: "ComplexRadialField") -> "ComplexRadialField":
        self._check_same(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "ComplexRadialField") -> "ComplexRadialField":
        self._check_same(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar) -> "ComplexRadialField":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def _check_same(self, other: "ComplexRadialField"):
        if self.grid is not other.grid and (
            self.grid.n != other.grid.n or self.grid.r_max != other.grid.r_max
        ):
            raise ValueError("fields live on different grids")
        if self.degree != other.degree:
            raise ValueError("degree mismatch")

    def to_csv(self) -> str:
        """Serialize as r,re,im with 18 significant digits."""
        buf = io.StringIO()
        g = self.grid
        buf.write(f"# m={self.degree} h={g.h!r} r_max={g.r_max!r}\n")
        buf.write("r,re,im\n")
        for r, v in zip(g.r, self.values):
            buf.write(f"{r:.17e},{v.real:.17e},{v.imag:.17e}\n")
        return buf.getvalue()


def lp_norm(f: ComplexRadialField, p) -> float:
    """Weighted L^p norm (int |f|^p sh dr)^{1/p}; p = inf is the node max."""
    v = f.values
    if not np.all(np.isfinite(v.view(float))):
        raise ValueError("non-finite field")
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(v)))
    p = float(p)
    if p < 1.0:
        raise ValueError("p must be >= 1 or inf")
    return float(f.grid.integrate(np.abs(v) ** p).real ** (1.0 / p))


def h1m_norm(f: ComplexRadialField) -> float:
    """Equivariant Sobolev norm ||d_r f||_{L^2} + ||f/sh||_{L^2}."""
    g = f.grid
    df = f.with_values(g.ddr(f.values))
    fs = f.with_values(f.values / g.sh)
    return lp_norm(df, 2) + lp_norm(fs, 2)


def ddr(f: ComplexRadialField) -> ComplexRadialField:
    return f.with_values(f.grid.ddr(f.values))


def ddr_star(f: ComplexRadialField) -> ComplexRadialField:
    return f.with_values(f.grid.ddr_star(f.values))


def inner_sh(f: ComplexRadialField, g: ComplexRadialField) -> complex:
    """Complex inner product int f conj(g) sh dr."""
    return complex(f.grid.integrate(f.values * np.conj(g.values)))
