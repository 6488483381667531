"""Spectral analysis of R_Q and H.

Everything is done on the half line after conjugation by sh^{1/2}:
R_Q and calH become -d^2/dr^2 + V with the flat measure, so a plain
symmetric tridiagonal eigensolver applies.  Each matrix scan is
cross-checked by an independent Sturm oscillation count (the number of
zeros of the regular solution below energy E equals the number of
eigenvalues below E).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from hvortex.grid import RadialGrid
from hvortex.linops import PotentialTable
from hvortex.vortex import VortexProfile

ESSENTIAL_BOTTOM = 1.25  # = 1 + 1/4, hyperbolic spectral gap plus mass term


@dataclass
class SpectralReport:
    operator: str
    essential_spectrum_bottom: float
    gap_eigenvalues: list
    eigenvalue_errors: list
    resonance_indicator: float | None = None
    resonance_drift: float | None = None
    notes: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "operator": self.operator,
                "essential_spectrum_bottom": self.essential_spectrum_bottom,
                "gap_eigenvalues": self.gap_eigenvalues,
                "eigenvalue_errors": self.eigenvalue_errors,
                "resonance_indicator": self.resonance_indicator,
                "resonance_drift": self.resonance_drift,
                "notes": self.notes,
            },
            indent=2,
        )


@dataclass
class FundamentalSystem:
    grid: RadialGrid
    phi0: np.ndarray
    phiInf: np.ndarray
    wronskian: float
    wronskian_rel_stdev: float
    normalization: dict

    def to_csv(self) -> str:
        import io

        buf = io.StringIO()
        buf.write("r,phi0,phiInf\n")
        for r, a, b in zip(self.grid.r, self.phi0, self.phiInf):
            buf.write(f"{r:.17e},{a:.17e},{b:.17e}\n")
        return buf.getvalue()


def _matrix_eigs_below(V: np.ndarray, grid: RadialGrid, cutoff: float):
    """Eigenvalues of -d^2 + V (Dirichlet) strictly below cutoff."""
    h2 = grid.h * grid.h
    diag = 2.0 / h2 + V
    off = np.full(grid.n - 1, -1.0 / h2)
    vals = eigh_tridiagonal(
        diag, off, select="v", select_range=(-np.inf, cutoff), eigvals_only=True
    )
    return [float(v) for v in vals]


def _indicial_exponent(V: np.ndarray, grid: RadialGrid) -> float:
    """Regular-solution origin exponent nu from the fitted 1/r^2 strength.

    V ~ (nu^2 - nu) ... for -u'' + (c/r^2)u = E u with c = nu(nu-1), the
    regular branch is r^nu with nu = (1 + sqrt(1+4c))/2.
    """
    k = max(4, grid.n // 600)
    r = grid.r[:k]
    c = float(np.mean(V[:k] * r * r))
    return 0.5 * (1.0 + math.sqrt(max(1.0 + 4.0 * c, 0.0)))


def _shoot_count(V: np.ndarray, grid: RadialGrid, E: float, nu: float) -> int:
    """Sign changes of the regular solution of -u'' + Vu = Eu.

    Renormalized whenever |u| overflows its window, so growth never
    becomes fatal (the count only needs signs).
    """
    h = grid.h
    W = V - E
    r0 = grid.r[0]
    u_prev = r0**nu
    u = (r0 + h) ** nu
    count = 0
    # second-order recurrence u_{i+1} = 2u_i - u_{i-1} + h^2 W u_i
    for i in range(1, grid.n - 1):
        u_next = 2.0 * u - u_prev + h * h * W[i] * u
        if u_next == 0.0 or (u_next > 0) != (u > 0):
            count += 1
        u_prev, u = u, u_next
        if abs(u) > 1e250:
            u_prev *= 1e-250
            u *= 1e-250
    return count


def gap_eigenvalues_RQ(
    profile: VortexProfile, eta: float = 1e-3, deepen: float = 0.0
) -> SpectralReport:
    """Scan [0, 5/4 - eta] for eigenvalues of R_Q by two methods.

    `deepen` subtracts a constant from V_RQ (sanity oracle: an
    artificial well must produce bound states, proving the scan is not
    vacuously empty).
    """
    table = PotentialTable.from_profile(profile)
    g = profile.grid
    V = table.V_RQ_halfline - deepen
    cutoff = ESSENTIAL_BOTTOM - eta
    vals = _matrix_eigs_below(V, g, cutoff)
    nu = _indicial_exponent(V - V[-1], g)
    n_shoot = _shoot_count(V, g, cutoff, nu)
    if n_shoot != len(vals):
        raise RuntimeError(
            f"spectral count mismatch: matrix {len(vals)}, shooting {n_shoot}"
        )
    # crude error bars from a coarser matrix (Richardson gap)
    g2 = RadialGrid(g.r_max, g.n // 2)
    p2 = _restrict_potential(V, g, g2)
    vals2 = _matrix_eigs_below(p2, g2, cutoff)
    errs = [
        abs(v - w) for v, w in zip(vals, vals2)
    ] + [float("nan")] * (len(vals) - min(len(vals), len(vals2)))
    return SpectralReport(
        operator="R_Q" if deepen == 0.0 else f"R_Q - {deepen:g}",
        essential_spectrum_bottom=ESSENTIAL_BOTTOM - deepen,
        gap_eigenvalues=vals,
        eigenvalue_errors=errs,
        notes={"m": profile.m, "eta": eta, "indicial_exponent": nu},
    )


def _restrict_potential(V: np.ndarray, g: RadialGrid, g2: RadialGrid) -> np.ndarray:
    return np.interp(g2.r, g.r, V)


def _regular_solution_threshold(V_half: np.ndarray, grid: RadialGrid, nu: float):
    """Regular solution of -u'' + V_half u = (5/4) u on the grid."""
    h = grid.h
    W = V_half - ESSENTIAL_BOTTOM
    u = np.empty(grid.n)
    u[0] = grid.r[0] ** nu
    u[1] = grid.r[1] ** nu
    scalelog = 0.0
    for i in range(1, grid.n - 1):
        u[i + 1] = 2.0 * u[i] - u[i - 1] + h * h * W[i] * u[i]
        if abs(u[i + 1]) > 1e250:
            u[: i + 2] *= 1e-250
            scalelog += 250 * math.log(10.0)
    return u, scalelog


def resonance_test_RQ(profile: VortexProfile) -> SpectralReport:
    """Threshold test at E = 5/4 for R_Q.

    The regular solution, transported back to the hyperbolic-plane
    normalization, behaves like e^{-r/2}(alpha + beta r) at large r; a
    nonzero, refinement-stable beta (after normalization) certifies the
    absence of a threshold resonance.
    """
    g = profile.grid
    table = PotentialTable.from_profile(profile)
    V = table.V_RQ_halfline
    nu = _indicial_exponent(V - ESSENTIAL_BOTTOM + 1.25, g)

    def indicator(grid: RadialGrid, Vh: np.ndarray) -> float:
        u, _ = _regular_solution_threshold(Vh, grid, nu)
        u_h2 = u / np.sqrt(grid.sh)  # hyperbolic-plane form
        lo, hi = 0.6 * grid.r_max, 0.9 * grid.r_max
        win = (grid.r >= lo) & (grid.r <= hi)
        r = grid.r[win]
        basis = np.column_stack([np.exp(-r / 2), r * np.exp(-r / 2)])
        coef, *_ = np.linalg.lstsq(basis, u_h2[win], rcond=None)
        tail = grid.r >= grid.r_max / 2
        norm = math.sqrt(float(np.sum(u[tail] ** 2) * grid.h))
        return abs(coef[1]) / norm

    ind = indicator(g, V)
    g2 = g.refine()
    p2 = VortexProfile(
        grid=g2,
        m=profile.m,
        Q=np.interp(g2.r, g.r, profile.Q),
        Atheta=np.interp(g2.r, g.r, profile.Atheta),
        one_minus_Q=np.interp(g2.r, g.r, profile.one_minus_Q),
        m_minus_Atheta=np.interp(g2.r, g.r, profile.m_minus_Atheta),
        shoot_c=profile.shoot_c,
        residual_max=profile.residual_max,
    )
    V2 = PotentialTable.from_profile(p2).V_RQ_halfline
    ind2 = indicator(g2, V2)
    drift = abs(ind2 - ind) / max(abs(ind), 1e-300)
    return SpectralReport(
        operator="R_Q",
        essential_spectrum_bottom=ESSENTIAL_BOTTOM,
        gap_eigenvalues=[],
        eigenvalue_errors=[],
        resonance_indicator=ind,
        resonance_drift=drift,
        notes={"m": profile.m, "indicial_exponent": nu, "indicator_refined": ind2},
    )


def _cum_plain(f: np.ndarray, h: float) -> np.ndarray:
    """int_0^{r_i} f dr on the midpoint lattice."""
    c = np.cumsum(f) * h
    return c - 0.5 * f * h


def _cum_tail_plain(f: np.ndarray, h: float) -> np.ndarray:
    # Summed from the right so the tail decays to zero exactly; computing
    # it as total - cumsum leaves O(eps * total) remainders that get
    # multiplied by the exponentially growing homogeneous solution.
    c = np.cumsum(f[::-1])[::-1] * h
    return c - 0.5 * f * h


_SQRT5_2 = math.sqrt(5.0) / 2.0


def _integrate_halfline(V, grid, u0, up0, start, stop, direction=+1, substeps=8,
                        singular=None):
    """RK4 for u'' = V u between node indices (inclusive), adaptive near 0.

    ``V`` is sampled at the nodes and interpolated linearly at the RK4
    stage points.  A potential with a pole at r = 0 must not go through
    that interpolation; pass its analytic part as ``singular`` (a callable
    of r) and keep only the smooth remainder in ``V``.
    """
    h = grid.h * direction
    if singular is None:
        Vint = lambda r: np.interp(r, grid.r, V)
    else:
        Vint = lambda r: np.interp(r, grid.r, V) + singular(r)
    u = np.empty(grid.n)
    u[:] = np.nan
    uu, vv = u0, up0
    u[start] = uu
    rng = range(start, stop, direction)
    for i in rng:
        r = grid.r[i]
        sub = max(substeps, min(256, int(0.25 / min(r, r + h)) + 1))
        hs = h / sub
        for j in range(sub):
            rr = r + j * hs
            k1u, k1v = vv, Vint(rr) * uu
            k2u = vv + 0.5 * hs * k1v
            k2v = Vint(rr + 0.5 * hs) * (uu + 0.5 * hs * k1u)
            k3u = vv + 0.5 * hs * k2v
            k3v = Vint(rr + 0.5 * hs) * (uu + 0.5 * hs * k2u)
            k4u = vv + hs * k3v
            k4v = Vint(rr + hs) * (uu + hs * k3u)
            uu += hs * (k1u + 2 * k2u + 2 * k3u + k4u) / 6.0
            vv += hs * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0
        u[i + direction] = uu
    return u, vv


def fundamental_system_H(profile: VortexProfile) -> FundamentalSystem:
    """phi0 (regular, growing) and phiInf (decaying) for H f = 0."""
    g = profile.grid
    table = PotentialTable.from_profile(profile)
    # Split off the -1/(4 sh^2) pole: sh^{1/2} solves -u'' + (1/4 - 1/(4sh^2))u = 0
    # exactly, so the interpolated remainder V_H + 1/(4 sh^2) is smooth at 0.
    sing = lambda r: -0.25 / np.sinh(np.maximum(r, 1e-300)) ** 2
    Vs = table.V_H + 0.25 / g.sh**2

    # phi0 from the sh^{1/2} series: phi0 = sh^{1/2} (1 + O(r^{2m+2}))
    r0 = g.r[0]
    u0 = math.sqrt(math.sinh(r0))
    up0 = math.cosh(r0) / (2.0 * math.sqrt(math.sinh(r0)))
    phi0, _ = _integrate_halfline(Vs, g, u0, up0, 0, g.n - 1, singular=sing)

    # phiInf inward from the pure decaying exponential at r_max
    rN = g.r[-1]
    w0 = math.exp(-_SQRT5_2 * rN)
    wp0 = -_SQRT5_2 * w0
    phiInf, _ = _integrate_halfline(Vs, g, w0, wp0, g.n - 1, 0, direction=-1,
                                    singular=sing)

    d0 = g.ddr(phi0)
    dI = g.ddr(phiInf)
    Wr = d0 * phiInf - phi0 * dI
    mid = slice(g.n // 4, 3 * g.n // 4)
    W = float(np.mean(Wr[mid]))
    if abs(W) < 1e-10 * float(np.max(np.abs(phi0[mid])) * np.max(np.abs(phiInf[mid]))):
        raise RuntimeError("fundamental system degenerate")
    rel_stdev = float(np.std(Wr[mid]) / abs(W))
    return FundamentalSystem(
        grid=g,
        phi0=phi0,
        phiInf=phiInf,
        wronskian=W,
        wronskian_rel_stdev=rel_stdev,
        normalization={
            "phi0": "sh^(1/2) series at first node",
            "phiInf": f"exp(-sqrt(5)/2 r) at r_max = {g.r_max:g}",
        },
    )


def green_solve_H(F: np.ndarray, fs: FundamentalSystem) -> np.ndarray:
    """Solve H f = F via the two-point Green representation.

    f(r) = (1/W) [ phiInf(r) int_0^r phi0 F ds
                 + phi0(r) int_r^{rmax} phiInf F ds ].
    The sign of 1/W is fixed by H(f) = F itself (residual-tested).
    """
    g = fs.grid
    h = g.h
    inner = _cum_plain(fs.phi0 * F, h)
    outer = _cum_tail_plain(fs.phiInf * F, h)
    return (fs.phiInf * inner + fs.phi0 * outer) / fs.wronskian


def phi0_correction_exponent(fs: FundamentalSystem, m: int) -> float:
    """Leading exponent of phi0/sh^{1/2} - 1, expected 2m + 2.

    The integrated-out correction carries a small constant admixture from
    the finite-r0 start (~1e-9); that plateau is subtracted before
    fitting.  The fit includes an r^2 term for the relative next-order
    correction, since the clean power-law window is narrow for larger m.
    """
    g = fs.grid
    corr = fs.phi0 / np.sqrt(g.sh) - 1.0
    plateau = float(np.mean(corr[g.r < 0.05]))
    cc = np.abs(corr - plateau)
    win = (cc >= 30 * abs(plateau) + 1e-12) & (cc <= 1e-4) & (g.r <= 2.0)
    if win.sum() < 8:
        raise RuntimeError("no usable window for the phi0 correction fit")
    r = g.r[win]
    basis = np.column_stack([np.ones_like(r), np.log(r), r * r])
    coef, *_ = np.linalg.lstsq(basis, np.log(cc[win]), rcond=None)
    return float(coef[1])


def fundamental_asymptotics(fs: FundamentalSystem, m: int) -> dict:
    """Fitted large-r rates and small-r behaviors of the H system.

    Large r: both solutions are pure exponentials e^{+-sqrt(5)/2 r}
    (the half-line potential tends to 5/4); slopes fitted on the
    [0.5, 0.8] r_max window.  Small r: phi0 follows r^{1/2}; phiInf is
    an alpha sqrt(sh) + beta sqrt(sh) log th(r/2) combination, fitted by
    least squares on r <= 1/2 with the relative misfit reported.
    """
    g = fs.grid
    far = (g.r >= 0.5 * g.r_max) & (g.r <= 0.8 * g.r_max)
    rate0 = float(np.polyfit(g.r[far], np.log(np.abs(fs.phi0[far])), 1)[0])
    rateInf = float(np.polyfit(g.r[far], np.log(np.abs(fs.phiInf[far])), 1)[0])

    near = g.r <= 10.0 * g.r[0]
    exp0 = float(np.polyfit(np.log(g.r[near]),
                            np.log(np.abs(fs.phi0[near])), 1)[0])

    win = g.r <= 0.5
    sq = np.sqrt(g.sh[win])
    basis = np.column_stack([sq, sq * np.log(np.tanh(0.5 * g.r[win]))])
    coef, *_ = np.linalg.lstsq(basis, fs.phiInf[win], rcond=None)
    fitted = basis @ coef
    relres = float(np.max(np.abs(fs.phiInf[win] - fitted))
                   / np.max(np.abs(fs.phiInf[win])))
    return {
        "rate_phi0": rate0,
        "rate_phiInf": rateInf,
        "expected_rate": _SQRT5_2,
        "phi0_small_r_exponent": exp0,
        "phiInf_alpha": float(coef[0]),
        "phiInf_beta": float(coef[1]),
        "phiInf_log_fit_relres": relres,
        "phi0_correction_exponent": phi0_correction_exponent(fs, m),
    }


def _halfline_residual(u: np.ndarray, F: np.ndarray, V: np.ndarray,
                       grid: RadialGrid) -> float:
    """Relative residual of -u'' + V u = F on a fixed interior window.

    The probe stencil, not the solution, limits what can be measured at
    the ends: near the axis u behaves like sqrt(r), whose three-point
    second difference carries an O(h^2 r^{-7/2}) truncation error that
    *grows* at the first nodes under refinement, and at r_max the
    Dirichlet truncation leaves an O(u(r_max)/h^2) ghost.  Both are
    local artifacts, so the residual is taken on r in
    [1/2, r_max - 1/2], where it is a clean order-2 probe.
    """
    h = grid.h
    upp = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
    res = -upp + V[1:-1] * u[1:-1] - F[1:-1]
    win = (grid.r[1:-1] >= 0.5) & (grid.r[1:-1] <= grid.r_max - 0.5)
    return float(np.linalg.norm(res[win]) * math.sqrt(h)
                 / max(np.linalg.norm(F) * math.sqrt(h), 1e-300))


def green_residual_study(profile: VortexProfile,
                         profile_fine: VortexProfile,
                         n_sources: int = 20, seed: int = 0) -> dict:
    """Residual of H(Green(F)) = F on random sources, at h and h/2.

    Sources are Gaussians supported away from the axis: a source with
    F(0) != 0 excites the sqrt(r) log-branch pair of the limit-circle
    endpoint, whose cancellation between the two Green terms is only as
    good as the quadrature startup, leaving an O(F(0)) first-node
    artifact even though the solution itself still converges at second
    order.  Keeping the sources off the axis makes the residual a clean
    order probe.
    """
    rng = np.random.default_rng(seed)
    fs = fundamental_system_H(profile)
    fsf = fundamental_system_H(profile_fine)
    table = PotentialTable.from_profile(profile)
    tablef = PotentialTable.from_profile(profile_fine)
    g, gf = profile.grid, profile_fine.grid
    res_c, res_f, orders = [], [], []
    for _ in range(n_sources):
        c = rng.uniform(4.0, 0.5 * g.r_max)
        w = rng.uniform(0.5, 1.5)
        a = rng.uniform(0.5, 2.0)
        F = a * np.exp(-(((g.r - c) / w) ** 2))
        Ff = a * np.exp(-(((gf.r - c) / w) ** 2))
        u = green_solve_H(F, fs)
        uf = green_solve_H(Ff, fsf)
        rc = _halfline_residual(u, F, table.V_H, g)
        rf = _halfline_residual(uf, Ff, tablef.V_H, gf)
        res_c.append(rc)
        res_f.append(rf)
        orders.append(math.log2(rc / rf))
    return {
        "relres_coarse": res_c,
        "relres_fine": res_f,
        "orders": orders,
        "min_order": min(orders),
        "max_relres": max(res_c),
    }


def gap_scan_H(profile: VortexProfile, eta: float = 1e-3) -> SpectralReport:
    """Eigenvalue scan of H in (0, 5/4): reported, not asserted."""
    table = PotentialTable.from_profile(profile)
    g = profile.grid
    V = table.V_H
    cutoff = ESSENTIAL_BOTTOM - eta
    vals = _matrix_eigs_below(V, g, cutoff)
    vals = [v for v in vals if v > 1e-6]
    nu = _indicial_exponent(V + 0.25 / g.sh**2 - 1.25 + 1.0, g)  # ~ r^{1/2}
    n_shoot = _shoot_count(V, g, cutoff, 0.5) - _shoot_count(V, g, 1e-6, 0.5)
    if n_shoot != len(vals):
        raise RuntimeError(
            f"spectral count mismatch: matrix {len(vals)}, shooting {n_shoot}"
        )
    g2 = RadialGrid(g.r_max, g.n // 2)
    vals2 = _matrix_eigs_below(_restrict_potential(V, g, g2), g2, cutoff)
    vals2 = [v for v in vals2 if v > 1e-6]
    errs = [abs(v - w) for v, w in zip(vals, vals2)]
    return SpectralReport(
        operator="H",
        essential_spectrum_bottom=ESSENTIAL_BOTTOM,
        gap_eigenvalues=vals,
        eigenvalue_errors=errs,
        notes={"m": profile.m, "eta": eta, "origin_exponent": nu},
    )
