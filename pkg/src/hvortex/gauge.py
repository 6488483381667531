"""Nonlocal gauge fields and the nonlinear Darboux transform.

a_theta and A_0 are radial integrals of the perturbation; the forward
map sends a degree-m perturbation eps to the degree-(m+1) field eps1,
and the inverse reconstruction recovers eps from eps1 by a Green-kernel
fixed point (real part through the elliptic solve, imaginary part
through a tail integral).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from hvortex.grid import ComplexRadialField, h1m_norm, lp_norm
from hvortex.spectra import (
    FundamentalSystem,
    _cum_tail_plain,
    fundamental_system_H,
    green_solve_H,
)
from hvortex.vortex import VortexProfile


@dataclass
class GaugeState:
    profile: VortexProfile
    a_theta: np.ndarray
    A0: np.ndarray | None = None
    source: str = ""

    def to_csv(self) -> str:
        import io

        buf = io.StringIO()
        buf.write("r,a_theta,A0\n")
        A0 = self.A0 if self.A0 is not None else np.zeros_like(self.a_theta)
        for r, a, b in zip(self.profile.grid.r, self.a_theta, A0):
            buf.write(f"{r:.17e},{a:.17e},{b:.17e}\n")
        return buf.getvalue()


@dataclass
class ReconstructionResult:
    eps: ComplexRadialField
    iterations: int
    final_update_norm: float
    converged: bool
    update_norms: list = field(default_factory=list)

    def log_json(self) -> str:
        return json.dumps(
            {
                "iterations": self.iterations,
                "final_update_norm": self.final_update_norm,
                "converged": self.converged,
                "update_norms": self.update_norms,
            },
            indent=2,
        )


def compute_a_theta(eps: ComplexRadialField, profile: VortexProfile) -> GaugeState:
    """a_theta(r) = -int_0^r Re(Q eps) sh ds - (1/2) int_0^r |eps|^2 sh ds."""
    g = profile.grid
    v = eps.values
    lin = g.cumint(np.real(profile.Q * v))
    quad = g.cumint(np.abs(v) ** 2)
    return GaugeState(profile, -(lin + 0.5 * quad), source="eps")


def compute_A0(
    eps1: ComplexRadialField, eps: ComplexRadialField, profile: VortexProfile
) -> GaugeState:
    """A_0(r) = (1/2) int_r^rmax (Re(eps1) Q + Re(eps1 conj(eps))) ds."""
    g = profile.grid
    integrand = np.real(eps1.values) * profile.Q + np.real(
        eps1.values * np.conj(eps.values)
    )
    A0 = 0.5 * g.cumint_tail(integrand)
    return GaugeState(profile, np.zeros(g.n), A0=A0, source="eps1,eps")


def darboux_forward(
    eps: ComplexRadialField,
    profile: VortexProfile,
    gauge: GaugeState | None = None,
) -> ComplexRadialField:
    """eps1 = d_r eps + ((A_theta-m)/sh) eps + (a_theta/sh)(Q + eps)."""
    g = profile.grid
    if gauge is None:
        gauge = compute_a_theta(eps, profile)
    v = eps.values
    out = g.ddr(v) + profile.v1 * v + (gauge.a_theta / g.sh) * (profile.Q + v)
    return ComplexRadialField(g, out, profile.m + 1)


def reconstruct_epsilon(
    eps1: ComplexRadialField,
    profile: VortexProfile,
    tol: float = 1e-10,
    max_iter: int = 50,
    fs: FundamentalSystem | None = None,
    guard: float = 1e-2,
) -> ReconstructionResult:
    """Invert the forward map by fixed-point iteration from eps = 0.

    Per sweep: (i) a_theta from the current eps; (ii) the elliptic
    source F; (iii) Re(eps) via the half-line Green kernel of H;
    (iv) Im(eps) from the tail integral of Im(eps1)/Q.  Contraction
    holds in the small-data regime, which the guard enforces.
    """
    g = profile.grid
    if lp_norm(eps1, 2) > guard:
        raise ValueError("eps1 too large for the contraction regime")
    if fs is None:
        fs = fundamental_system_H(profile)
    Q, sh, coth = profile.Q, g.sh, g.coth
    inv_Q = profile.inv_Q
    sqrt_sh = np.sqrt(sh)
    re1_over_Q = np.real(eps1.values) * inv_Q
    im1_over_Q = np.imag(eps1.values) * inv_Q
    # -(1/sh) d_r(sh g) = -coth g - g'
    F_fixed = -(coth * re1_over_Q + g.ddr(re1_over_Q))

    eps = np.zeros(g.n, dtype=complex)
    prev_update = np.inf
    increases = 0
    norms = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        state = compute_a_theta(ComplexRadialField(g, eps, profile.m), profile)
        ath_sh = state.a_theta / sh
        gterm = ath_sh * np.real(eps) * inv_Q
        F = F_fixed + coth * gterm + g.ddr(gterm) - 0.5 * np.abs(eps) ** 2
        re_new = Q * green_solve_H(sqrt_sh * F, fs) / sqrt_sh
        im_new = Q * (
            _cum_tail_plain(im1_over_Q, g.h)
            - _cum_tail_plain(ath_sh * inv_Q * np.imag(eps), g.h)
        )
        new = re_new + 1j * im_new
        update = h1m_norm(ComplexRadialField(g, new - eps, profile.m))
        norms.append(float(update))
        eps = new
        if update <= tol:
            converged = True
            break
        if update > prev_update:
            increases += 1
            if increases >= 2:
                raise RuntimeError("outside contraction regime")
        else:
            increases = 0
        prev_update = update
    return ReconstructionResult(
        eps=ComplexRadialField(g, eps, profile.m),
        iterations=it,
        final_update_norm=norms[-1] if norms else 0.0,
        converged=converged,
        update_norms=norms,
    )
