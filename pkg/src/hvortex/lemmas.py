"""Monte-Carlo verification of the spatial-norm inequalities.

The stability argument rests on a handful of fixed-time estimates tying
the perturbation eps, its Darboux image eps1, and the gauge potentials
a_theta/sh and A_0 to each other in weighted L^p norms.  Their implicit
constants are never quantified analytically, so this module measures
them: each check evaluates the LHS/RHS ratio over a family of random
admissible fields and reports the worst case.  Ratios are reported, not
asserted, except for the pointwise embedding

    |eps(r)|^2 <= 2 ||eps/sh||_{L^2} ||d_r eps||_{L^2},

whose constant 2 is forced by the proof (fundamental theorem of calculus
plus Cauchy-Schwarz) and therefore must hold sample-by-sample up to
quadrature slack.

Two sample families, both m-equivariant-admissible at the origin:
Q-modulated Gaussians with random center/width/phase, and random
band-limited oscillations enveloped by r^m e^{-r}.  Samples are defined
by parameter records so the identical field can be rebuilt on a refined
grid for drift measurements.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import ComplexRadialField, h1m_norm, lp_norm
from .vortex import VortexProfile
from .gauge import compute_a_theta, compute_A0, darboux_forward


@dataclass
class InequalityCase:
    lemma: str
    lhs: str
    rhs: str
    exponents: tuple
    family: str
    worst_ratio: float
    n_samples: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "lemma": self.lemma,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "exponents": list(self.exponents),
            "family": self.family,
            "worst_ratio": self.worst_ratio,
            "n_samples": self.n_samples,
        }
        d.update(self.extra)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# ----------------------------------------------------------------- samples

def draw_sample_params(n_samples: int, seed: int = 0) -> list[dict]:
    """Grid-independent parameter records, alternating the two families."""
    rng = np.random.default_rng(seed)
    params = []
    for k in range(n_samples):
        if k % 2 == 0:
            params.append({
                "family": "gauss",
                "center": rng.uniform(1.0, 6.0),
                "width": rng.uniform(0.5, 2.0),
                "phase": rng.uniform(0.0, 2.0 * math.pi),
            })
        else:
            nmodes = 5
            params.append({
                "family": "band",
                "amp": rng.standard_normal(nmodes)
                + 1j * rng.standard_normal(nmodes),
                "freq": rng.uniform(0.2, 3.0, nmodes),
                "phase": rng.uniform(0.0, 2.0 * math.pi, nmodes),
            })
    return params


def build_sample(profile: VortexProfile, rec: dict,
                 amplitude: float) -> ComplexRadialField:
    """Realize a parameter record on profile's grid at given H1m size."""
    g = profile.grid
    if rec["family"] == "gauss":
        raw = profile.Q * np.exp(
            -((g.r - rec["center"]) / rec["width"]) ** 2
        ) * np.exp(1j * rec["phase"])
    else:
        osc = np.zeros(g.n, dtype=complex)
        for a, w, ph in zip(rec["amp"], rec["freq"], rec["phase"]):
            osc += a * np.cos(w * g.r + ph)
        raw = osc * g.r**profile.m * np.exp(-g.r)
    eps = ComplexRadialField(g, raw, profile.m)
    return ComplexRadialField(g, raw * (amplitude / h1m_norm(eps)),
                              profile.m)


def sample_fields(profile: VortexProfile, n_samples: int,
                  amplitude: float = 1e-3,
                  seed: int = 0) -> list[ComplexRadialField]:
    return [build_sample(profile, rec, amplitude)
            for rec in draw_sample_params(n_samples, seed)]


# ------------------------------------------------------------------ pieces

def _pieces(eps: ComplexRadialField, profile: VortexProfile):
    """All norm ingredients used by the checks, computed once per sample."""
    g = profile.grid
    gauge = compute_a_theta(eps, profile)
    eps1 = darboux_forward(eps, profile, gauge)
    ath_sh = ComplexRadialField(g, gauge.a_theta / g.sh, profile.m)
    A0 = compute_A0(eps1, eps, profile).A0
    return gauge, eps1, ath_sh, A0


def _safe_ratio(lhs: float, rhs: float) -> float:
    return 0.0 if lhs == 0.0 else lhs / rhs


# ------------------------------------------------------------------ checks

def check_eps_vs_eps1(p: float, samples, profile: VortexProfile,
                      family: str = "mixed") -> InequalityCase:
    """||eps||_p <= C (||eps1||_p + ||a/sh||_inf^2 + ||eps||_inf^2)."""
    worst = 0.0
    for eps in samples:
        _, eps1, ath_sh, _ = _pieces(eps, profile)
        lhs = lp_norm(eps, p)
        rhs = (lp_norm(eps1, p) + lp_norm(ath_sh, math.inf) ** 2
               + lp_norm(eps, math.inf) ** 2)
        worst = max(worst, _safe_ratio(lhs, rhs))
    return InequalityCase("eps_vs_eps1", "||eps||_p",
                          "||eps1||_p + ||a/sh||_inf^2 + ||eps||_inf^2",
                          (p,), family, worst, len(samples))


def check_a_theta_bound(p: float, samples, profile: VortexProfile,
                        family: str = "mixed") -> InequalityCase:
    """||a_theta/sh||_p <= C (1+||eps||_inf)(||eps||_inf + ||eps||_p)."""
    worst = 0.0
    for eps in samples:
        _, _, ath_sh, _ = _pieces(eps, profile)
        linf = lp_norm(eps, math.inf)
        lhs = lp_norm(ath_sh, p)
        rhs = (1.0 + linf) * (linf + lp_norm(eps, p))
        worst = max(worst, _safe_ratio(lhs, rhs))
    return InequalityCase("a_theta_bound", "||a_theta/sh||_p",
                          "(1+||eps||_inf)(||eps||_inf + ||eps||_p)",
                          (p,), family, worst, len(samples))


def check_A0_bound(p: float, samples, profile: VortexProfile,
                   family: str = "mixed") -> InequalityCase:
    """||A_0||_p <= C (1+||eps||_inf) ||eps1||_p."""
    g = profile.grid
    worst = 0.0
    for eps in samples:
        _, eps1, _, A0 = _pieces(eps, profile)
        lhs = lp_norm(ComplexRadialField(g, A0, profile.m), p)
        rhs = (1.0 + lp_norm(eps, math.inf)) * lp_norm(eps1, p)
        worst = max(worst, _safe_ratio(lhs, rhs))
    return InequalityCase("A0_bound", "||A_0||_p",
                          "(1+||eps||_inf) ||eps1||_p",
                          (p,), family, worst, len(samples))


def check_coth_weighted_bound(p: float, p1: float, p2: float, samples,
                              profile: VortexProfile,
                              family: str = "mixed") -> InequalityCase:
    """Hoelder-split bound, 1/p1 + 1/p2 = 1/p:

    ||coth (a/sh) eps1||_p <= C (1+||eps||_inf)(||eps||_inf+||eps||_p1)
                                ||eps1||_p2.
    """
    if abs(1.0 / p1 + 1.0 / p2 - 1.0 / p) > 1e-12:
        raise ValueError("exponents must satisfy 1/p1 + 1/p2 = 1/p")
    g = profile.grid
    worst = 0.0
    for eps in samples:
        _, eps1, ath_sh, _ = _pieces(eps, profile)
        prod = ComplexRadialField(
            g, g.coth * ath_sh.values * eps1.values, profile.m)
        linf = lp_norm(eps, math.inf)
        lhs = lp_norm(prod, p)
        rhs = ((1.0 + linf) * (linf + lp_norm(eps, p1))
               * lp_norm(eps1, p2))
        worst = max(worst, _safe_ratio(lhs, rhs))
    return InequalityCase("coth_weighted_bound",
                          "||coth (a_theta/sh) eps1||_p",
                          "(1+||eps||_inf)(||eps||_inf+||eps||_p1)"
                          " ||eps1||_p2",
                          (p, p1, p2), family, worst, len(samples))


def check_H1m_from_eps1(samples, profile: VortexProfile, p: float = 2.0,
                        family: str = "mixed") -> InequalityCase:
    """||eps/sh||_p and ||d_r eps||_p vs ||eps1||_p + gauge term.

    Records the larger of the two component ratios per sample, so one
    case covers both displays of the lemma.
    """
    g = profile.grid
    worst = 0.0
    for eps in samples:
        _, eps1, ath_sh, _ = _pieces(eps, profile)
        rhs = (lp_norm(eps1, p)
               + (1.0 + lp_norm(eps, math.inf)) * lp_norm(ath_sh, p))
        over_sh = lp_norm(
            ComplexRadialField(g, eps.values / g.sh, profile.m), p)
        deriv = lp_norm(
            ComplexRadialField(g, g.ddr(eps.values), profile.m), p)
        worst = max(worst, _safe_ratio(max(over_sh, deriv), rhs))
    return InequalityCase("H1m_from_eps1",
                          "max(||eps/sh||_p, ||d_r eps||_p)",
                          "||eps1||_p + (1+||eps||_inf) ||a/sh||_p",
                          (p,), family, worst, len(samples))


def check_sobolev_embedding(samples, profile: VortexProfile,
                            family: str = "mixed") -> InequalityCase:
    """Pointwise |eps(r)|^2 <= 2 ||eps/sh||_2 ||d_r eps||_2, constant 2.

    The only check with an analytically forced constant; the returned
    case carries the fraction of samples within the (1 + 10h) quadrature
    slack so callers can assert it.
    """
    g = profile.grid
    worst, n_pass = 0.0, 0
    slack = 1.0 + 10.0 * g.h
    for eps in samples:
        lhs = float(np.max(np.abs(eps.values)) ** 2)
        over_sh = lp_norm(
            ComplexRadialField(g, eps.values / g.sh, profile.m), 2)
        deriv = lp_norm(
            ComplexRadialField(g, g.ddr(eps.values), profile.m), 2)
        ratio = _safe_ratio(lhs, 2.0 * over_sh * deriv)
        worst = max(worst, ratio)
        if ratio <= slack:
            n_pass += 1
    return InequalityCase("sobolev_embedding", "max_r |eps|^2",
                          "2 ||eps/sh||_2 ||d_r eps||_2",
                          (2.0, 2.0), family, worst, len(samples),
                          extra={"n_within_constant": n_pass,
                                 "slack": slack})


# ------------------------------------------------------------------- suite

CHECK_MATRIX = [
    ("eps_vs_eps1", check_eps_vs_eps1, [(2.0,), (8.0 / 3.0,), (4.0,)]),
    ("a_theta_bound", check_a_theta_bound,
     [(2.0,), (4.0,), (math.inf,)]),
    ("A0_bound", check_A0_bound, [(2.0,), (8.0 / 3.0,), (4.0,)]),
    ("coth_weighted_bound", check_coth_weighted_bound,
     [(2.0, 4.0, 4.0), (4.0, 8.0, 8.0)]),
]


def run_lemma_suite(profile: VortexProfile, n_samples: int = 200,
                    amplitude: float = 1e-3, seed: int = 0,
                    profile_fine: VortexProfile | None = None) -> list[dict]:
    """All inequality checks with doubling/refinement drift per report.

    Drift fields compare the worst ratio against a run with twice the
    samples and, when profile_fine (same r_max, doubled n) is supplied,
    against the identical samples rebuilt on the finer grid.
    """
    params = draw_sample_params(2 * n_samples, seed)
    half = [build_sample(profile, rec, amplitude)
            for rec in params[:n_samples]]
    full = half + [build_sample(profile, rec, amplitude)
                   for rec in params[n_samples:]]
    fine = None
    if profile_fine is not None:
        fine = [build_sample(profile_fine, rec, amplitude)
                for rec in params[:n_samples]]

    def drifted(fn, exps):
        base = fn(*exps, half, profile)
        dbl = fn(*exps, full, profile)
        rep = base.to_dict()
        rep["doubling_drift"] = _safe_ratio(dbl.worst_ratio,
                                            base.worst_ratio)
        if fine is not None:
            ref = fn(*exps, fine, profile_fine)
            rep["refinement_drift"] = _safe_ratio(ref.worst_ratio,
                                                  base.worst_ratio)
        return rep

    reports = []
    for _, fn, exp_list in CHECK_MATRIX:
        for exps in exp_list:
            reports.append(drifted(fn, exps))
    reports.append(drifted(lambda s, pr: check_H1m_from_eps1(s, pr), ()))
    reports.append(drifted(
        lambda s, pr: check_sobolev_embedding(s, pr), ()))

    # equivalence band ||eps1||_2 / ||eps||_H1m over the base samples
    band = [lp_norm(darboux_forward(e, profile), 2) / h1m_norm(e)
            for e in half]
    reports.append({
        "lemma": "equivalence_band",
        "exponents": [2.0],
        "n_samples": n_samples,
        "band_low": min(band),
        "band_high": max(band),
        "worst_ratio": max(band),
    })
    return reports
