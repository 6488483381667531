"""Inequality harness: trivial cases, structure, and the forced constant."""

import math

import numpy as np
import pytest

from hvortex import ComplexRadialField, lp_norm
from hvortex.gauge import compute_a_theta
from hvortex.lemmas import (
    build_sample,
    draw_sample_params,
    sample_fields,
    check_eps_vs_eps1,
    check_a_theta_bound,
    check_A0_bound,
    check_coth_weighted_bound,
    check_H1m_from_eps1,
    check_sobolev_embedding,
)


@pytest.fixture(scope="module")
def samples(profile):
    return sample_fields(profile, 40, seed=7)


def test_zero_field_gives_zero_ratio(profile):
    z = [ComplexRadialField.zero(profile.grid, 1)]
    for case in (check_eps_vs_eps1(2.0, z, profile),
                 check_a_theta_bound(2.0, z, profile),
                 check_A0_bound(2.0, z, profile),
                 check_coth_weighted_bound(2.0, 4.0, 4.0, z, profile),
                 check_H1m_from_eps1(z, profile),
                 check_sobolev_embedding(z, profile)):
        assert case.worst_ratio == 0.0


def test_samples_are_admissible(samples):
    assert all(s.admissible_origin() for s in samples)


def test_sample_rebuild_deterministic(profile):
    params = draw_sample_params(6, seed=11)
    a = build_sample(profile, params[0], 1e-3)
    b = build_sample(profile, params[0], 1e-3)
    assert np.array_equal(a.values, b.values)


def test_imaginary_eps_has_smaller_a_theta(profile):
    # purely imaginary data kills the linear Re(Q eps) source, leaving
    # only the quadratic term
    g = profile.grid
    raw = 1e-3 * profile.Q * np.exp(-((g.r - 3.0) ** 2))
    re = ComplexRadialField(g, raw + 0j, 1)
    im = ComplexRadialField(g, 1j * raw, 1)
    n_re = lp_norm(ComplexRadialField(
        g, compute_a_theta(re, profile).a_theta / g.sh, 1), 2)
    n_im = lp_norm(ComplexRadialField(
        g, compute_a_theta(im, profile).a_theta / g.sh, 1), 2)
    assert n_im < n_re / 10.0


def test_worst_ratios_finite(profile, samples):
    for p in (2.0, 8.0 / 3.0, 4.0):
        assert math.isfinite(check_eps_vs_eps1(p, samples, profile).worst_ratio)
    for p in (2.0, 4.0, math.inf):
        assert math.isfinite(
            check_a_theta_bound(p, samples, profile).worst_ratio)


def test_hoelder_exponent_validation(profile, samples):
    with pytest.raises(ValueError):
        check_coth_weighted_bound(2.0, 3.0, 4.0, samples, profile)


def test_embedding_constant_two_holds(profile, samples):
    case = check_sobolev_embedding(samples, profile)
    assert case.extra["n_within_constant"] == case.n_samples
    assert case.worst_ratio <= case.extra["slack"]


def test_amplitude_robustness(profile):
    # constants barely move across the smallness regime
    worsts = []
    for amp in (1e-4, 1e-3, 1e-2):
        s = sample_fields(profile, 30, amplitude=amp, seed=5)
        worsts.append(check_eps_vs_eps1(2.0, s, profile).worst_ratio)
    assert max(worsts) <= 2.0 * min(worsts)


def test_case_json_round_trip(profile, samples):
    import json

    case = check_A0_bound(2.0, samples, profile)
    loaded = json.loads(case.to_json())
    assert loaded["lemma"] == "A0_bound"
    assert loaded["n_samples"] == len(samples)
