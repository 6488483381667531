"""Gauge potentials and the Darboux transform, both directions."""

import numpy as np
import pytest

from hvortex import (
    ComplexRadialField,
    h1m_norm,
    compute_a_theta,
    compute_A0,
    darboux_forward,
    reconstruct_epsilon,
)


def _eps(profile, amp=1e-3, c=3.0, phase=0.0):
    g = profile.grid
    raw = amp * profile.Q * np.exp(-((g.r - c) ** 2)) * np.exp(1j * phase)
    return ComplexRadialField(g, raw, profile.m)


def test_zero_maps_to_zero(profile):
    z = ComplexRadialField.zero(profile.grid, 1)
    assert np.max(np.abs(compute_a_theta(z, profile).a_theta)) == 0.0
    assert np.max(np.abs(darboux_forward(z, profile).values)) == 0.0


def test_a_theta_derivative_identity(profile):
    # d_r a_theta = -sh (Re(Q eps) + |eps|^2 / 2)
    g = profile.grid
    eps = _eps(profile, amp=1e-2, phase=0.8)
    ath = compute_a_theta(eps, profile).a_theta
    lhs = g.ddr(ath)[2:-2]
    rhs = (-g.sh * (np.real(profile.Q * eps.values)
                    + 0.5 * np.abs(eps.values) ** 2))[2:-2]
    # centered difference of the midpoint cumulative integral is
    # second order; ~5e-5 relative at h = 0.01
    assert np.max(np.abs(lhs - rhs)) < 2e-4 * np.max(np.abs(rhs))


def test_a_theta_quadratic_scaling(profile):
    # a_theta(2 eps) - 2 a_theta(eps) isolates the |eps|^2 part exactly
    g = profile.grid
    eps = _eps(profile, amp=1e-2)
    a1 = compute_a_theta(eps, profile).a_theta
    a2 = compute_a_theta(2.0 * eps, profile).a_theta
    quad = -g.cumint(np.abs(eps.values) ** 2)
    assert np.allclose(a2 - 2.0 * a1, quad, atol=1e-15)


def test_A0_is_real_decaying_tail(profile):
    eps = _eps(profile, amp=1e-2, phase=1.1)
    eps1 = darboux_forward(eps, profile)
    A0 = compute_A0(eps1, eps, profile).A0
    assert np.isrealobj(A0) or np.max(np.abs(np.imag(A0))) == 0.0
    assert A0[-1] == pytest.approx(0.0, abs=1e-10)


def test_darboux_raises_degree(profile):
    eps = _eps(profile)
    assert darboux_forward(eps, profile).degree == profile.m + 1


def test_round_trip(profile):
    eps = _eps(profile)
    eps1 = darboux_forward(eps, profile)
    res = reconstruct_epsilon(eps1, profile)
    assert res.converged
    err = h1m_norm(ComplexRadialField(
        profile.grid, res.eps.values - eps.values, profile.m))
    assert err < 1e-6


def test_round_trip_contracts(profile):
    eps = _eps(profile)
    res = reconstruct_epsilon(darboux_forward(eps, profile), profile)
    ratios = [b / a for a, b in zip(res.update_norms, res.update_norms[1:])]
    assert all(r <= 0.5 for r in ratios)


def test_reconstruct_guard(profile):
    big = ComplexRadialField(
        profile.grid, np.exp(-profile.grid.r) + 0j, profile.m + 1)
    with pytest.raises(ValueError):
        reconstruct_epsilon(big, profile)
