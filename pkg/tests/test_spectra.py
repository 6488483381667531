"""Spectral certification and the half-line fundamental system."""

import math

import numpy as np
import pytest

from hvortex import (
    RadialGrid,
    solve_profile,
    gap_eigenvalues_RQ,
    resonance_test_RQ,
    fundamental_system_H,
    green_solve_H,
    fundamental_asymptotics,
)
from hvortex.linops import PotentialTable
from hvortex.spectra import ESSENTIAL_BOTTOM, green_residual_study

SQRT5_2 = math.sqrt(5.0) / 2.0


@pytest.fixture(scope="module")
def fs(profile):
    return fundamental_system_H(profile)


def test_gap_is_empty(profile):
    rep = gap_eigenvalues_RQ(profile)
    assert rep.gap_eigenvalues == []
    assert rep.essential_spectrum_bottom == ESSENTIAL_BOTTOM == 1.25


def test_deepened_well_oracle(profile):
    # the scanner must find the bound states a lowered well creates,
    # otherwise an empty gap proves nothing
    rep = gap_eigenvalues_RQ(profile, deepen=3.0)
    assert len(rep.gap_eigenvalues) >= 1
    assert all(v < 1.25 - 1e-3 - 3.0 + 3.0 for v in rep.gap_eigenvalues)


def test_resonance_indicator(profile):
    rep = resonance_test_RQ(profile)
    assert abs(rep.resonance_indicator) > 1e-6
    assert rep.resonance_drift <= 0.10
    # regression anchor for this fixture grid; the indicator is
    # domain-size sensitive (larger r_max drifts it toward ~0.017)
    assert rep.resonance_indicator == pytest.approx(0.0320, abs=1e-3)


def test_wronskian_constant(fs):
    assert fs.wronskian_rel_stdev < 1e-8
    assert fs.wronskian != 0.0


def test_phi0_follows_sqrt_sh_at_axis(fs):
    g = fs.grid
    k = g.n // 100
    ratio = fs.phi0[:k] / np.sqrt(g.sh[:k])
    # the correction is O(r^{2m+2}); ~6e-5 by r = 0.2 for m = 1
    assert np.max(np.abs(ratio - 1.0)) < 1e-4


def test_asymptotic_rates(fs, profile):
    a = fundamental_asymptotics(fs, profile.m)
    assert a["rate_phi0"] == pytest.approx(SQRT5_2, rel=1e-6)
    assert a["rate_phiInf"] == pytest.approx(-SQRT5_2, rel=1e-6)
    assert a["phi0_small_r_exponent"] == pytest.approx(0.5, abs=5e-3)
    assert a["phiInf_log_fit_relres"] < 0.01
    assert a["phi0_correction_exponent"] >= 2 * profile.m + 1.9


def test_green_inverts_H(profile, fs):
    # residual of -u'' + V_H u = F on the interior window
    g = profile.grid
    t = PotentialTable.from_profile(profile)
    F = np.exp(-(((g.r - 6.0) / 1.2) ** 2))
    u = green_solve_H(F, fs)
    upp = (u[2:] - 2 * u[1:-1] + u[:-2]) / g.h**2
    res = -upp + t.V_H[1:-1] * u[1:-1] - F[1:-1]
    win = (g.r[1:-1] > 0.5) & (g.r[1:-1] < g.r_max - 0.5)
    assert np.max(np.abs(res[win])) < 1e-4 * np.max(np.abs(F))


def test_green_solution_decays(profile, fs):
    # the particular solution must follow phiInf, not the growing branch
    g = profile.grid
    F = np.exp(-(((g.r - 5.0)) ** 2))
    u = green_solve_H(F, fs)
    far = g.r > 15.0
    rate = -np.polyfit(g.r[far], np.log(np.abs(u[far])), 1)[0]
    assert rate == pytest.approx(SQRT5_2, rel=0.05)


def test_green_residual_second_order():
    g = RadialGrid(20.0, 1000)
    p = solve_profile(1, g)
    pf = solve_profile(1, g.refine())
    rep = green_residual_study(p, pf, n_sources=5, seed=3)
    assert rep["min_order"] >= 1.8


def test_spectrum_eta_guard(profile):
    # scanning right up to the threshold still returns nothing
    rep = gap_eigenvalues_RQ(profile, eta=1e-4)
    assert rep.gap_eigenvalues == []
