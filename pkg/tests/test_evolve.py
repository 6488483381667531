"""Time stepping: fixed point, unitarity, cross-formulation agreement,
and conservation diagnostics."""

import math

import numpy as np
import pytest

from hvortex import (
    RadialGrid,
    ComplexRadialField,
    lp_norm,
    h1m_norm,
    solve_profile,
    EvolutionConfig,
    evolve,
    evolve_pair,
    gaussian_bump_data,
    darboux_forward,
)
from hvortex.evolve import (
    _CNStepper,
    implicit_banded,
    direct_rhs_rest,
    ll_rhs_rest,
    conservation_drift,
)
from hvortex.gauge import compute_a_theta, compute_A0


@pytest.fixture(scope="module")
def small_profile():
    return solve_profile(1, RadialGrid(15.0, 1500))


def test_vortex_is_fixed_point(small_profile):
    z = ComplexRadialField.zero(small_profile.grid, 1)
    for form in ("direct", "ll", "eps1"):
        cfg = EvolutionConfig(dt=0.05, T=0.5, formulation=form)
        out, trace = evolve(z, small_profile, cfg)
        assert np.max(np.abs(out.values)) == 0.0
        assert not trace.blew_up


def test_linear_step_unitary(small_profile):
    # Crank-Nicolson on the symmetric implicit part alone conserves the
    # weighted L2 norm to roundoff
    g = small_profile.grid
    st = _CNStepper(implicit_banded(small_profile), 0.05)
    v = (np.exp(-((g.r - 4.0) ** 2)) * np.exp(0.3j * g.r)).astype(complex)
    n0 = math.sqrt(float(np.sum(np.abs(v) ** 2 * g.sh) * g.h))
    for _ in range(100):
        v = st.step(v, np.zeros_like(v))
    n1 = math.sqrt(float(np.sum(np.abs(v) ** 2 * g.sh) * g.h))
    assert abs(n1 - n0) < 1e-11 * n0


def test_direct_and_ll_rhs_agree(small_profile):
    # the two explicit remainders describe the same PDE; away from the
    # first axis nodes (one-sided stencils) they differ only at stencil
    # accuracy, ~1e-4 relative at h = 0.01
    g = small_profile.grid
    v = 1e-3 * np.exp(-((g.r - 3.0) ** 2)) * np.exp(0.5j)
    d = direct_rhs_rest(v, small_profile)
    l = ll_rhs_rest(v, small_profile)
    scale = np.max(np.abs(d))
    j0 = int(round(1.0 / g.h))
    assert np.max(np.abs((d - l)[j0:-5])) < 5e-4 * scale


def test_second_order_self_convergence(small_profile):
    eps0 = gaussian_bump_data(small_profile, 1e-3)
    outs = {}
    for dt in (0.08, 0.04, 0.02):
        cfg = EvolutionConfig(dt=dt, T=1.0, formulation="direct",
                              record_every=10**9)
        out, _ = evolve(eps0, small_profile, cfg)
        outs[dt] = out.values
    e1 = lp_norm(ComplexRadialField(
        small_profile.grid, outs[0.08] - outs[0.02], 1), 2)
    e2 = lp_norm(ComplexRadialField(
        small_profile.grid, outs[0.04] - outs[0.02], 1), 2)
    assert math.log2(e1 / e2) > 1.6  # dt-halving, Richardson-style


def test_gaussian_bump_normalization(small_profile):
    for delta in (1e-4, 1e-3, 1e-2):
        eps0 = gaussian_bump_data(small_profile, delta)
        assert h1m_norm(eps0) == pytest.approx(delta, rel=1e-12)
        assert eps0.admissible_origin()


def test_blowup_detection(small_profile):
    eps0 = gaussian_bump_data(small_profile, 1e-2)
    cfg = EvolutionConfig(dt=0.05, T=5.0, formulation="direct",
                          blowup_threshold=1e-5)
    _, trace = evolve(eps0, small_profile, cfg)
    assert trace.blew_up
    assert trace.times[-1] < 5.0


def test_pair_evolution_tracks_forward_map(small_profile):
    g = small_profile.grid
    eps0 = gaussian_bump_data(small_profile, 1e-3)
    cfg = EvolutionConfig(dt=0.02, T=1.0, formulation="eps1",
                          record_every=10**9)
    eps, eps1, _ = evolve_pair(eps0, small_profile, cfg)
    fwd = darboux_forward(eps, small_profile)
    win = g.r <= 0.5 * g.r_max
    gap = math.sqrt(float(np.sum(
        np.abs((fwd.values - eps1.values)[win]) ** 2 * g.sh[win]) * g.h))
    # discretization gap between the two formulations; ~3e-4 relative
    # at (dt, h) = (0.02, 0.01)
    assert gap < 1e-3 * lp_norm(eps1, 2)


def test_flux_corrected_mass_beats_raw(small_profile):
    # windowed mass plus boundary-flux integral is conserved orders of
    # magnitude better than the raw truncated-domain mass
    dm, dv = conservation_drift(small_profile, dt=0.1, T=1.0, delta=1e-2)
    assert dm < 1e-5
    assert dv < 1e-5


def test_trace_csv_shape(small_profile):
    eps0 = gaussian_bump_data(small_profile, 1e-3)
    cfg = EvolutionConfig(dt=0.05, T=0.5, formulation="direct",
                          record_every=2)
    _, trace = evolve(eps0, small_profile, cfg)
    text = trace.to_csv()
    lines = text.splitlines()
    assert lines[0].startswith("t,h1m,l2")
    assert len(lines) == len(trace.times) + 1
    assert "\r" not in text


def test_sponge_damps_tail(small_profile):
    eps0 = gaussian_bump_data(small_profile, 1e-3, center=10.0)
    g = small_profile.grid
    out = {}
    for sponge in (False, True):
        cfg = EvolutionConfig(dt=0.02, T=4.0, formulation="direct",
                              sponge=sponge, record_every=10**9)
        e, _ = evolve(eps0, small_profile, cfg)
        tail = g.r > 0.9 * g.r_max
        out[sponge] = float(np.sum(np.abs(e.values[tail]) ** 2))
    assert out[True] < out[False]
