"""Grid calculus against closed-form integrals and derivatives."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hvortex import RadialGrid, ComplexRadialField, lp_norm, h1m_norm


def test_quadrature_exponential():
    # int_0^inf e^{-2r} sh r dr = 1/3; the r > 20 tail is ~1e-18
    g = RadialGrid(20.0, 4000)
    val = g.integrate(np.exp(-2.0 * g.r))
    assert abs(val - 1.0 / 3.0) < 1e-5


def test_quadrature_second_order():
    f = lambda r: np.exp(-2.0 * r)
    errs = []
    for n in (1000, 2000):
        g = RadialGrid(20.0, n)
        errs.append(abs(g.integrate(f(g.r)) - 1.0 / 3.0))
    assert errs[0] / errs[1] > 3.5


def test_cumint_cosh_identity():
    # int_0^r sh = ch r - 1
    g = RadialGrid(10.0, 2000)
    cum = g.cumint(np.ones(g.n))
    assert np.max(np.abs(cum - (g.ch - 1.0))) < 1e-5 * g.ch[-1]


def test_cumint_tail_plain():
    g = RadialGrid(10.0, 2000)
    tail = g.cumint_tail(np.exp(-g.r))
    exact = np.exp(-g.r) - math.exp(-g.r_max)
    assert np.max(np.abs(tail - exact)) < 1e-5


def test_cumint_tail_underflows_to_zero():
    # reversed accumulation must produce an exact zero tail, not an
    # O(eps * total) remainder (those get amplified downstream)
    g = RadialGrid(30.0, 3000)
    f = np.exp(-60.0 * g.r)  # underflows to exact zero past r ~ 12.5
    tail = g.cumint_tail(f)
    assert f[-1] == 0.0 and np.all(tail[f == 0.0] == 0.0)


def test_ddr_convergence():
    errs = []
    for n in (500, 1000):
        g = RadialGrid(10.0, n)
        err = np.max(np.abs(g.ddr(np.sin(g.r))[5:-5] - np.cos(g.r)[5:-5]))
        errs.append(err)
    assert errs[0] / errs[1] > 3.5


def test_ddr_star_is_sh_weighted_adjoint():
    # <u, d* v>_sh = <d u, v>_sh for fields vanishing at both ends
    g = RadialGrid(15.0, 3000)
    u = np.exp(-((g.r - 5.0) ** 2))
    v = np.exp(-((g.r - 7.0) ** 2)) * np.sin(g.r)
    lhs = np.sum(u * g.ddr_star(v) * g.sh) * g.h
    rhs = np.sum(g.ddr(u) * v * g.sh) * g.h
    assert abs(lhs - rhs) < 1e-4 * max(abs(lhs), 1.0)


def test_refine():
    g = RadialGrid(12.0, 600)
    g2 = g.refine()
    assert g2.n == 1200 and g2.r_max == g.r_max
    # cell centers of the fine grid straddle the coarse ones
    assert abs(g2.r[0] - g.r[0] / 2.0) < 1e-14


def test_field_degree_tag():
    g = RadialGrid(10.0, 100)
    f = ComplexRadialField(g, np.zeros(100, dtype=complex), 2)
    assert f.degree == 2


def test_h1m_norm_pieces():
    # for eps = r e^{-r} (m = 1 weight) the norm is finite and positive
    g = RadialGrid(20.0, 2000)
    f = ComplexRadialField(g, g.r * np.exp(-g.r) + 0j, 1)
    assert 0.0 < h1m_norm(f) < math.inf
    assert lp_norm(f, 2) <= h1m_norm(f) * 1.001


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.0, 6.28))
def test_lp_norm_scaling_and_triangle(a, c, ph):
    g = RadialGrid(15.0, 600)
    f1 = a * np.exp(-((g.r - 3.0) ** 2)) * np.exp(1j * ph)
    f2 = np.exp(-((g.r - c) ** 2)) + 0j
    n1 = lp_norm(ComplexRadialField(g, f1, 1), 2)
    n2 = lp_norm(ComplexRadialField(g, f2, 1), 2)
    n12 = lp_norm(ComplexRadialField(g, f1 + f2, 1), 2)
    assert n12 <= n1 + n2 + 1e-12
    n1_scaled = lp_norm(ComplexRadialField(g, 2.0 * f1, 1), 2)
    assert n1_scaled == pytest.approx(2.0 * n1, rel=1e-12)
