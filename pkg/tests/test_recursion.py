import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from bipartite_hardcore.recursion import (
    F, H, M_delta, T_delta, TreeParams, U, contraction_sup, dF, find_fixpoints,
    lambda_of_x, phi, psi, t_delta_roots, z_of_x,
)

GOLDEN = (math.sqrt(5) - 1) / 2
P11 = TreeParams(d=1, w=1, lam=1, alpha=1)
P_CRIT = TreeParams(d=2, w=2, lam=4, alpha=4)

pos = st.floats(0.2, 6)
params = st.builds(TreeParams, d=pos, w=pos, lam=st.floats(0.05, 50), alpha=st.floats(0.05, 50),
                   delta=st.floats(0, 0.9))


def test_F_examples():
    assert F(0.0, P11) == pytest.approx(0.5)
    assert F(GOLDEN, P11) == pytest.approx(GOLDEN, abs=1e-15)
    assert F(1e12, P11) == pytest.approx(1.0, rel=1e-11)


def test_dF_at_golden_fixpoint():
    assert dF(GOLDEN, P11) == pytest.approx(1 / (2 + GOLDEN) ** 2, rel=1e-14)
    assert dF(GOLDEN, P11) == pytest.approx(0.145898, abs=1e-6)


@given(params, st.floats(1e-3, 100))
def test_dF_positive_and_matches_numeric_derivative(p, x):
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    f = lambda t: p.lam * (1 + p.alpha * (1 + t) ** -p.w) ** -p.d  # noqa: E731
    assert dF(x, p) > 0
    assert dF(x, p) == pytest.approx(float(mp.diff(f, mp.mpf(x))), rel=1e-10, abs=1e-300)


def test_T_delta_limits_and_critical_point():
    p = TreeParams(2, 3, 1.0, 4.0, 0.2)
    assert T_delta(1e-14, p) == pytest.approx((1 - 0.2) * (1 + 4.0), rel=1e-12)
    assert T_delta(1.0, P_CRIT) == pytest.approx(0.0, abs=1e-12)


@given(params, st.floats(1e-3, 20))
def test_T_delta_strictly_convex(p, x):
    h = 1e-3 * (1 + x)
    second = T_delta(x + h, p) - 2 * T_delta(x, p) + T_delta(x - h, p)
    assume(math.isfinite(second))
    assert second > -1e-9 * abs(T_delta(x, p))


def test_M_delta_limits():
    p = TreeParams(2, 2, 1.0, 4.0, 0.3)
    assert M_delta(1e-14, p) == pytest.approx((4 + 1) * 0.3, rel=1e-10)
    assert M_delta(1e6, p) < 0
    assert M_delta(1.0, P_CRIT) == pytest.approx(0.0, abs=1e-12)


def test_lambda_of_x_examples():
    assert lambda_of_x(1.0, P_CRIT) == pytest.approx(4.0, rel=1e-15)
    assert lambda_of_x(GOLDEN, P11) == pytest.approx(1.0, rel=1e-15)


@given(params, st.floats(1e-3, 30))
def test_lambda_of_x_round_trip(p, x):
    lam = lambda_of_x(x, p)
    rep = find_fixpoints(p.with_(lam=lam))
    assert min(abs(r - x) for r in rep.fixpoints) <= 1e-8 * (1 + x)


def test_t_delta_roots_small_alpha_has_none():
    d, delta = 2.0, 0.1
    c = (1 - delta) / d
    assert t_delta_roots(TreeParams(d, 3.0, 1.0, c * math.exp(1 + c) * 0.999, delta)) == []


def test_t_delta_double_root():
    assert t_delta_roots(P_CRIT) == [pytest.approx(1.0, rel=1e-7)]


def test_t_delta_two_roots_against_grid_scan():
    p = TreeParams(2, 3, 1.0, 4.0)
    roots = t_delta_roots(p)
    assert len(roots) == 2 and roots[0] < 1.0 < roots[1]
    xs = np.linspace(1e-6, 10, 200_001)
    vals = np.array([T_delta(x, p) for x in xs])
    flips = xs[1:][np.sign(vals[1:]) != np.sign(vals[:-1])]
    assert len(flips) == 2
    for r, f in zip(roots, flips):
        assert abs(r - f) < 1e-4
        assert abs(T_delta(r, p)) < 1e-10 * (1 + r) ** 3


def test_fixpoints_golden():
    rep = find_fixpoints(P11)
    assert rep.fixpoints == [pytest.approx(GOLDEN, rel=1e-14)]
    assert rep.derivatives[0] == pytest.approx(0.1458980337503155, rel=1e-12)
    assert find_fixpoints(P11.with_(delta=0.854)).delta_unique
    assert not find_fixpoints(P11.with_(delta=0.855)).delta_unique


def test_fixpoints_critical():
    rep = find_fixpoints(P_CRIT)
    assert rep.fixpoints == [pytest.approx(1.0, rel=1e-7)]
    assert rep.derivatives[0] == pytest.approx(1.0, abs=1e-9)
    assert rep.delta_unique
    assert not find_fixpoints(P_CRIT.with_(delta=0.01)).delta_unique


def test_three_fixpoints_in_non_uniqueness():
    # deep in the non-unique regime of the 3-regular tree
    rep = find_fixpoints(TreeParams(2, 2, 20.0, 20.0))
    assert len(rep.fixpoints) == 3
    assert max(rep.derivatives) > 1


@given(params)
def test_fixpoint_report_invariants(p):
    rep = find_fixpoints(p)
    assert 1 <= len(rep.fixpoints) <= 3
    for x, dx in zip(rep.fixpoints, rep.derivatives):
        assert abs(F(x, p) - x) <= 1e-10 * (1 + x)
        assert dx == pytest.approx(dF(x, p))


def test_psi_phi_examples():
    assert psi(math.e - 1) == pytest.approx((math.e - 1) / math.e, rel=1e-15)
    assert psi(1e-8) == pytest.approx(1.0, abs=1e-6)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            phi(bad)
        with pytest.raises(ValueError):
            psi(bad)


@given(st.floats(1e-4, 1e4), st.floats(1.0001, 1e3))
def test_phi_ratio_bounds(x, ratio):
    y = x * ratio
    r = phi(x) / phi(y)
    assert y / x * (1 - 1e-12) <= r <= (y / x) ** 2 * (1 + 1e-12)


def test_U_endpoints_and_critical_value():
    assert U(1.0, 4, 2, 4) == 0.0
    assert U(5.0, 4, 2, 4) == 0.0
    assert U(2.0, 4, 2, 4) == pytest.approx(1.0, rel=1e-15)


@given(st.floats(0.1, 20), st.floats(0.3, 6), st.floats(0.1, 20), st.floats(0.01, 50))
def test_H_equals_U_under_change_of_variables(lam, w, alpha, x):
    p = TreeParams(2.0, w, lam, alpha)
    z = z_of_x(x, p)
    assume(1 + 1e-9 < z < 1 + alpha * (1 - 1e-9))
    assert H(x, p) == pytest.approx(U(z, lam, 2.0, alpha), rel=1e-9)


@given(st.floats(0.1, 20), st.floats(1.01, 1.99), st.floats(0.5, 4), st.floats(1.001, 1.5))
def test_U_monotone_in_lambda_and_alpha(lam, zfrac, d, factor):
    alpha = 4.0
    z = 1 + alpha * (zfrac - 1)
    assert U(z, lam * factor, d, alpha) < U(z, lam, d, alpha)
    assert U(z, lam, d, alpha * factor) > U(z, lam, d, alpha)


def test_contraction_sup_at_thresholds():
    val, z = contraction_sup(4.0, 2, 4.0)
    assert val == pytest.approx(1.0, abs=1e-8)
    assert z == pytest.approx(2.0, abs=1e-6)
    val, _ = contraction_sup(27 / 16, 3, 27 / 16)
    assert val == pytest.approx(1.0, abs=1e-6)
    assert contraction_sup(3.6, 2, 3.6)[0] < 1.0
