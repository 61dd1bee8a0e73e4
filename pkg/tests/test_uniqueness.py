import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from bipartite_hardcore.recursion import TreeParams, find_fixpoints
from bipartite_hardcore.uniqueness import (
    PHASE_HEADER, A, certify_pair_delta, closed_form_pair, in_small_alpha_branch,
    is_delta_unique, is_delta_unique_pair, is_delta_unique_tuple, lambda_c_regular,
    lambda_hat, log_A, low_temp_threshold, phase_csv, phase_table, small_alpha_bound,
    solve_critical_system, solve_w_delta,
)

from conftest import nonunique_witness

# lambda_2c for delta > 0, frozen from a 40-digit Newton solve of the raw
# two-equation system in (x, w) (see test_critical_system_matches_mpmath)
FROZEN_L2C = {
    (2, 4, 0.1): 6.2263958397243685,
    (2, 4, 0.3): 15.392171047111378,
    (3, 2, 0.2): 9.2649479166452008,
    (1.5, 10, 0.05): 11.490227402472014,
}


def test_lambda_hat_examples():
    assert lambda_hat(2, 2) == pytest.approx(4.0, rel=1e-15)
    assert lambda_hat(3, 3) == pytest.approx(27 / 16, rel=1e-15)


def test_log_A_matches_direct_formula():
    for d, w, delta in [(2, 3, 0.0), (1.5, 0.8, 0.2), (4, 7, 0.5)]:
        direct = (1 - delta) * d ** w * (w + 1) ** (w + 1) / (d * w - (1 - delta)) ** (w + 1)
        assert A(d, w, delta) == pytest.approx(direct, rel=1e-13)


def test_log_A_stable_for_huge_w():
    # A -> c e^{1 + c} as w -> infinity
    c = 0.5
    assert math.exp(log_A(2, 1e12, 0.0)) == pytest.approx(c * math.exp(1 + c), rel=1e-9)


@given(st.floats(0.3, 8), st.floats(0.3, 8), st.floats(0, 0.9), st.floats(1.001, 2))
def test_A_decreasing_in_d_and_w(d, w, delta, f):
    assume(d * w > (1 - delta) * 1.01)
    assert A(d * f, w, delta) < A(d, w, delta)
    assert A(d, w * f, delta) < A(d, w, delta)


def test_closed_form_pair_examples():
    assert closed_form_pair(2, 2) == (pytest.approx(4.0), pytest.approx(4.0))
    lam, alpha = closed_form_pair(2, 3)
    assert lam == pytest.approx(243 / 125, rel=1e-15)
    assert alpha == pytest.approx(2048 / 625, rel=1e-15)


@given(st.floats(1, 10), st.floats(1, 10))
def test_closed_form_pair_swap_symmetry(d, w):
    assume(d * w > 1.01)
    a, b = closed_form_pair(d, w)
    c, e = closed_form_pair(w, d)
    assert (a, b) == (pytest.approx(e, rel=1e-14), pytest.approx(c, rel=1e-14))


def test_closed_form_pair_is_critical():
    # at the pair, the fixpoint sits exactly at derivative 1
    lam, alpha = closed_form_pair(2, 3)
    rep = find_fixpoints(TreeParams(2, 3, lam, alpha))
    assert max(rep.derivatives) == pytest.approx(1.0, abs=1e-7)


def test_solve_w_delta_examples():
    assert solve_w_delta(2, 4) == pytest.approx(2.0, rel=1e-13)
    assert solve_w_delta(3, 27 / 16) == pytest.approx(3.0, rel=1e-13)
    bound = small_alpha_bound(2, 0.1)
    assert solve_w_delta(2, bound * (1 + 1e-6), 0.1) > 1e3
    with pytest.raises(ValueError):
        solve_w_delta(2, bound * 0.99, 0.1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_critical_system_delta_zero(d):
    alpha = lambda_c_regular(d + 1)
    r = solve_critical_system(d, alpha)
    assert r.x_c == pytest.approx(1 / (d - 1), rel=1e-12)
    assert r.w_c == pytest.approx(d, rel=1e-12)
    assert r.lambda_2c == pytest.approx(alpha, rel=1e-12)
    assert abs(r.residual_T) < 1e-12 and abs(r.residual_M) < 1e-12


def test_critical_system_closed_form_x():
    for d, w in [(2, 3), (1.5, 4), (3, 1.2)]:
        lam, alpha = closed_form_pair(d, w)
        r = solve_critical_system(d, alpha)
        assert r.w_c == pytest.approx(w, rel=1e-12)
        assert r.x_c == pytest.approx((d + 1) / (d * w - 1), rel=1e-12)
        assert r.lambda_2c == pytest.approx(lam, rel=1e-12)


@pytest.mark.parametrize("key", sorted(FROZEN_L2C))
def test_critical_system_frozen(key):
    r = solve_critical_system(*key)
    assert r.lambda_2c == pytest.approx(FROZEN_L2C[key], rel=1e-12)
    assert abs(r.residual_T) < 1e-12 and abs(r.residual_M) < 1e-12
    p = TreeParams(key[0], r.w_c, r.lambda_2c, key[1], key[2])
    assert max(find_fixpoints(p).derivatives) == pytest.approx(1 - key[2], abs=1e-7)


def test_critical_system_matches_mpmath():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    d, a, dl = (mp.mpf(v) for v in (2, 4, "0.1"))
    r = solve_critical_system(2, 4, 0.1)

    def system(x, w):
        t = (1 - dl) * (x + 1) * (a + (1 + x) ** w) - a * d * w * x
        m = w * mp.log(1 + x) * (a * d - (1 + x) ** (w + 1)) + dl * (x + 1) * (a + (1 + x) ** w)
        return [t, m]

    x, w = mp.findroot(system, (mp.mpf(r.x_c) * 1.05, mp.mpf(r.w_c) * 1.05))
    lam = x * (1 + a * (1 + x) ** (-w)) ** d
    assert float(abs(lam - r.lambda_2c) / lam) < 1e-13


def test_lambda_2c_increases_with_delta():
    vals = [solve_critical_system(2, 4, dl).lambda_2c for dl in (0, 0.01, 0.05, 0.1, 0.3, 0.5)]
    assert vals[0] == pytest.approx(4.0)
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_small_alpha_branch():
    r = solve_critical_system(2, 0.1)
    assert r.branch == "always-unique" and r.lambda_2c == 0.0
    assert in_small_alpha_branch(2, small_alpha_bound(2))
    assert all(is_delta_unique(lam, 2, 0.1) for lam in (1e-6, 0.3, 7.0, 1e6))


def test_is_delta_unique_examples():
    assert is_delta_unique(4, 2, 4, 0.0)
    assert not is_delta_unique(4, 2, 4, 0.05)


def test_pair_examples():
    assert is_delta_unique_pair(4.0, 2, 0.0)
    assert is_delta_unique_pair(0.9 * 4.0, 2, 0.01)
    assert not is_delta_unique_pair(1.5 * 4.0, 2, 0.0)


@given(st.floats(0.05, 3), st.floats(0.5, 4), st.floats(0, 0.5), st.floats(0.1, 0.99))
def test_pair_uniqueness_downward_closed(lam, d, delta, shrink):
    if is_delta_unique_pair(lam, d, delta):
        assert is_delta_unique_pair(lam * shrink, d, delta)


@given(st.floats(0.05, 30), st.floats(0.5, 4), st.floats(0.3, 30), st.floats(0, 0.5),
       st.floats(0.01, 0.3))
def test_delta_unique_monotone_in_delta(lam, d, alpha, delta, extra):
    if is_delta_unique(lam, d, alpha, delta + extra):
        assert is_delta_unique(lam, d, alpha, delta)


@given(st.floats(0.5, 4), st.floats(0.3, 30), st.floats(0, 0.5), st.floats(-3, 3))
def test_triple_consistent_with_tuple_at_w_c(d, alpha, delta, log_ratio):
    r = solve_critical_system(d, alpha, delta)
    assume(r.branch == "critical-system")
    lam = r.lambda_2c * math.exp(log_ratio)
    assume(abs(log_ratio) > 1e-6)
    if not is_delta_unique(lam, d, alpha, delta):
        return
    # above lambda_2c no w, including w_c and w_delta, may be non-unique
    for w in (r.w_c, r.w_delta, 2 * r.w_c):
        assert is_delta_unique_tuple(lam, d, alpha, w, delta)


def test_below_threshold_a_nonunique_w_exists():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 40:
        d, delta = rng.uniform(0.5, 4), rng.uniform(0, 0.4)
        alpha = math.exp(rng.uniform(math.log(0.3), math.log(30)))
        r = solve_critical_system(d, alpha, delta)
        if r.branch != "critical-system":
            continue
        lam = r.lambda_2c * math.exp(-rng.uniform(1e-3, 3))
        assert not is_delta_unique(lam, d, alpha, delta)
        w = nonunique_witness(lam, d, alpha, delta, r.w_delta)
        assert w is not None, (d, alpha, delta, lam)
        assert not is_delta_unique_tuple(lam, d, alpha, w, delta)
        checked += 1


def test_certify_pair_delta():
    for d in (1, 2, 3):
        got = certify_pair_delta(1.0, d)
        assert 0 < got < 1
        assert is_delta_unique_pair(1.0, d, got)
        assert not is_delta_unique_pair(1.0, d, got + 2e-6)
    assert certify_pair_delta(10.0, 2) == 0.0


def test_low_temp_threshold_spot_value():
    assert low_temp_threshold(2, 2) == pytest.approx(107.0, rel=1e-14)


def test_phase_table_shape_and_order():
    for d in (2, 3):
        rows = phase_table(d, np.linspace(1, 8, 64))
        assert len(rows) == 64
        assert all(r.lambda_low > r.lambda_c for r in rows)


def test_phase_asymptotics():
    lam_c, _ = closed_form_pair(100, 100)
    assert lam_c * 100 < 10
    assert low_temp_threshold(100, 100) / 100 > 1


def test_phase_csv_header():
    text = phase_csv(phase_table(2, [2.0]))
    lines = text.splitlines()
    assert lines[0] == ",".join(PHASE_HEADER)
    w, a, l, low = (float(v) for v in lines[1].split(","))
    assert (w, a, l, low) == (2.0, pytest.approx(4.0), pytest.approx(4.0), pytest.approx(107.0))
