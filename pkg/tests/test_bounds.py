import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import half_matrix, logistic_matrix
from ranklimits.bounds import (BernoulliPair, centered_mgf_sum, chernoff_upper_bound, expected_c_sum,
                               f_t_divergence, kappa, log_psi, mgf_c, moment_tail_bound,
                               popularity_gap, pz_applicable, pz_lower_bound, thresholds,
                               union_bound_failure)
from ranklimits.estimators import moment_estimate
from ranklimits.experiments import sample_c_sums
from ranklimits.model import ProbMatrix, k0_of, pair_sq_gaps
from ranklimits.sampler import DesignParams, ensemble_from_counts, sample_counts

probs = st.floats(0.02, 0.98)


def ft_reference(m1, m2, t):
    mpmath.mp.dps = 50
    m1, m2, t = mpmath.mpf(m1), mpmath.mpf(m2), mpmath.mpf(t)
    return (m2 / m1) ** t * m1 + ((1 - m2) / (1 - m1)) ** t * (1 - m1)


@given(probs, probs)
def test_ft_endpoints(m1, m2):
    pair = BernoulliPair(m1, m2)
    for d in ("1->2", "2->1"):
        assert f_t_divergence(pair, 0.0, d) == pytest.approx(1.0, abs=1e-12)
        assert f_t_divergence(pair, 1.0, d) == pytest.approx(1.0, abs=1e-12)


def test_ft_high_precision_oracle():
    pair = BernoulliPair(0.6, 0.55)
    assert abs(f_t_divergence(pair, 0.25) - float(ft_reference(0.6, 0.55, 0.25))) <= 1e-12
    assert abs(f_t_divergence(pair, 0.25, "2->1") - float(ft_reference(0.55, 0.6, 0.25))) <= 1e-12


@given(probs, probs, st.floats(0.01, 0.99))
def test_ft_at_most_one_inside_unit_interval(m1, m2, t):
    assert f_t_divergence(BernoulliPair(m1, m2), t) <= 1 + 1e-15


def test_bad_arguments():
    with pytest.raises(ValueError):
        BernoulliPair(0.0, 0.5)
    with pytest.raises(ValueError):
        BernoulliPair(0.5, 0.5, p=0.0)
    with pytest.raises(ValueError):
        f_t_divergence(BernoulliPair(0.5, 0.6), 0.3, "sideways")
    with pytest.raises(ValueError):
        mgf_c(BernoulliPair(0.5, 0.6), 0.3, "i3")


@given(probs, probs, st.floats(0.01, 1.0))
def test_mgf_endpoints(m1, m2, p):
    pair = BernoulliPair(m1, m2, p)
    assert mgf_c(pair, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert centered_mgf_sum(pair, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert mgf_c(BernoulliPair(m1, m2, 1.0), 1.0, "i2") == pytest.approx(1.0, abs=1e-12)
    assert centered_mgf_sum(BernoulliPair(m1, m1, p), 0.7) == pytest.approx(1.0, abs=1e-15)


@given(probs, probs, st.floats(0.01, 1.0))
def test_expected_c_sum_sign_and_magnitude(m1, m2, p):
    v = expected_c_sum(BernoulliPair(m1, m2, p))
    assert v <= 0
    assert -v >= 4 * (m2 - m1) ** 2 * p * (1 - 1e-12)


def _two_row_matrix(n, a, b):
    """Rows 0 and 1 hold constant columns a and b; all other entries 1/2."""
    up = np.full((n, n), 0.5)
    up[0, 2:] = a
    up[1, 2:] = b
    return ProbMatrix.from_upper(up, ordered=False)


def test_expected_c_sum_monte_carlo():
    a, b, p, m = 0.7, 0.55, 0.6, 5
    M = _two_row_matrix(4, a, b)
    draws = sample_c_sums(M, p, m, 0, 1, 200_000, np.random.default_rng(1))
    expect = 2 * m * expected_c_sum(BernoulliPair(a, b, p))
    assert abs(draws.mean() - expect) <= 4 * draws.std() / math.sqrt(draws.size)


def test_taylor_expansion_cubic():
    m1, t = 0.6, 0.25
    errs = []
    for d in (1e-1, 1e-2, 1e-3):
        second = 1 + 0.5 * t * (t - 1) * (1 / m1 + 1 / (1 - m1)) * d * d
        errs.append(abs(f_t_divergence(BernoulliPair(m1, m1 + d), t) - second))
    for a, b in zip(errs, errs[1:]):
        assert 500 <= a / b <= 2000


def test_pz_degenerate_columns():
    M = half_matrix(5)
    assert pz_lower_bound(M, 0.5, 3, 0, 1) == 0.0
    with pytest.raises(ValueError):
        pz_lower_bound(M, 0.5, 3, 1, 1)


@given(st.integers(3, 8), st.floats(0.1, 3.0), st.floats(0.05, 1.0), st.integers(1, 20), st.floats(0.01, 0.99))
def test_pz_precondition_fails_below_one(n, scale, p, m, t):
    M = logistic_matrix(n, scale)
    assert not pz_applicable(M, p, m, 0, 1, t)
    assert log_psi(M, p, m, 0, 1, t) <= 1e-12


def test_pz_holds_where_applicable():
    M = logistic_matrix(6, 1.0)
    p, m, t = 0.5, 4, 2.0
    assert pz_applicable(M, p, m, 2, 3, t)
    bound = pz_lower_bound(M, p, m, 2, 3, t)
    hits = sample_c_sums(M, p, m, 2, 3, 100_000, np.random.default_rng(0)) >= 0
    r = hits.mean()
    assert bound <= r + 4 * math.sqrt(r * (1 - r) / hits.size)


def test_chernoff_worked_example():
    n = 20
    third = 1 / 3
    up = np.full((n, n), 0.5)
    up[0, 2:] = 0.6
    up[1, 2:] = 0.55
    up[2, 3] = 1 - third  # sets gamma_min = 1/3, gamma_max = 2/3, so K0 = 4.5
    M = ProbMatrix.from_upper(up, ordered=False)
    assert k0_of(M) == pytest.approx(4.5, rel=1e-12)
    assert pair_sq_gaps(M)[0, 1] == pytest.approx(18 * 0.0025, rel=1e-12)
    assert chernoff_upper_bound(M, 0.5, 10, 0, 1) == pytest.approx(math.exp(-0.4), rel=1e-10)
    assert chernoff_upper_bound(M, 0.5, 10, 0, 1) == pytest.approx(0.6703, abs=5e-5)
    assert chernoff_upper_bound(half_matrix(6), 0.5, 10, 0, 1) == 1.0


def test_union_bound():
    assert union_bound_failure(half_matrix(6), 0.5, 10) == 1.0
    # well-separated rows with moderate K0 (entries 0.1 / 0.9); ordering is not needed here
    rng = np.random.default_rng(3)
    M = ProbMatrix.from_upper(rng.choice([0.1, 0.9], size=(20, 20)), ordered=False)
    S = pair_sq_gaps(M)[np.triu_indices(20, 1)].min()
    assert S >= 1.0
    ref = min(1.0, 190 * math.exp(-8 * 100 * S / k0_of(M)))
    assert union_bound_failure(M, 1.0, 100) == pytest.approx(ref, rel=1e-12)
    assert union_bound_failure(M, 1.0, 100) < 1e-6
    vals = [union_bound_failure(logistic_matrix(8, 1.0), 0.5, m) for m in (1, 10, 100, 1000)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_kappa_examples():
    assert kappa(half_matrix(4), 3, 4, 0, 1) == 0
    M = ProbMatrix.from_upper(np.array([[0.5, 0.8], [0.0, 0.5]]))
    assert kappa(M, 1, 2, 0, 1) == pytest.approx((0 + 0.36 - 0.36 - 0) / 32, abs=1e-15)
    L = logistic_matrix(7, 1.3)
    for i in range(7):
        for j in range(7):
            assert kappa(L, 5, 7, i, j) == -kappa(L, 5, 7, j, i)


def test_moment_tail_bound_properties():
    assert moment_tail_bound(half_matrix(5), 0.5, 10, 0, 1) == 1.0
    M = logistic_matrix(10, 2.0)
    vals = [moment_tail_bound(M, 0.5, m, 3, 4) for m in (1, 5, 25, 125)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert popularity_gap(M, 3, 4) > 0
    with pytest.raises(ValueError):
        moment_tail_bound(M, 0.5, 10, 4, 3)


def test_moment_tail_bound_monte_carlo():
    # signal set at the largest level the family reaches cheaply; see README on desk-scale limits
    n, m, p, i = 30, 20, 0.5, 14
    M = logistic_matrix(n, 8.0)
    bound = moment_tail_bound(M, p, m, i, i + 1)
    trials = 10_000
    hits = 0
    for k in range(trials):
        s = moment_estimate(ensemble_from_counts(sample_counts(M, DesignParams(p, m, seed=k)), m), p).row_scores
        hits += s[i] - s[i + 1] <= 0
    r = hits / trials
    assert r <= bound + 4 * math.sqrt(r * (1 - r) / trials)


def test_thresholds_examples():
    th = thresholds(100, 10, 0.5, 4)
    assert th.impossibility_sq == pytest.approx(math.log(100) / 5, rel=1e-15)
    assert th.impossibility_sq == pytest.approx(0.92103, abs=5e-6)
    assert th.achievability_sq == th.impossibility_sq
    assert th.moment_bar == pytest.approx(0.09597, abs=5e-6)
    t8 = thresholds(100, 10, 0.5, 8)
    assert t8.achievability_sq / t8.impossibility_sq == pytest.approx(4, rel=1e-12)
    assert th.shah_lower_bar == pytest.approx(th.moment_bar / 70, rel=1e-15)
    for bad in ((1, 10, 0.5, 4), (10, 0, 0.5, 4), (10, 10, 0.0, 4), (10, 10, 0.5, 3.9)):
        with pytest.raises(ValueError):
            thresholds(*bad)
