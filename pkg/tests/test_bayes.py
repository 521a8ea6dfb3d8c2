from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import jzs_mc_oracle
from scipy import stats

from valconf.bayes import (
    DEFAULT_R,
    FAVORS_H0,
    FAVORS_HA,
    INCONCLUSIVE,
    BayesFactorError,
    bf10_from_t,
    bf10_two_sided,
    directional_mass,
    interpret,
    jzs_bf10,
    nct_pdf,
    pooled_t,
)


def test_interpretation_bins():
    assert interpret(0.2) == FAVORS_H0
    assert interpret(1.0) == INCONCLUSIVE
    assert interpret(5.0) == FAVORS_HA
    assert interpret(1 / 3) == INCONCLUSIVE
    assert interpret(3.0) == INCONCLUSIVE
    assert interpret(math.nextafter(3.0, 4)) == FAVORS_HA
    assert interpret(math.nextafter(1 / 3, 0)) == FAVORS_H0


def test_pooled_t_matches_scipy():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=12), rng.normal(0.5, 2, size=30)
    t, df, n_eff = pooled_t(x, y)
    assert t == pytest.approx(stats.ttest_ind(x, y, equal_var=True).statistic, rel=1e-12)
    assert df == 40 and n_eff == pytest.approx(12 * 30 / 42)


def test_degenerate_inputs_raise():
    with pytest.raises(BayesFactorError):
        pooled_t([1.0], [1.0, 2.0])
    with pytest.raises(BayesFactorError, match="variance"):
        pooled_t([2.0, 2.0], [2.0, 2.0, 2.0])
    with pytest.raises(BayesFactorError):
        bf10_two_sided(float("nan"), 10, 5)


def test_known_value():
    # Rouder et al. style reference computed by independent 1-D quadrature in g
    from scipy import integrate

    t, df, n = 3.5, 38, 10.0
    r = DEFAULT_R

    def integrand(g):
        a = 1 + n * g * r * r
        return a**-0.5 * (1 + t * t / (a * df)) ** (-(df + 1) / 2) * (2 * math.pi) ** -0.5 * g**-1.5 * math.exp(-1 / (2 * g))

    num = integrate.quad(integrand, 0, 1, epsrel=1e-11)[0] + integrate.quad(integrand, 1, np.inf, epsrel=1e-11)[0]
    expected = num / (1 + t * t / df) ** (-(df + 1) / 2)
    assert bf10_two_sided(t, df, n) == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize("t,n1,n2", [(0.0, 50, 50), (2.0, 10, 10), (1.0, 30, 100)])
def test_matches_monte_carlo(t, n1, n2):
    bf, _ = bf10_from_t(t, n1, n2, "two_sided")
    mc = jzs_mc_oracle(t, n1, n2, DEFAULT_R, 1_000_000, seed=5)
    assert abs(bf - mc) / mc < 0.02


def test_null_data_favor_h0():
    bf, _ = bf10_from_t(0.0, 50, 50, "two_sided")
    assert bf < 1


@pytest.mark.parametrize("n", [(10, 10), (50, 50), (30, 100)])
def test_monotone_in_abs_t(n):
    bfs = [bf10_from_t(t, *n, "two_sided")[0] for t in (0, 1, 2, 3, 4)]
    assert all(a < b for a, b in zip(bfs, bfs[1:]))
    assert bf10_from_t(-2.5, *n, "two_sided")[0] == pytest.approx(bf10_from_t(2.5, *n, "two_sided")[0], rel=1e-12)


@pytest.mark.parametrize("t", [0.3, 1.0, 2.0, 3.0, 5.0])
@pytest.mark.parametrize("n", [(10, 10), (50, 50), (30, 100)])
def test_one_sided_vs_two_sided(t, n):
    # "lower" hypothesizes mean(x) < mean(y), i.e. negative t
    toward, two = bf10_from_t(-t, *n, "lower")
    away, _ = bf10_from_t(t, *n, "lower")
    assert toward >= two >= away
    assert toward + away == pytest.approx(2 * two, rel=1e-9)
    higher, _ = bf10_from_t(t, *n, "higher")
    assert higher == pytest.approx(toward, rel=1e-9)


def test_directional_mass_against_cauchy_sampling():
    rng = np.random.default_rng(1)
    delta = stats.cauchy.rvs(scale=DEFAULT_R, size=1_000_000, random_state=rng)
    for t, (n1, n2) in [(2.0, (10, 10)), (-1.0, (30, 100))]:
        df, n_eff = n1 + n2 - 2, n1 * n2 / (n1 + n2)
        w = stats.nct.pdf(t, df, delta * math.sqrt(n_eff))
        mc = (w * (delta < 0)).sum() / w.sum()
        assert directional_mass(t, df, n_eff)[0] == pytest.approx(mc, abs=3e-3)


def test_directional_mass_large_t_is_stable():
    neg, pos = directional_mass(15.0, 398, 100.0)
    assert pos == pytest.approx(1.0) and 0 <= neg < 1e-10


def test_nct_pdf_matches_scipy():
    for x, df, nc in [(0.5, 18, 1.0), (-2.0, 40, -3.0), (3.0, 10, 0.0), (1e-9, 12, 2.0), (-0.7, 5, 4.0)]:
        assert nct_pdf(x, df, nc) == pytest.approx(stats.nct.pdf(x, df, nc), rel=1e-8)


def test_jzs_bf10_result_fields():
    rng = np.random.default_rng(3)
    x, y = rng.normal(0, 1, 40), rng.normal(1, 1, 40)
    res = jzs_bf10(x, y, tail="lower")
    assert res.n_minus == 40 and res.theta_minus == pytest.approx(x.mean())
    assert res.bf10 > res.bf10_two_sided > 3 and res.bin == FAVORS_HA
    with pytest.raises(ValueError):
        jzs_bf10(x, y, tail="left")


def test_infinite_bf_for_overwhelming_evidence():
    assert bf10_two_sided(200.0, 998, 250.0) == math.inf


samples = st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=12)


@settings(max_examples=60, deadline=None)
@given(samples, samples, st.floats(0.1, 50).flatmap(lambda a: st.sampled_from([a, -a])), st.floats(-100, 100))
def test_affine_invariance(x, y, a, b):
    try:
        base = jzs_bf10(x, y, tail="two_sided")
    except BayesFactorError:
        return
    if not math.isfinite(base.bf10) or abs(base.t_stat) > 30:
        return
    moved = jzs_bf10([a * v + b for v in x], [a * v + b for v in y], tail="two_sided")
    assert moved.bf10 == pytest.approx(base.bf10, rel=1e-9)
    if a > 0:
        assert jzs_bf10([a * v + b for v in x], [a * v + b for v in y]).bf10 == pytest.approx(
            jzs_bf10(x, y).bf10, rel=1e-9
        )
    assert base.bf10 > 0
