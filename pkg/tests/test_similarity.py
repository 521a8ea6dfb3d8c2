from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from oracles import ORACLES, random_profile_pairs, tau_oracle

from valconf.profiles import normalize, raw_profile
from valconf.similarity import (
    METRICS,
    UndefinedSimilarity,
    cosine,
    higher_means_conflict,
    kendall_tau,
    kendall_tau_batch,
    manhattan,
    score_batch,
    similarity,
    spearman_rho,
    weighted_cosine,
)
from valconf.values import build_kernel, circular_distance, identity_kernel

STRICT = np.array([0.3, 0.2, 0.15, 0.1, 0.08, 0.07, 0.05, 0.03, 0.015, 0.005])


def spike(i: int) -> np.ndarray:
    e = np.zeros(10)
    e[i] = 1.0
    return e


def test_tau_endpoints():
    assert kendall_tau(STRICT, STRICT).score == 1.0
    assert kendall_tau(STRICT, STRICT[::-1]).score == -1.0


def test_tau_constant_profile_flagged():
    r = kendall_tau(np.full(10, 0.1), STRICT)
    assert r.score == 1.0 and "constant_profile" in r.flags


def test_tau_b_variant():
    from scipy.stats import kendalltau

    rng = np.random.default_rng(0)
    for _ in range(50):
        v, w = rng.integers(0, 4, 10), rng.integers(0, 4, 10)
        expected = kendalltau(v, w, variant="b").statistic
        got = kendall_tau_batch(v, w, "b")[0]
        assert (math.isnan(expected) and math.isnan(got)) or got == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        kendall_tau_batch(v, w, "c")


def test_manhattan_cosine_endpoints():
    assert manhattan(STRICT, STRICT).score == 0
    assert manhattan(spike(0), spike(3)).score == 2
    assert manhattan(spike(0), spike(3)).higher_means_conflict
    assert cosine(STRICT, STRICT).score == pytest.approx(1)
    assert cosine(spike(0), spike(3)).score == 0
    assert cosine(STRICT, 2 * STRICT).score == pytest.approx(1, abs=1e-15)
    with pytest.raises(UndefinedSimilarity, match="undefined cosine"):
        cosine(np.zeros(10), STRICT)


def test_weighted_cosine_spikes():
    assert weighted_cosine(STRICT, STRICT).score == pytest.approx(1, abs=1e-15)
    assert weighted_cosine(spike(0), spike(1)).score == pytest.approx(math.exp(-0.5), abs=1e-12)
    opp = weighted_cosine(spike(0), spike(5)).score
    assert opp == pytest.approx(math.exp(-12.5), rel=1e-9)
    assert opp < weighted_cosine(spike(0), spike(1)).score
    with pytest.raises(UndefinedSimilarity):
        weighted_cosine(np.zeros(10), STRICT)


@pytest.mark.parametrize("a", range(10))
def test_weighted_cosine_strictly_decreasing_in_distance(a):
    by_d = {}
    for b in range(10):
        by_d.setdefault(circular_distance(a, b), set()).add(round(weighted_cosine(spike(a), spike(b)).score, 15))
    assert all(len(s) == 1 for s in by_d.values())
    values = [by_d[d].pop() for d in range(6)]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_spearman_rho_endpoints():
    assert spearman_rho(STRICT, STRICT).score == pytest.approx(1)
    assert spearman_rho(STRICT, STRICT[::-1]).score == pytest.approx(-1)
    r = spearman_rho(np.full(10, 0.1), STRICT)
    assert math.isnan(r.score) and "undefined" in r.flags


@pytest.mark.parametrize("metric", METRICS)
def test_batch_matches_oracles(metric):
    V, W = random_profile_pairs(seed=11, n_normalized=200, n_signed=50)
    got = score_batch(metric, V, W, build_kernel(1.0))
    for k in range(len(V)):
        assert abs(got[k] - ORACLES[metric](V[k], W[k])) <= 1e-9


def test_profiles_accepted_directly():
    p = normalize(raw_profile("a", [3, 1, 0, 0, 0, 0, 0, 0, 0, 1]))
    q = normalize(raw_profile("b", [0, 1, 0, 0, 2, 0, 0, 0, 0, 1]))
    assert similarity("tau", p, q).score == tau_oracle(p.vector, q.vector)
    assert similarity("wc", p, q, identity_kernel()).score == pytest.approx(cosine(p, q).score, abs=1e-12)
    with pytest.raises(ValueError):
        similarity("kl", p, q)
    with pytest.raises(ValueError):
        manhattan(np.ones(9), np.ones(9))


def test_conflict_direction():
    assert [higher_means_conflict(m) for m in METRICS] == [False, True, False, False, False]


vec = arrays(np.float64, 10, elements=st.floats(-1, 1, allow_nan=False, width=64))
pos_vec = arrays(np.float64, 10, elements=st.floats(0.001, 1, width=64))


def _finite(x):
    return not math.isnan(x)


@given(vec, vec)
def test_symmetry(v, w):
    for m in METRICS:
        a, b = score_batch(m, v, w)[0], score_batch(m, w, v)[0]
        assert (not _finite(a) and not _finite(b)) or abs(a - b) <= 1e-12


@given(vec, vec, st.floats(0.01, 100))
def test_scale_invariance(v, w, alpha):
    # ranks are exact unless scaling merges near-equal entries, so compare on
    # inputs whose order is stable under the scaling
    if np.array_equal(np.argsort(alpha * v, kind="stable"), np.argsort(v, kind="stable")) and len(set(alpha * v)) == len(set(v)):
        for m in ("tau", "rho"):
            a, b = score_batch(m, alpha * v, w)[0], score_batch(m, v, w)[0]
            assert (not _finite(a) and not _finite(b)) or a == b
    for m in ("co", "wc"):
        a, b = score_batch(m, alpha * v, w)[0], score_batch(m, v, w)[0]
        assert (not _finite(a) and not _finite(b)) or abs(a - b) <= 1e-12


@given(vec, vec)
def test_wc_with_identity_equals_cosine(v, w):
    a = score_batch("wc", v, w, identity_kernel())[0]
    b = score_batch("co", v, w)[0]
    assert (not _finite(a) and not _finite(b)) or abs(a - b) <= 1e-12


@given(vec, vec, vec)
def test_md_triangle_inequality(u, v, w):
    md = lambda a, b: score_batch("md", a, b)[0]  # noqa: E731
    assert md(u, w) <= md(u, v) + md(v, w) + 1e-12


@given(pos_vec, pos_vec)
def test_ranges_for_normalized_profiles(v, w):
    v, w = v / v.sum(), w / w.sum()
    assert -1 <= score_batch("tau", v, w)[0] <= 1
    assert 0 <= score_batch("md", v, w)[0] <= 2 + 1e-12
    assert 0 <= score_batch("co", v, w)[0] <= 1 + 1e-12
    assert 0 <= score_batch("wc", v, w)[0] <= 1
