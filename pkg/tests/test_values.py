from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from valconf.values import (
    HIGHER_ORDER,
    N_VALUES,
    VALUES,
    Value,
    build_kernel,
    circular_distance,
    distance_matrix,
    identity_kernel,
    parse_value,
    value_of,
)

positions = st.integers(min_value=0, max_value=N_VALUES - 1)


def test_ten_distinct_values_with_permuted_positions():
    assert len(VALUES) == 10
    assert sorted(v.position for v in VALUES) == list(range(10))


def test_higher_order_classes():
    classes = {v.higher_order for v in VALUES}
    assert len(classes) == 4
    assert Value.HEDONISM.higher_order == Value.SELF_DIRECTION.higher_order
    assert Value.CONFORMITY.higher_order == Value.TRADITION.higher_order == Value.SECURITY.higher_order
    assert set(HIGHER_ORDER) == set(VALUES)


@pytest.mark.parametrize(
    "a,b,d",
    [(Value.SELF_DIRECTION, Value.SELF_DIRECTION, 0), (Value.SELF_DIRECTION, Value.STIMULATION, 1),
     (Value.SELF_DIRECTION, Value.SECURITY, 5), (Value.SELF_DIRECTION, Value.UNIVERSALISM, 1)],
)  # fmt: skip
def test_circular_distance_examples(a, b, d):
    assert circular_distance(a, b) == d


@given(positions, positions)
def test_circular_distance_symmetric_and_bounded(i, j):
    d = circular_distance(i, j)
    assert d == circular_distance(j, i)
    assert 0 <= d <= 5
    assert d == min(abs(i - j), 10 - abs(i - j))


@given(positions)
def test_position_round_trip(i):
    assert value_of(i).position == i
    assert value_of(value_of(i).position) is value_of(i)


def test_parse_value_is_lenient():
    assert parse_value("Self_Direction") is Value.SELF_DIRECTION
    assert parse_value("self direction") is Value.SELF_DIRECTION
    with pytest.raises(ValueError):
        parse_value("honor")


def test_distance_matrix_matches_pairwise():
    D = distance_matrix()
    for i in range(10):
        for j in range(10):
            assert D[i, j] == circular_distance(i, j)


def test_kernel_closed_form_values():
    B = build_kernel(1.0).B
    assert np.all(np.diag(B) == 1.0)
    assert B[0, 1] == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert B[0, 5] == pytest.approx(math.exp(-12.5), rel=1e-12)
    assert B[0, 5] == pytest.approx(3.73e-6, rel=1e-3)
    assert np.array_equal(B, B.T)


def test_kernel_is_psd_by_independent_eigensolver():
    from scipy.linalg import eigh

    B = build_kernel(1.0).B
    assert eigh(B, eigvals_only=True).min() >= -1e-9
    assert np.linalg.eigvals(B).real.min() >= -1e-9


@given(st.floats(min_value=0.05, max_value=1.4))
def test_kernel_monotone_in_distance(sigma):
    B = build_kernel(sigma).B
    D = distance_matrix()
    for i in range(10):
        for j in range(10):
            for k in range(10):
                if D[i, j] < D[i, k]:
                    assert B[i, j] >= B[i, k]
                    if B[i, k] > 0:
                        assert B[i, j] > B[i, k]


def test_kernel_rejects_bad_sigma_and_indefinite():
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(ValueError):
            build_kernel(bad)
    with pytest.raises(ValueError, match="indefinite"):
        build_kernel(2.0)
    assert build_kernel(2.0, check_psd=False).min_eigenvalue < 0


def test_kernel_is_read_only_and_csv_dump():
    k = build_kernel(1.0)
    with pytest.raises(ValueError):
        k.B[0, 0] = 2.0
    lines = k.to_csv().splitlines()
    assert len(lines) == 11
    assert lines[0].split(",")[1] == "self-direction"
    assert identity_kernel().B.tolist() == np.eye(10).tolist()
