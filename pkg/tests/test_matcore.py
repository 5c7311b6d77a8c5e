import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamprobe.matcore import (Matrix, MatrixError, NotRankOneError, det2,
                              rank_class, rank_one_factor, rank_one_test)


def test_rank_one_examples():
    # X1 - X2 at tau = 0.1
    assert rank_one_test(Matrix([[-0.2, -0.2], [-0.2, -0.2]]))
    assert not rank_one_test(Matrix([[1, 0], [0, 1]]))
    assert rank_one_test(Matrix([[1, 2], [2, 4]]))


def test_zero_matrix_has_its_own_verdict():
    assert rank_class(Matrix.zero(2, 2)) == "zero"
    assert not rank_one_test(Matrix.zero(2, 2))
    with pytest.raises(NotRankOneError):
        rank_one_factor(Matrix.zero(2, 2))


def test_rank_class_exact_vs_float():
    m = Matrix([[F(1, 3), F(2, 3)], [F(2, 3), F(4, 3)]])
    assert rank_class(m) == "rank-one"
    assert rank_class(m.as_float()) == "rank-one"
    m2 = Matrix([[F(1, 3), F(2, 3)], [F(2, 3), F(4, 3) + F(1, 7)]])
    assert rank_class(m2) == "rank-two"
    assert rank_class(m2.as_float()) == "rank-two"


def test_factor_x1_minus_x4_class():
    factors = rank_one_factor(Matrix([[2, 0], [0.4, 0]]))
    assert factors.normal == (1.0, 0.0)
    assert factors.left == (2.0, 0.4)


def test_factor_ones_direction():
    t = 0.1
    factors = rank_one_factor(Matrix([[t, t], [t, t]]))
    r = math.sqrt(0.5)
    assert factors.normal == pytest.approx((r, r), abs=1e-15)


def test_factor_second_axis():
    factors = rank_one_factor(Matrix([[0, 0.4], [0, 2]]))
    assert factors.normal == (0.0, 1.0)
    assert factors.left == pytest.approx((0.4, 2.0))


def test_factor_rejects_rank_two():
    with pytest.raises(NotRankOneError):
        rank_one_factor(Matrix([[1, 0], [0, 1]]))


def test_det2_examples():
    t = F(1, 10)
    x1 = Matrix([[1 - t, t], [t, 1 - t]])
    assert det2(x1) == 1 - 2 * t
    assert det2(Matrix([[1, 0], [0, 1]])) == 1
    x7 = Matrix([[-1 - t, -3 * t], [-3 * t, -1 - t]])
    assert det2(x7) == 1 + 2 * t - 8 * t * t
    with pytest.raises(MatrixError):
        det2(Matrix([[1, 0], [0, 1], [0, 0]]))


def test_3x2_rank_detection():
    assert rank_one_test(Matrix([[0, 0], [0, 0], [-2, -2]]))
    assert rank_class(Matrix([[1, 0], [0, 1], [1, 1]])) == "rank-two"


rational = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@given(v0=rational, v1=rational, n0=rational, n1=rational)
@settings(max_examples=150, deadline=None)
def test_factor_round_trip(v0, v1, n0, n1):
    if (v0 == 0 and v1 == 0) or (n0 == 0 and n1 == 0):
        return
    m = Matrix([[v0 * n0, v0 * n1], [v1 * n0, v1 * n1]])
    if m.is_zero():
        return
    factors = rank_one_factor(m)
    err = (factors.reconstruct() - m.as_float()).norm_inf()
    assert err <= 1e-12 * float(m.norm_inf())
    # determinism of the canonical form
    again = rank_one_factor(m)
    assert again == factors


@given(a=rational, b=rational, c=rational, d=rational)
@settings(max_examples=150, deadline=None)
def test_float_verdict_matches_exact(a, b, c, d):
    m = Matrix([[a, b], [c, d]])
    if m.is_zero():
        return
    assert rank_class(m.as_float()) == rank_class(m)
