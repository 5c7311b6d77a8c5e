import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamprobe import (Atom, DiscreteMeasure, Matrix, barycenter, det2,
                      distance, integrate, project_row)
from lamprobe.chart import Coords
from lamprobe.measure import MeasureError
from lamprobe.scenarios import build_3x2, build_nu_tau, nu_tau_matrices


def test_weights_must_sum_to_one():
    with pytest.raises(MeasureError):
        DiscreteMeasure([(Matrix([[1, 0], [0, 1]]), F(1, 2))])
    with pytest.raises(MeasureError):
        DiscreteMeasure([(Matrix([[1, 0], [0, 1]]), F(-1, 2)),
                         (Matrix([[0, 0], [0, 0]]), F(3, 2))])


def test_coincident_atoms_merge():
    m = Matrix([[1, 0], [0, 1]])
    mu = DiscreteMeasure([(m, F(1, 2)), (m, F(1, 4)), (-1 * m, F(1, 4))])
    assert len(mu) == 2
    assert {a.weight for a in mu.atoms} == {F(3, 4), F(1, 4)}


def test_barycenter_of_nu_tau_is_zero():
    for t in (F(0), F(1, 100), F(1, 10)):
        assert barycenter(build_nu_tau(t).measure).is_zero()


def test_barycenter_single_atom():
    m = Matrix([[2, 1], [0, 1]])
    assert barycenter(DiscreteMeasure([(m, F(1))])) == m


def test_det_moment_vanishes_exactly():
    for t in (F(1, 100), F(1, 20), F(1, 10), F(2, 5)):
        assert integrate(build_nu_tau(t).measure, det2) == 0


def test_integrate_constant():
    mu = build_nu_tau(F(1, 10)).measure
    assert integrate(mu, lambda m: 1) == 1


def test_integrate_cube_product_on_3x2():
    mu = build_3x2().coords_measure
    val = integrate(mu, lambda c: -c.x * c.y * c.z)
    assert val == F(-1, 2)


def test_project_row_examples():
    t = F(1, 10)
    mu = build_nu_tau(t).measure
    rows1 = project_row(mu, 1)
    assert any(a.point.rows[0] == (1 - t, t) and a.weight == F(1, 16)
               for a in rows1.atoms)
    rows2 = project_row(mu, 2)
    assert any(a.point.rows[0] == (3 * t, 1 + t) and a.weight == F(3, 16)
               for a in rows2.atoms)
    single = DiscreteMeasure([(Matrix([[1, 2], [3, 4]]), F(1))])
    pr = project_row(single, 2)
    assert pr.atoms[0].point == Matrix([[3, 4]]) and pr.atoms[0].weight == F(1)
    with pytest.raises(MeasureError):
        project_row(mu, 3)


def test_project_row_commutes_with_barycenter():
    mu = build_3x2().measure
    for l in (1, 2, 3):
        left = barycenter(project_row(mu, l))
        assert left == Matrix([barycenter(mu).rows[l - 1]])


def test_integrate_affine_equals_barycenter_pairing():
    rng = random.Random(7)
    for _ in range(20):
        atoms = []
        weights = [F(rng.randint(1, 5)) for _ in range(4)]
        total = sum(weights)
        for w in weights:
            atoms.append((Matrix([[F(rng.randint(-3, 3)) for _ in range(2)]
                                  for _ in range(2)]), w / total))
        mu = DiscreteMeasure(atoms)
        coef = [F(rng.randint(-2, 2)) for _ in range(4)]

        def f(m):
            flat = m.entries()
            return sum(c * x for c, x in zip(coef, flat)) + F(1, 3)

        assert integrate(mu, f) == f(barycenter(mu))


def test_distance_identity_and_deltas():
    mu = build_nu_tau(F(1, 10)).measure
    assert distance(mu, mu) == 0
    a = DiscreteMeasure([(Matrix([[0, 0], [0, 0]]), F(1))])
    b = DiscreteMeasure([(Matrix([[1, -3], [0, 2]]), F(1))])
    assert distance(a, b) == 3


def test_distance_exact_rational_output():
    t = F(1, 10)
    heavy = DiscreteMeasure([(Matrix([[1, 0], [0, 1]]), F(3, 4)),
                             (Matrix([[0, 0], [0, 0]]), F(1, 4))])
    light = DiscreteMeasure([(Matrix([[1, 0], [0, 1]]), F(1, 4)),
                             (Matrix([[0, 0], [0, 0]]), F(3, 4))])
    assert distance(heavy, light) == F(1, 2)


def test_distance_different_support_sizes():
    a = DiscreteMeasure([(Coords(0, 0, 0), F(1))])
    b = DiscreteMeasure([(Coords(1, 0, 0), F(1, 2)), (Coords(-1, 0, 0), F(1, 2))])
    assert distance(a, b) == 1


coords_st = st.tuples(
    st.fractions(min_value=-2, max_value=2, max_denominator=4),
    st.fractions(min_value=-2, max_value=2, max_denominator=4),
    st.fractions(min_value=-2, max_value=2, max_denominator=4))


def _measure(pts, ws):
    total = sum(ws)
    return DiscreteMeasure([(Coords(*p), F(w) / total) for p, w in zip(pts, ws)])


@given(pts=st.lists(coords_st, min_size=3, max_size=3, unique=True),
       w1=st.lists(st.integers(1, 4), min_size=3, max_size=3),
       w2=st.lists(st.integers(1, 4), min_size=3, max_size=3),
       w3=st.lists(st.integers(1, 4), min_size=3, max_size=3))
@settings(max_examples=60, deadline=None)
def test_distance_is_a_metric(pts, w1, w2, w3):
    a, b, c = (_measure(pts, w) for w in (w1, w2, w3))
    dab = distance(a, b)
    assert dab == distance(b, a)
    assert (dab == 0) == (a.atoms == b.atoms)
    assert dab <= distance(a, c) + distance(c, b)
