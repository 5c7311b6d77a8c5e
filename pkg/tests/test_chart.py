import math
import random
from fractions import Fraction as F

import pytest

from lamprobe import Chart, Cone, Coords, Matrix, cone_family, in_cone, normal_of
from lamprobe.chart import (ChartError, NotInSubspaceError,
                            SingularParameterError, c_grid, parse_chart,
                            parse_cone)


def test_identification_hits_x2():
    chart = Chart("tau", F(1, 10))
    m = chart.coords_to_matrix(Coords(1, 1, 1))
    assert m == Matrix([[F(11, 10), F(3, 10)], [F(3, 10), F(11, 10)]])


def test_zero_maps_to_zero():
    for chart in (Chart("tau", F(1, 20)), Chart("3x2")):
        assert chart.coords_to_matrix(Coords(0, 0, 0)).is_zero()


def test_3x2_coordinates():
    chart = Chart("3x2")
    m = chart.coords_to_matrix(Coords(1, 1, 1))
    assert m == Matrix([[1, 0], [0, 1], [1, 1]])
    assert chart.matrix_to_coords(m).entries() == (1, 1, 1)


def test_inverse_identification():
    chart = Chart("tau", F(1, 20))
    x7 = Matrix([[-1 - F(1, 20), -3 * F(1, 20)],
                 [-3 * F(1, 20), -1 - F(1, 20)]])
    assert chart.matrix_to_coords(x7).entries() == (-1, -1, -1)
    assert chart.matrix_to_coords(Matrix.zero(2, 2)).entries() == (0, 0, 0)


def test_not_in_subspace():
    chart = Chart("tau", F(1, 10))
    with pytest.raises(NotInSubspaceError):
        chart.matrix_to_coords(Matrix([[1, 0], [0, 0]]))


def test_round_trip_random_rationals(rng):
    chart = Chart("tau", F(3, 17))
    for _ in range(100):
        c = Coords(F(rng.randint(-9, 9), rng.randint(1, 7)),
                   F(rng.randint(-9, 9), rng.randint(1, 7)),
                   F(rng.randint(-9, 9), rng.randint(1, 7)))
        assert chart.matrix_to_coords(chart.coords_to_matrix(c)) == c


def test_determinant_identity_random(rng):
    for _ in range(200):
        t = F(rng.randint(0, 48), 100)
        chart = Chart("tau", t)
        c = Coords(F(rng.randint(-8, 8), rng.randint(1, 5)),
                   F(rng.randint(-8, 8), rng.randint(1, 5)),
                   F(rng.randint(-8, 8), rng.randint(1, 5)))
        x, y, z = c.entries()
        det = (chart.coords_to_matrix(c).rows[0][0] * chart.coords_to_matrix(c).rows[1][1]
               - chart.coords_to_matrix(c).rows[0][1] * chart.coords_to_matrix(c).rows[1][0])
        assert det == (1 - 2 * t) * ((1 + 2 * t) * x * y + t * x * z + t * y * z)


def test_in_cone_examples():
    assert in_cone(Coords(0, 0, 1), Cone.quadric(F(1, 7)))
    assert in_cone(Coords(2, 0, 1), Cone.lambda0())
    assert not in_cone(Coords(1, 1, 0), Cone.quadric(F(1, 10)))
    assert not in_cone(Coords(2, 0, 1), Cone.quadric(F(1, 10)))
    with pytest.raises(ChartError):
        in_cone(Coords(0, 0, 0), Cone.lambda0())


def test_cone_scale_invariance():
    cone = Cone.quadric(F(1, 10))
    d = Coords(1, F(-1, 13), 1)
    assert cone.contains(d)
    assert cone.contains(d.scale(F(-7, 3)))


def test_axes_cone():
    cone = Cone.axes()
    assert cone.contains(Coords(0, 0, -3))
    assert not cone.contains(Coords(1, 1, 0))


def test_dict_cone():
    cone = Cone.dictionary([Coords(2, 0, 1)])
    assert cone.contains(Coords(-4, 0, -2))
    assert not cone.contains(Coords(2, 0, 0.9))


def test_cone_family_examples():
    d1, d2 = cone_family(1, F(1, 10))
    assert d1.entries() == (1, F(-1, 13), 1)
    assert d2.entries() == (F(-1, 13), 1, 1)
    cone = Cone.quadric(F(1, 10))
    assert cone.residual(d1) == 0 and cone.residual(d2) == 0
    z1, z2 = cone_family(0, F(1, 10))
    assert z1.entries() == (0, 0, 1) and z2.entries() == (0, 0, 1)
    i1, i2 = cone_family(math.inf, F(1, 10))
    assert i1.entries() == (1, 0, 0) and i2.entries() == (0, 1, 0)


def test_cone_family_exact_on_random_rationals(rng):
    for _ in range(100):
        t = F(rng.randint(0, 45), 100)
        c = F(rng.randint(-12, 12), rng.randint(1, 9))
        try:
            d1, d2 = cone_family(c, t)
        except SingularParameterError:
            continue
        cone = Cone.quadric(t)
        assert cone.residual(d1) == 0
        assert cone.residual(d2) == 0


def test_cone_family_singular_parameter():
    # c + tau (1 + 2c) = 0 at c = -tau/(1+2tau)
    t = F(1, 10)
    with pytest.raises(SingularParameterError):
        cone_family(F(-1, 12), t)


def test_normals_of_basis_directions():
    chart = Chart("tau", F(1, 10))
    assert normal_of(Coords(1, 0, 0), chart) == (1.0, 0.0)
    assert normal_of(Coords(0, 1, 0), chart) == (0.0, 1.0)
    n = normal_of(Coords(0, 0, 1), chart)
    assert n == pytest.approx((math.sqrt(0.5), math.sqrt(0.5)))


def test_normal_of_family_direction():
    t = F(1, 10)
    chart = Chart("tau", t)
    d1, _ = cone_family(1, t)
    want = (1.0, float(t / (1 + t * 3)))
    scale = math.hypot(*want)
    n = normal_of(d1, chart)
    assert n == pytest.approx((want[0] / scale, want[1] / scale))


def test_canonical_direction():
    assert Coords(-2, 0, -4).canonical().entries() == (F(1, 2), 0, 1)
    assert Coords(0.0, -3.0, 1.5).canonical().entries() == (0.0, 1.0, -0.5)


def test_degenerate_chart():
    chart = Chart("tau", 0)
    assert chart.is_degenerate()
    assert chart.coords_to_matrix(Coords(1, 2, 5)) == Matrix([[1, 0], [0, 2]])
    got = chart.matrix_to_coords(Matrix([[1, 0], [0, 2]]))
    assert got.entries() == (1, 2, 0)
    # the quadric at tau = 0 degenerates to xy = 0
    cone = Cone.quadric(0)
    assert cone.contains(Coords(5, 0, 3)) and not cone.contains(Coords(1, 1, 0))


def test_c_grid_shape():
    grid = c_grid(F(1, 16), 16, 65)
    assert len(grid) == 65
    assert grid.count(0.0) == 1
    assert min(grid) == -16 and max(grid) == 16
    with pytest.raises(ChartError):
        c_grid(F(1, 16), 16, 64)


def test_quadric_dictionary_is_deterministic():
    cone = Cone.quadric(F(1, 10))
    a = cone.sample_directions()
    b = cone.sample_directions()
    assert [d.entries() for d in a] == [d.entries() for d in b]
    assert len(a) > 65


def test_spec_string_parsers():
    assert parse_chart("3x2").kind == "3x2"
    assert parse_chart("tau:1/20").tau == F(1, 20)
    assert parse_cone("lambda0").tau == 0
    assert parse_cone("axes").kind == "axes"
    assert parse_cone("tau:0.05").kind == "quadric"
    with pytest.raises(ChartError):
        parse_chart("nope")
    with pytest.raises(ChartError):
        parse_cone("nope")
