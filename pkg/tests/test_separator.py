import math
import random
from fractions import Fraction as F

import pytest

from lamprobe import Chart, Cone, Coords
from lamprobe.scenarios import nu0_measure, scenario_coords_measure
from lamprobe.separator import (Box, Certificate, PolyFunc, SeparatorConfig,
                                SeparatorError, convexity_violation,
                                monomials_upto, pairing_gap, separate,
                                verify_certificate)

BOX = Box(lo=(-1.1, -1.1, -1.1), hi=(1.1, 1.1, 1.1))
FAST = SeparatorConfig(dense_lines=100_000)


def test_monomials_upto():
    cubics = monomials_upto(3, min_degree=2)
    assert (1, 1, 1) in cubics and (0, 0, 2) in cubics
    assert all(2 <= sum(e) <= 3 for e in cubics)


def test_polyfunc_eval_exact():
    f = PolyFunc({(1, 1, 1): F(-1), (2, 0, 0): F(1, 3)})
    assert f(Coords(F(1, 2), F(1, 3), F(3))) == F(-1, 2) + F(1, 12)


def test_line_restriction_matches_direct_eval(rng):
    f = PolyFunc({(2, 1, 1): 0.7, (0, 0, 4): -0.3, (1, 0, 0): 1.1})
    for _ in range(20):
        p = [rng.uniform(-1, 1) for _ in range(3)]
        d = [rng.uniform(-1, 1) for _ in range(3)]
        coeffs = f.line_restriction(p, d)
        for t in (-0.7, 0.0, 1.3):
            direct = f(Coords(*(pi + t * di for pi, di in zip(p, d))))
            horner = sum(c * t ** k for k, c in enumerate(coeffs))
            assert direct == pytest.approx(horner, abs=1e-12)


def test_second_derivative_closed_form_is_exact(rng):
    # the per-line second derivative of a quartic is a quadratic in t;
    # compare its closed form against dense finite differences
    f = PolyFunc({(4, 0, 0): 0.3, (1, 1, 2): -0.8, (0, 2, 0): 0.5})
    for _ in range(10):
        p = [rng.uniform(-1, 1) for _ in range(3)]
        d = [rng.uniform(-1, 1) for _ in range(3)]
        c0, c1, c2 = f.second_derivative_on_line(p, d)
        h = 1e-5
        for t in (-0.5, 0.2, 0.9):
            num = (f(Coords(*(pi + (t + h) * di for pi, di in zip(p, d))))
                   - 2 * f(Coords(*(pi + t * di for pi, di in zip(p, d))))
                   + f(Coords(*(pi + (t - h) * di for pi, di in zip(p, d))))) / h ** 2
            assert c0 + c1 * t + c2 * t * t == pytest.approx(num, abs=1e-4)


def test_violation_convex_quadratic_is_zero():
    f = PolyFunc({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})
    assert convexity_violation(f, Cone.quadric(F(1, 10)), BOX, 3000) == 0.0


def test_violation_xyz_axes_is_zero():
    f = PolyFunc({(1, 1, 1): -1})
    assert convexity_violation(f, Cone.axes(), BOX, 3000) == 0.0


def test_violation_xyz_lambda0_positive():
    # along (2,0,1) lines the second derivative is -4y < 0 for y > 0
    f = PolyFunc({(1, 1, 1): -1})
    v = convexity_violation(f, Cone.lambda0(), BOX, 5000)
    assert v > 0.5


def test_pairing_gap_exact():
    f = PolyFunc({(1, 1, 1): F(-1)})
    target = scenario_coords_measure("three-by-two")
    assert pairing_gap(f, target) == F(1, 2)


def test_separate_three_by_two():
    target = scenario_coords_measure("three-by-two")
    cert = separate(target, Cone.axes(), degree=3, cfg=FAST)
    assert cert.status == "verified"
    assert float(cert.gap) >= 0.5 - 1e-6
    assert cert.violation <= 1e-9
    # the solution is the pure product polynomial
    top = max(cert.f.coeffs, key=lambda e: abs(float(cert.f.coeffs[e])))
    assert top == (1, 1, 1)


def test_separate_objective_history_monotone():
    target = scenario_coords_measure("nu0")
    cert = separate(target, Cone.lambda0(), degree=4, cfg=FAST)
    hist = cert.meta["objective_history"]
    assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))
    assert not (cert.status == "verified" and float(cert.gap) > 1e-6)


def test_separate_delta_measure_gap_zero():
    target = scenario_coords_measure("nu0")
    # balanced measure on +-e3 is a laminate for every cone that holds e3
    from lamprobe.measure import DiscreteMeasure
    mu = DiscreteMeasure([(Coords(0, 0, 1), F(1, 2)), (Coords(0, 0, -1), F(1, 2))])
    cert = separate(mu, Cone.quadric(F(1, 10)), degree=4, cfg=FAST)
    assert not (cert.status == "verified" and float(cert.gap) > 1e-6)


def test_separate_requires_zero_barycenter():
    from lamprobe.measure import DiscreteMeasure
    mu = DiscreteMeasure([(Coords(1, 0, 0), F(1))])
    with pytest.raises(SeparatorError):
        separate(mu, Cone.axes(), degree=2, cfg=FAST)


def test_verify_certificate_downgrades_corrupted():
    target = scenario_coords_measure("three-by-two")
    bad = Certificate(f=PolyFunc({(4, 0, 0): -1}), gap=0.0, violation=0.0,
                      status="verified")
    out = verify_certificate(bad, Cone.axes(), target, 50_000)
    assert out.status == "refuted"


def test_verify_certificate_exact_gap():
    target = scenario_coords_measure("three-by-two")
    cert = Certificate(f=PolyFunc({(1, 1, 1): F(-1)}), gap=0, violation=0,
                       status="inconclusive")
    out = verify_certificate(cert, Cone.axes(), target, 50_000)
    assert out.status == "verified"
    assert out.gap == F(1, 2)


def test_scaling_certificate_keeps_status():
    target = scenario_coords_measure("three-by-two")
    base = verify_certificate(
        Certificate(f=PolyFunc({(1, 1, 1): F(-1)}), gap=0, violation=0,
                    status="inconclusive"),
        Cone.axes(), target, 20_000)
    for s in (F(1, 1000), F(250)):
        scaled = verify_certificate(
            Certificate(f=base.f.scale(s), gap=0, violation=0,
                        status="inconclusive"),
            Cone.axes(), target, 20_000)
        assert scaled.status == base.status == "verified"
        assert scaled.gap == s * base.gap
