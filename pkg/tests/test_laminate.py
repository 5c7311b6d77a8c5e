from fractions import Fraction as F

import pytest

from lamprobe import (Chart, Cone, Coords, Matrix, det2, distance, flatten,
                      jensen_gap, validate)
from lamprobe.laminate import (SplitNode, TreeError, LaminateTree, leaf,
                               level_masses, split)
from lamprobe.measure import DiscreteMeasure, barycenter
from lamprobe.scenarios import (build_mu_tau_tree, build_nu0_tree,
                                nu0_measure)


def test_one_child_is_malformed():
    with pytest.raises(TreeError):
        SplitNode(Coords(0, 0, 0), F(1), (leaf(Coords(1, 0, 0), F(1)),))


def test_nu0_chain_valid_under_lambda0():
    report = validate(build_nu0_tree(), cone=Cone.lambda0(), tol=1e-12)
    assert report.valid
    for check in report.checks:
        assert check.weight_residual == 0
        assert check.barycenter_residual == 0
        assert check.cone_ok


def test_mu_chain_valid_under_quadric():
    t = F(1, 10)
    report = validate(build_mu_tau_tree(t), cone=Cone.quadric(t), tol=1e-12)
    assert report.valid


def test_nu0_chain_fails_under_quadric():
    report = validate(build_nu0_tree(), cone=Cone.quadric(F(1, 10)), tol=1e-12)
    assert not report.valid
    bad = report.failures()
    assert bad and all(c.cone_ok is False for c in bad)


def test_validate_matrix_tree_with_chart_cone():
    t = F(1, 10)
    chart = Chart("tau", t)
    from lamprobe.scenarios import embed_tree
    tree = embed_tree(build_mu_tau_tree(t), chart)
    report = validate(tree, cone=Cone.quadric(t), chart=chart, tol=1e-9)
    assert report.valid
    for check in report.checks:
        assert check.rank_verdict == "rank-one"


def test_broken_conservation_detected():
    bad = split(Coords(0, 0, 0), F(1),
                leaf(Coords(0, 0, -1), F(1, 3)),
                leaf(Coords(0, 0, 1), F(1, 3)))
    report = validate(LaminateTree(bad), tol=1e-12)
    assert not report.valid


def test_zero_weight_child_is_flagged_not_failed():
    tree = LaminateTree(split(Coords(0, 0, 0), F(1),
                              leaf(Coords(0, 0, 0), F(1)),
                              leaf(Coords(0, 0, 2), F(0))))
    report = validate(tree, cone=Cone.lambda0(), tol=1e-12)
    assert report.valid
    assert report.checks[0].degenerate


def test_flatten_nu0():
    mu = flatten(build_nu0_tree())
    assert mu == nu0_measure()
    heavy = [a for a in mu.atoms if a.weight == F(3, 16)]
    assert all(a.point.x * a.point.y * a.point.z == 1 for a in heavy)


def test_flatten_single_node():
    tree = LaminateTree(leaf(Matrix.zero(2, 2), F(1)))
    mu = flatten(tree)
    assert len(mu) == 1 and mu.atoms[0].weight == F(1)


def test_flatten_mu_tau_weights():
    t = F(1, 10)
    mu = flatten(build_mu_tau_tree(t))
    a1, a2 = F(299, 599), F(300, 599)
    weights = sorted(a.weight for a in mu.atoms)
    expect = sorted([a1 / 8, 3 * a1 / 8, a2 / 8, 3 * a2 / 8] * 2)
    assert weights == expect


def test_jensen_gap_affine_zero(rng):
    from conftest import random_matrix_tree
    tree = random_matrix_tree(rng, max_depth=3)

    def f(m):
        return 3 * m.rows[0][0] - 2 * m.rows[1][1] + F(1, 7)

    assert jensen_gap(tree, f) == 0


def test_jensen_gap_det2_null_lagrangian(rng):
    from conftest import random_matrix_tree
    for _ in range(25):
        tree = random_matrix_tree(rng, max_depth=4)
        assert jensen_gap(tree, det2) == 0


def test_jensen_gap_strictly_convex_negative():
    t = F(1, 10)
    tree = build_mu_tau_tree(t)

    def sq(c):
        return c.x * c.x + c.y * c.y + c.z * c.z

    assert jensen_gap(tree, sq) < 0


def test_level_masses_are_one(rng):
    from conftest import random_matrix_tree
    tree = random_matrix_tree(rng, max_depth=4)
    assert all(m == 1 for m in level_masses(tree))


def test_flatten_barycenter_matches_root(rng):
    from conftest import random_matrix_tree
    for _ in range(10):
        tree = random_matrix_tree(rng, max_depth=4)
        assert barycenter(flatten(tree)) == tree.root.point
