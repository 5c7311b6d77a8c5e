"""The explicit constructions, as ready-made self-verifying bundles.

Five scenarios are provided:

* ``nu-tau``       eight 2x2 gradients with 3/16 / 1/16 weights,
* ``nu-bar-tau``   the same support with uniform weights 1/8,
* ``three-by-two`` the eight 3x2 gradients with 3/16 / 1/16 weights,
* ``nu0-tree``     the depth-3 decomposition chain of the limit measure
                   under the degenerate cone xy = 0 (plus a variant chain),
* ``mu-tau-tree``  the depth-3 perturbed chain that is a genuine laminate
                   for every tau, with root weights a1(tau), a2(tau).

Every bundle carries an expected-difference table (the twelve rank-one
connections with their lamination normals) and can verify itself exactly in
rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .chart import Chart, Cone, Coords
from .laminate import LaminateTree, SplitNode, flatten, leaf, split, validate
from .matcore import Matrix, Scalar, det2, rank_class, rank_one_factor
from .measure import Atom, DiscreteMeasure, barycenter, distance, integrate

SQ2 = math.sqrt(0.5)

#: the three lamination-normal classes, canonical unit form
NORMALS = {
    "(1,0)": (1.0, 0.0),
    "(0,1)": (0.0, 1.0),
    "(1,1)": (SQ2, SQ2),
}

#: index pairs (1-based) of the twelve rank-one differences, with the
#: normal class each one realizes
DIFFERENCE_PAIRS = [
    ((1, 2), "(1,1)"), ((1, 4), "(1,0)"), ((1, 6), "(0,1)"),
    ((2, 3), "(1,0)"), ((2, 5), "(0,1)"), ((3, 4), "(1,1)"),
    ((3, 8), "(0,1)"), ((4, 7), "(0,1)"), ((5, 6), "(1,1)"),
    ((5, 8), "(1,0)"), ((6, 7), "(1,0)"), ((7, 8), "(1,1)"),
]

#: cube coordinates of X1..X8 (same pattern in both charts); odd indices
#: carry weight 1/16, even indices 3/16
CUBE_COORDS = [
    (1, 1, -1), (1, 1, 1), (-1, 1, 1), (-1, 1, -1),
    (1, -1, 1), (1, -1, -1), (-1, -1, -1), (-1, -1, 1),
]

HEAVY = Fraction(3, 16)
LIGHT = Fraction(1, 16)


class ScenarioError(ValueError):
    pass


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class CheckReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass
class ExpectedDifference:
    pair: tuple[int, int]
    matrix: Matrix
    normal_class: Optional[str]  # None when the difference vanishes (tau = 0)


@dataclass
class ScenarioBundle:
    name: str
    chart: Chart
    measure: DiscreteMeasure            # matrix atoms
    coords_measure: DiscreteMeasure     # same measure in chart coordinates
    expected_differences: list[ExpectedDifference]
    cone: Optional[Cone] = None
    tree: Optional[LaminateTree] = None

    def verify(self, tol: float = 1e-9) -> CheckReport:
        report = CheckReport()
        self._verify_differences(report, tol)
        bc = barycenter(self.measure)
        report.add("barycenter is zero", bc.is_zero(), f"|b|={bc.norm_inf()!r}")
        if self.chart.kind == "tau":
            moment = integrate(self.measure, det2)
            report.add("determinant moment vanishes", moment == 0,
                       f"<det2>={moment!r}")
        self._verify_coordinates(report)
        if self.tree is not None and self.cone is not None:
            vr = validate(self.tree, cone=self.cone, chart=self.chart, tol=tol)
            report.add("tree validates under cone", vr.valid,
                       f"{len(vr.failures())} failing nodes")
            leaves = flatten(self.tree)
            diff = distance(leaves, self.coords_measure)
            report.add("tree flattens to the measure", float(diff) <= tol,
                       f"transport distance {float(diff):.3g}")
        return report

    def _verify_differences(self, report: CheckReport, tol: float) -> None:
        matrices = self._support_by_index()
        for exp in self.expected_differences:
            i, j = exp.pair
            calc = matrices[i - 1] - matrices[j - 1]
            name = f"difference X{i}-X{j}"
            if calc != exp.matrix:
                report.add(name, False, "does not match the stated matrix")
                continue
            if exp.normal_class is None:
                report.add(name, calc.is_zero(), "degenerate (zero) difference")
                continue
            if rank_class(calc) != "rank-one":
                report.add(name, False, f"rank verdict {rank_class(calc)}")
                continue
            normal = rank_one_factor(calc).normal
            want = NORMALS[exp.normal_class]
            err = max(abs(normal[0] - want[0]), abs(normal[1] - want[1]))
            report.add(name, err <= max(tol, 1e-12),
                       f"normal {exp.normal_class}, error {err:.2g}")

    def _verify_coordinates(self, report: CheckReport) -> None:
        if self.chart.is_degenerate():
            return
        ok = True
        for mat, cube in zip(self._support_by_index(), CUBE_COORDS):
            got = self.chart.matrix_to_coords(mat)
            if got.entries() != cube:
                ok = False
        report.add("support sits on the coordinate cube", ok)

    def _support_by_index(self) -> list[Matrix]:
        # measure atoms are stored sorted; rebuild X1..X8 in paper order
        if self.chart.kind == "tau":
            return nu_tau_matrices(self.chart.tau)
        return three_by_two_matrices()


# ----------------------------------------------------------------------
# supports
# ----------------------------------------------------------------------

def nu_tau_matrices(tau: Scalar) -> list[Matrix]:
    """X1..X8 of the 2x2 family (image of the cube under the tau chart)."""
    chart = Chart("tau", tau)
    return [chart.coords_to_matrix(Coords(*c)) for c in CUBE_COORDS]


def three_by_two_matrices() -> list[Matrix]:
    chart = Chart("3x2")
    return [chart.coords_to_matrix(Coords(*c)) for c in CUBE_COORDS]


def _cube_weights(uniform: bool) -> list[Fraction]:
    if uniform:
        return [Fraction(1, 8)] * 8
    return [LIGHT if i % 2 == 0 else HEAVY for i in range(8)]


def _difference_table(matrices: list[Matrix], tau_zero: bool) -> list[ExpectedDifference]:
    out = []
    for (i, j), cls in DIFFERENCE_PAIRS:
        mat = matrices[i - 1] - matrices[j - 1]
        out.append(ExpectedDifference(
            pair=(i, j), matrix=mat,
            normal_class=None if (tau_zero and mat.is_zero()) else cls))
    return out


def _cube_bundle(name: str, chart: Chart, uniform: bool,
                 cone: Optional[Cone]) -> ScenarioBundle:
    if chart.kind == "tau":
        matrices = nu_tau_matrices(chart.tau)
        tau_zero = chart.tau == 0
    else:
        matrices = three_by_two_matrices()
        tau_zero = False
    weights = _cube_weights(uniform)
    measure = DiscreteMeasure(zip(matrices, weights))
    coords = DiscreteMeasure(
        [(Coords(*c), w) for c, w in zip(CUBE_COORDS, weights)])
    return ScenarioBundle(
        name=name, chart=chart, measure=measure, coords_measure=coords,
        expected_differences=_difference_table(matrices, tau_zero),
        cone=cone)


def build_nu_tau(tau: Scalar) -> ScenarioBundle:
    """The candidate measure: weights 3/16 on even-indexed gradients and
    1/16 on odd-indexed ones, supported on the cube vertices of the tau
    chart."""
    _check_tau(tau)
    return _cube_bundle("nu-tau", Chart("tau", tau), uniform=False,
                        cone=Cone.quadric(tau))


def build_nu_bar_tau(tau: Scalar) -> ScenarioBundle:
    """Same support with uniform weights 1/8 (a genuine laminate)."""
    _check_tau(tau)
    return _cube_bundle("nu-bar-tau", Chart("tau", tau), uniform=True,
                        cone=Cone.quadric(tau))


def build_3x2() -> ScenarioBundle:
    """The 3x2 construction; its chart cone is the three coordinate axes,
    and the asymmetric weights make it provably not a laminate."""
    return _cube_bundle("three-by-two", Chart("3x2"), uniform=False,
                        cone=Cone.axes())


def _check_tau(tau: Scalar) -> None:
    if not 0 <= tau < Fraction(1, 2):
        raise ScenarioError("need 0 <= tau < 1/2 (the chart degenerates at 1/2)")


# ----------------------------------------------------------------------
# decomposition chains
# ----------------------------------------------------------------------

def build_nu0_tree(variant: bool = False) -> LaminateTree:
    """Depth-3 chain decomposing the limit measure under the degenerate
    cone xy = 0.

    The default chain splits the y-faces first and finishes along (0,0,1);
    the variant replaces the (2,0,+-1) directions by (1,0,+-2) and finishes
    along (1,0,0) instead.
    """
    q = Fraction
    if not variant:
        def fan(sign: int) -> SplitNode:
            # (sign applied to the y coordinate)
            s = q(sign)
            right = split(
                Coords(1, s, s / 2), q(1, 4),
                leaf(Coords(1, s, -s), q(1, 16)),
                leaf(Coords(1, s, s), q(3, 16)))
            left = split(
                Coords(-1, s, -s / 2), q(1, 4),
                leaf(Coords(-1, s, s), q(1, 16)),
                leaf(Coords(-1, s, -s), q(3, 16)))
            return split(Coords(0, s, 0), q(1, 2), right, left)

        root = split(Coords(0, 0, 0), q(1), fan(-1), fan(+1))
    else:
        def fan(sign: int) -> SplitNode:
            # on the y = s face, the group with z = s has its heavy vertex
            # at x = +1 and the group with z = -s at x = -1, so the two
            # subgroup barycenters sit at x = +-1/2 regardless of the sign
            s = q(sign)
            same_z = split(
                Coords(q(1, 2), s, s), q(1, 4),
                leaf(Coords(-1, s, s), q(1, 16)),
                leaf(Coords(1, s, s), q(3, 16)))
            opp_z = split(
                Coords(q(-1, 2), s, -s), q(1, 4),
                leaf(Coords(1, s, -s), q(1, 16)),
                leaf(Coords(-1, s, -s), q(3, 16)))
            return split(Coords(0, s, 0), q(1, 2), same_z, opp_z)

        root = split(Coords(0, 0, 0), q(1), fan(-1), fan(+1))
    return LaminateTree(root)


def mu_weights(tau: Scalar) -> tuple[Scalar, Scalar]:
    """Root weights a1, a2 of the perturbed chain; a1 + a2 = 1 identically
    and both tend to 1/2 as tau -> 0."""
    d = 8 + 36 * tau + 38 * tau * tau
    a1 = (2 + 6 * tau) * (2 + 3 * tau) / d
    a2 = (2 + 4 * tau) * (2 + 5 * tau) / d
    return a1, a2


def build_mu_tau_tree(tau: Scalar) -> LaminateTree:
    """The perturbed depth-3 chain: a genuine laminate for the quadric cone
    at every tau, obtained by nudging four cube vertices in y."""
    _check_tau(tau)
    if isinstance(tau, float):
        tau = Fraction(tau)
    q = Fraction
    a1, a2 = mu_weights(tau)
    e1 = 2 * tau / (2 + 3 * tau)   # shift on the y = -1 side
    e2 = 2 * tau / (2 + 5 * tau)   # shift on the y = +1 side

    low = split(
        Coords(0, -1 - e1 / 2, 0), a1,
        split(Coords(1, -1, q(-1, 2)), a1 / 2,
              leaf(Coords(1, -1, 1), a1 / 8),
              leaf(Coords(1, -1, -1), 3 * a1 / 8)),
        split(Coords(-1, -1 - e1, q(1, 2)), a1 / 2,
              leaf(Coords(-1, -1 - e1, -1), a1 / 8),
              leaf(Coords(-1, -1 - e1, 1), 3 * a1 / 8)))
    high = split(
        Coords(0, 1 + e2 / 2, 0), a2,
        split(Coords(1, 1, q(1, 2)), a2 / 2,
              leaf(Coords(1, 1, -1), a2 / 8),
              leaf(Coords(1, 1, 1), 3 * a2 / 8)),
        split(Coords(-1, 1 + e2, q(-1, 2)), a2 / 2,
              leaf(Coords(-1, 1 + e2, 1), a2 / 8),
              leaf(Coords(-1, 1 + e2, -1), 3 * a2 / 8)))
    root = split(Coords(0, 0, 0), q(1), low, high)
    return LaminateTree(root)


def nu0_measure() -> DiscreteMeasure:
    """The limit measure in coordinates (identical to the nu-tau pattern)."""
    return DiscreteMeasure(
        [(Coords(*c), w) for c, w in zip(CUBE_COORDS, _cube_weights(False))])


def embed_measure(mu: DiscreteMeasure, chart: Chart) -> DiscreteMeasure:
    """Map a coordinate measure into matrix space through the chart."""
    return mu.map_points(chart.coords_to_matrix)


def embed_tree(tree: LaminateTree, chart: Chart) -> LaminateTree:
    def go(node: SplitNode) -> SplitNode:
        return SplitNode(chart.coords_to_matrix(node.point), node.weight,
                         tuple(go(c) for c in node.children))
    return LaminateTree(go(tree.root))


# ----------------------------------------------------------------------
# scenario registry for the CLI
# ----------------------------------------------------------------------

MEASURE_SCENARIOS = ("nu-tau", "nu-bar-tau", "three-by-two", "nu0")
TREE_SCENARIOS = ("nu0-tree", "mu-tau-tree")


def needs_tau(name: str) -> bool:
    return name in ("nu-tau", "nu-bar-tau", "mu-tau-tree")


def scenario_bundle(name: str, tau: Optional[Scalar] = None) -> ScenarioBundle:
    if needs_tau(name) and tau is None:
        raise ScenarioError(f"scenario {name!r} needs --tau")
    if name == "nu-tau":
        return build_nu_tau(tau)
    if name == "nu-bar-tau":
        return build_nu_bar_tau(tau)
    if name == "three-by-two":
        return build_3x2()
    raise ScenarioError(f"unknown scenario {name!r}")


def scenario_tree(name: str, tau: Optional[Scalar] = None) -> LaminateTree:
    if name == "nu0-tree":
        return build_nu0_tree()
    if name == "mu-tau-tree":
        if tau is None:
            raise ScenarioError("mu-tau-tree needs --tau")
        return build_mu_tau_tree(tau)
    raise ScenarioError(f"unknown tree scenario {name!r}")


def scenario_coords_measure(name: str, tau: Optional[Scalar] = None) -> DiscreteMeasure:
    """Coordinate-space target measure for search/separate."""
    if name in ("nu-tau", "nu-bar-tau", "three-by-two"):
        return scenario_bundle(name, tau).coords_measure
    if name == "nu0":
        return nu0_measure()
    if name in TREE_SCENARIOS:
        return flatten(scenario_tree(name, tau))
    raise ScenarioError(f"unknown scenario {name!r}")
