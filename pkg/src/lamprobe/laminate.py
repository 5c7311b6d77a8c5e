"""Laminate decomposition trees.

A tree encodes the recursive two-point splitting that defines a laminate:
the root carries the barycenter with weight 1, and every internal node
splits its mass between exactly two children whose weighted average it is,
the child difference being a rank-one matrix (equivalently a rank-one cone
direction in chart coordinates).

Node points are matrices or chart coordinates; validation checks whatever
evidence the caller supplies (a chart to map coordinate differences to
matrices, a cone for membership of the differences).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .chart import Chart, Cone, Coords, NotInSubspaceError
from .matcore import Matrix, Scalar, rank_class
from .measure import Atom, DiscreteMeasure, barycenter, integrate


class TreeError(ValueError):
    pass


class SplitNode:
    __slots__ = ("point", "weight", "children")

    def __init__(self, point, weight: Scalar, children=()):
        children = tuple(children)
        if len(children) not in (0, 2):
            raise TreeError("a split node has zero or exactly two children")
        if weight < 0:
            raise TreeError("negative node weight")
        self.point = point
        self.weight = weight
        self.children = children

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def __repr__(self) -> str:
        tag = "leaf" if self.is_leaf else "split"
        return f"SplitNode({tag}, w={self.weight!r}, p={self.point!r})"


@dataclass(frozen=True)
class LaminateTree:
    root: SplitNode

    def depth(self) -> int:
        def go(node: SplitNode) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(go(c) for c in node.children)
        return go(self.root)

    def nodes(self):
        """Pre-order traversal of (path, node); left child is '0'."""
        stack = [("", self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for k in reversed(range(len(node.children))):
                stack.append((path + str(k), node.children[k]))


def leaf(point, weight: Scalar) -> SplitNode:
    return SplitNode(point, weight)


def split(point, weight: Scalar, left: SplitNode, right: SplitNode) -> SplitNode:
    return SplitNode(point, weight, (left, right))


@dataclass
class NodeCheck:
    path: str
    weight_residual: Scalar = 0
    barycenter_residual: Scalar = 0
    rank_verdict: Optional[str] = None
    cone_ok: Optional[bool] = None
    degenerate: bool = False
    note: str = ""

    def ok(self, tol: float) -> bool:
        if float(self.weight_residual) > tol or float(self.barycenter_residual) > tol:
            return False
        if self.rank_verdict not in (None, "rank-one") and not self.degenerate:
            return False
        if self.cone_ok is False and not self.degenerate:
            return False
        return True


@dataclass
class ValidationReport:
    checks: list[NodeCheck] = field(default_factory=list)
    tol: float = 0.0
    root_weight_residual: Scalar = 0

    @property
    def valid(self) -> bool:
        if float(self.root_weight_residual) > self.tol:
            return False
        return all(c.ok(self.tol) for c in self.checks)

    def failures(self) -> list[NodeCheck]:
        return [c for c in self.checks if not c.ok(self.tol)]


def validate(tree: LaminateTree, cone: Optional[Cone] = None,
             chart: Optional[Chart] = None, tol: float = 1e-9) -> ValidationReport:
    """Check conservation of mass and barycenter at every split, plus the
    rank-one condition on child differences (and cone membership when a
    cone is given).  Zero-weight children are flagged, not failed."""
    report = ValidationReport(tol=tol)
    report.root_weight_residual = abs(tree.root.weight - 1)
    for path, node in tree.nodes():
        if node.is_leaf:
            continue
        left, right = node.children
        check = NodeCheck(path=path or "root")
        check.weight_residual = abs(node.weight - (left.weight + right.weight))
        moment = left.point.scale(left.weight) + right.point.scale(right.weight)
        check.barycenter_residual = (node.point.scale(node.weight) - moment).norm_inf()
        if left.weight == 0 or right.weight == 0:
            check.degenerate = True
            check.note = "zero-weight child (degenerate split)"
        diff = right.point - left.point
        _check_direction(check, diff, cone, chart, tol)
        report.checks.append(check)
    return report


def _check_direction(check: NodeCheck, diff, cone, chart, tol: float) -> None:
    is_coords = isinstance(diff, Coords)
    if diff.is_zero():
        check.rank_verdict = "zero"
        if not check.degenerate:
            check.note = "zero split direction"
        return
    if is_coords:
        if chart is not None and not chart.is_degenerate():
            image = chart.coords_to_matrix(diff)
            check.rank_verdict = rank_class(
                image, tol if not image.is_exact() else 1e-12)
        if cone is not None:
            check.cone_ok = cone.contains(diff, tol)
            if check.rank_verdict is None:
                check.rank_verdict = "rank-one" if check.cone_ok else "rank-two"
    else:
        check.rank_verdict = rank_class(diff, tol if not diff.is_exact() else 1e-12)
        if cone is not None:
            if chart is None:
                raise TreeError("cone membership of a matrix tree needs a chart")
            try:
                coords = chart.matrix_to_coords(diff, tol)
                check.cone_ok = cone.contains(coords, tol)
            except NotInSubspaceError:
                check.cone_ok = False
                check.note = "difference not in chart subspace"


def flatten(tree: LaminateTree) -> DiscreteMeasure:
    """Measure of the leaves with their weights (coincident atoms merge)."""
    atoms = [Atom(node.point, node.weight)
             for _, node in tree.nodes() if node.is_leaf and node.weight > 0]
    return DiscreteMeasure(atoms)


def jensen_gap(tree: LaminateTree, f: Callable) -> Scalar:
    """f(root point) - <f, flatten(tree)>.

    Nonpositive for every function convex along the tree's split
    directions; identically zero for null Lagrangians like det2.
    """
    return f(tree.root.point) - integrate(flatten(tree), f)


def level_masses(tree: LaminateTree) -> list[Scalar]:
    """Total mass seen at each depth (leaves keep counting below their
    depth), which must be identically 1."""
    depth = tree.depth()
    masses = [0] * (depth + 1)

    def go(node: SplitNode, d: int) -> None:
        if node.is_leaf:
            for k in range(d, depth + 1):
                masses[k] += node.weight
        else:
            masses[d] += node.weight
            for c in node.children:
                go(c, d + 1)

    go(tree.root, 0)
    return masses


def tree_barycenter_check(tree: LaminateTree) -> Scalar:
    """Residual |root - barycenter(flatten)|_inf (0 for valid trees)."""
    return (barycenter(flatten(tree)) - tree.root.point.scale(tree.root.weight)).norm_inf()
