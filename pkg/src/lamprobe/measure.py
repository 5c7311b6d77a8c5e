"""Discrete matrix-valued probability measures.

Atom points are either :class:`~lamprobe.matcore.Matrix` values or chart
coordinates (any object exposing the same tiny protocol: ``+``/``-``,
``scale``, ``entries``, ``norm_inf``, ``is_exact``, ``sort_key``).  Measures
are immutable after construction; coincident atoms are merged on the way in
because row projections legitimately collide atoms.

The transport distance between two measures is a genuine finite-support
optimal-transport cost with ground metric ``|.|_inf`` between atom points.
It is solved by an exact rational transportation simplex (float inputs are
converted to exact binary fractions first), so results are deterministic and
byte-stable across platforms, and exact when the inputs are exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence

from .matcore import Scalar, is_exact_scalar

MERGE_TOL = 1e-10
MASS_TOL = 1e-12


class MeasureError(ValueError):
    pass


class Atom(NamedTuple):
    point: object
    weight: Scalar


def _points_compatible(p, q) -> bool:
    sp = getattr(p, "shape", None)
    sq = getattr(q, "shape", None)
    return type(p) is type(q) and sp == sq


class DiscreteMeasure:
    """Finite list of (point, positive weight) with weights summing to 1."""

    __slots__ = ("atoms",)

    def __init__(self, atoms: Iterable[Atom | tuple], merge_tol: float = MERGE_TOL):
        items = [Atom(p, w) for p, w in atoms]
        if not items:
            raise MeasureError("measure needs at least one atom")
        first = items[0].point
        for a in items:
            if not _points_compatible(first, a.point):
                raise MeasureError("atoms have mismatched point types/shapes")
            if not a.weight > 0:
                raise MeasureError(f"atom weight {a.weight!r} is not positive")
        items = _merge_atoms(items, merge_tol)
        total = sum(a.weight for a in items)
        if is_exact_scalar(total):
            if total != 1:
                raise MeasureError(f"weights sum to {total}, not 1")
        elif abs(total - 1) > MASS_TOL:
            raise MeasureError(f"weights sum to {total!r}, not 1")
        items.sort(key=lambda a: a.point.sort_key())
        self.atoms = tuple(items)

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __eq__(self, other) -> bool:
        return isinstance(other, DiscreteMeasure) and self.atoms == other.atoms

    def __repr__(self) -> str:
        return f"DiscreteMeasure({len(self.atoms)} atoms)"

    def is_exact(self) -> bool:
        return all(a.point.is_exact() and is_exact_scalar(a.weight)
                   for a in self.atoms)

    def points(self) -> list:
        return [a.point for a in self.atoms]

    def weights(self) -> list[Scalar]:
        return [a.weight for a in self.atoms]

    def as_float(self) -> "DiscreteMeasure":
        return DiscreteMeasure(
            [Atom(a.point.as_float(), float(a.weight)) for a in self.atoms])

    def map_points(self, fn: Callable) -> "DiscreteMeasure":
        return DiscreteMeasure([Atom(fn(a.point), a.weight) for a in self.atoms])


def _merge_atoms(items: list[Atom], merge_tol: float) -> list[Atom]:
    merged: list[Atom] = []
    for a in items:
        for k, b in enumerate(merged):
            d = (a.point - b.point).norm_inf()
            coincident = (d == 0) if (a.point.is_exact() and b.point.is_exact()) \
                else (float(d) <= merge_tol)
            if coincident:
                merged[k] = Atom(b.point, b.weight + a.weight)
                break
        else:
            merged.append(a)
    return merged


def barycenter(mu: DiscreteMeasure):
    """First moment: sum of weight * point."""
    acc = mu.atoms[0].point.scale(mu.atoms[0].weight)
    for a in mu.atoms[1:]:
        acc = acc + a.point.scale(a.weight)
    return acc


def integrate(mu: DiscreteMeasure, f: Callable) -> Scalar:
    """Pairing <f, mu> = sum of weight * f(point)."""
    return sum(a.weight * f(a.point) for a in mu.atoms)


def project_row(mu: DiscreteMeasure, l: int) -> DiscreteMeasure:
    """Measure of the l-th rows (1-based); coincident rows merge."""
    from .matcore import Matrix

    first = mu.atoms[0].point
    if not isinstance(first, Matrix):
        raise MeasureError("project_row needs matrix-valued atoms")
    if not 1 <= l <= first.m:
        raise MeasureError(f"row index {l} out of range 1..{first.m}")
    return DiscreteMeasure(
        [Atom(Matrix([a.point.rows[l - 1]]), a.weight) for a in mu.atoms])


def distance(mu1: DiscreteMeasure, mu2: DiscreteMeasure) -> Scalar:
    """Optimal-transport cost between the two measures.

    Returns a Fraction when both measures are exact, else a float.  The
    optimum itself is always computed in exact arithmetic.
    """
    if not _points_compatible(mu1.atoms[0].point, mu2.atoms[0].point):
        raise MeasureError("measures live on different point spaces")
    exact = mu1.is_exact() and mu2.is_exact()
    supply = _exact_weights(mu1)
    demand = _exact_weights(mu2)
    cost = [[Fraction((p - q).norm_inf()) for q in mu2.points()]
            for p in mu1.points()]
    value = _transport(supply, demand, cost)
    return value if exact else float(value)


def _exact_weights(mu: DiscreteMeasure) -> list[Fraction]:
    ws = [Fraction(a.weight) for a in mu.atoms]
    total = sum(ws)
    return [w / total for w in ws]


# ----------------------------------------------------------------------
# transportation simplex (exact)
# ----------------------------------------------------------------------

def _transport(supply: Sequence[Fraction], demand: Sequence[Fraction],
               cost: Sequence[Sequence[Fraction]]) -> Fraction:
    """Min-cost transportation by the MODI method with Bland-style pivots."""
    m, n = len(supply), len(demand)
    flow: dict[tuple[int, int], Fraction] = {}

    # northwest-corner start: m + n - 1 basic cells forming a spanning tree
    a = list(supply)
    b = list(demand)
    i = j = 0
    while True:
        q = min(a[i], b[j])
        flow[(i, j)] = q
        a[i] -= q
        b[j] -= q
        if i == m - 1 and j == n - 1:
            break
        if a[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1

    while True:
        u, v = _duals(flow, cost, m, n)
        entering = None
        for ci in range(m):
            for cj in range(n):
                if (ci, cj) not in flow and cost[ci][cj] - u[ci] - v[cj] < 0:
                    entering = (ci, cj)
                    break
            if entering:
                break
        if entering is None:
            return sum(cost[ci][cj] * q for (ci, cj), q in flow.items())
        cycle = _find_cycle(flow, entering)
        minus = cycle[1::2]
        theta = min(flow[c] for c in minus)
        leaving = min(c for c in minus if flow[c] == theta)
        for k, c in enumerate(cycle):
            if k % 2 == 0:
                flow[c] = flow.get(c, Fraction(0)) + theta
            else:
                flow[c] -= theta
        del flow[leaving]


def _duals(flow, cost, m: int, n: int):
    u: list = [None] * m
    v: list = [None] * n
    u[0] = Fraction(0)
    rows_of_col: dict[int, list[int]] = {}
    cols_of_row: dict[int, list[int]] = {}
    for (i, j) in flow:
        cols_of_row.setdefault(i, []).append(j)
        rows_of_col.setdefault(j, []).append(i)
    stack = [("r", 0)]
    while stack:
        kind, k = stack.pop()
        if kind == "r":
            for j in cols_of_row.get(k, ()):
                if v[j] is None:
                    v[j] = cost[k][j] - u[k]
                    stack.append(("c", j))
        else:
            for i in rows_of_col.get(k, ()):
                if u[i] is None:
                    u[i] = cost[i][k] - v[k]
                    stack.append(("r", i))
    return u, v


def _find_cycle(flow, entering) -> list[tuple[int, int]]:
    """Alternating cycle in the basis tree plus the entering cell.

    Returned as cells starting with the entering cell; even positions gain
    flow, odd positions lose it.
    """
    i0, j0 = entering
    cols_of_row: dict[int, list[int]] = {}
    rows_of_col: dict[int, list[int]] = {}
    for (i, j) in flow:
        cols_of_row.setdefault(i, []).append(j)
        rows_of_col.setdefault(j, []).append(i)
    # path in the bipartite basis graph from row i0 to column j0
    parent: dict[tuple[str, int], tuple[str, int] | None] = {("r", i0): None}
    stack = [("r", i0)]
    while stack:
        node = stack.pop()
        kind, k = node
        if kind == "r":
            for j in sorted(cols_of_row.get(k, ())):
                nxt = ("c", j)
                if nxt not in parent:
                    parent[nxt] = node
                    stack.append(nxt)
        else:
            for i in sorted(rows_of_col.get(k, ())):
                nxt = ("r", i)
                if nxt not in parent:
                    parent[nxt] = node
                    stack.append(nxt)
    node = ("c", j0)
    path = [node]
    while parent[node] is not None:
        node = parent[node]
        path.append(node)
    path.reverse()  # row i0 ... column j0, alternating kinds
    cells = [entering]
    for k in range(len(path) - 1):
        x, y = path[k], path[k + 1]
        cell = (x[1], y[1]) if x[0] == "r" else (y[1], x[1])
        cells.append(cell)
    return cells
