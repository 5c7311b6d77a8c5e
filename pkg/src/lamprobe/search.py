"""Bounded-evidence lamination search.

Searching for a decomposition tree runs backwards: start from the target
atoms and repeatedly merge pairs whose difference lies in the rank-one cone
(each merge is a reversed split, with the merged point fixed by mass
conservation, so the continuous split parameters never need discretizing).
Pure merges cost nothing; when they dead-end, a pair can be aligned first
by translating the lighter subtree onto a cone line through the other atom
(translating a subtree preserves every split inside it), at a transport
cost of subtree mass times displacement.  Best-first search over
accumulated cost therefore explores the whole zero-cost space before any
paid move, which is what justifies the ``infeasible-at-depth`` verdict.

Everything is deterministic: move generation is sorted by (cost, canonical
direction, state key) and the final defect is recomputed by the exact
transport LP.

The search decides nothing beyond its depth/dictionary budget; it only
produces bounded evidence.  Trees that revisit a support point on two
branches are outside the pure-merge space and are reached (if at all) via
paid moves only.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .chart import Chart, Cone, Coords, normal_angle, normal_of
from .laminate import LaminateTree, SplitNode, flatten
from .matcore import Scalar
from .measure import Atom, DiscreteMeasure, barycenter, distance
from .separator import (Box, Certificate, SeparatorConfig, monomials_upto,
                        separate)


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    max_depth: int = 8
    w_min: float = 0.01          # relative split weights confined to
    w_max: float = 0.99          # [w_min, w_max] (proper-split bounds)
    tol: float = 1e-9
    seed: int = 0
    max_nodes: int = 5000        # expansion cap
    per_pair: int = 3            # paid-move candidates kept per atom pair
    max_candidates: int = 16     # completed trees ranked by exact defect
    dive_every: int = 25         # greedy completion cadence in the paid phase
    dict_size: int = 65          # c-grid size for the move dictionary
    c_lo: float = 1 / 16
    c_hi: float = 16.0
    dictionary: Optional[tuple[Coords, ...]] = None
    normal_targets: Optional[tuple[tuple[float, float], ...]] = None
    normal_max_angle: float = 0.2

    def __post_init__(self):
        if not 0 < self.w_min < self.w_max < 1:
            raise SearchError("need 0 < w_min < w_max < 1")


@dataclass
class SearchResult:
    tree: LaminateTree
    defect: float
    nodes: int
    status: str                  # exact | approximate | infeasible-at-depth
    directions: list[Coords]
    weights: list[float]
    meta: dict = field(default_factory=dict)


# -- internal node representation (materialized lazily) -----------------

def _leaf(pt: tuple, w: float):
    return ("leaf", pt, w)


def _shift(node, delta: tuple):
    if all(abs(d) < 1e-300 for d in delta):
        return node
    if node[0] == "shift":
        return ("shift", tuple(a + b for a, b in zip(node[1], delta)), node[2])
    return ("shift", delta, node)


def _materialize(node, delta=(0.0, 0.0, 0.0)) -> SplitNode:
    kind = node[0]
    if kind == "shift":
        return _materialize(node[2], tuple(a + b for a, b in zip(delta, node[1])))
    if kind == "leaf":
        _, pt, w = node
        return SplitNode(Coords(*(a + b for a, b in zip(pt, delta))), w)
    _, pt, w, left, right = node
    return SplitNode(Coords(*(a + b for a, b in zip(pt, delta))), w,
                     (_materialize(left, delta), _materialize(right, delta)))


def _atom_key(pt: tuple, w: float, depth: int) -> tuple:
    return tuple(round(v, 12) for v in pt) + (round(w, 12), depth)


def _misalignment(atoms, b: tuple) -> float:
    m = [0.0, 0.0, 0.0]
    for pt, w, _, _ in atoms:
        for k in range(3):
            m[k] += w * pt[k]
    return max(abs(m[k] - b[k]) for k in range(3))


def _state_key(atoms) -> tuple:
    return tuple(sorted(_atom_key(pt, w, dep) for pt, w, dep, _ in atoms))


# -- move dictionary -----------------------------------------------------

def _build_dictionary(cone: Cone, chart: Chart, cfg: SearchConfig):
    if cfg.dictionary is not None:
        raw = [d.as_float() for d in cfg.dictionary]
    else:
        raw = [d.as_float()
               for d in cone.sample_directions(cfg.c_lo, cfg.c_hi, cfg.dict_size)]
    dirs = []
    for d in raw:
        n = d.norm2()
        if n == 0:
            continue
        u = d.scale(1.0 / n)
        if not _normal_ok(u, chart, cfg):
            continue
        dirs.append(u.canonical())
    dirs.sort(key=lambda d: d.sort_key())
    seen = set()
    out = []
    for d in dirs:
        key = tuple(round(v, 12) for v in d.entries())
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out


def _normal_ok(direction: Coords, chart: Chart, cfg: SearchConfig) -> bool:
    if cfg.normal_targets is None:
        return True
    if chart.is_degenerate():
        raise SearchError("normal filtering needs a non-degenerate chart")
    try:
        n = normal_of(direction, chart)
    except Exception:
        return False
    return any(normal_angle(n, t) <= cfg.normal_max_angle
               for t in cfg.normal_targets)


# -- aligned-merge geometry ----------------------------------------------

def _chebyshev_fits(v: np.ndarray, dirs: np.ndarray):
    """For each direction row d: min over s of |v - s d|_inf and argmin.

    The minimizer of a maximum of absolute affine functions sits at a
    crossing of two terms or at a term's zero; all such s are candidates.
    """
    k = dirs.shape[0]
    cands = [np.zeros(k)]
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(3):
            c = v[i] / dirs[:, i]
            cands.append(np.where(np.isfinite(c), c, 0.0))
        for i, j in ((0, 1), (0, 2), (1, 2)):
            c = (v[i] - v[j]) / (dirs[:, i] - dirs[:, j])
            cands.append(np.where(np.isfinite(c), c, 0.0))
            c = (v[i] + v[j]) / (dirs[:, i] + dirs[:, j])
            cands.append(np.where(np.isfinite(c), c, 0.0))
    s = np.stack(cands, axis=1)                       # (k, ncand)
    resid = np.abs(v[None, None, :] - s[:, :, None] * dirs[:, None, :])
    phi = resid.max(axis=2)                           # (k, ncand)
    best = np.argmin(phi, axis=1)
    rows = np.arange(k)
    return phi[rows, best], s[rows, best]


# -- the search proper ----------------------------------------------------

def search(target: DiscreteMeasure, chart: Chart, cone: Cone,
           cfg: Optional[SearchConfig] = None) -> SearchResult:
    """Best-defect decomposition tree for the target within the budget.

    Status ``exact`` means a tree with defect <= tol was found;
    ``infeasible-at-depth`` means the pure-merge space was exhausted
    without one (no coincidence-free laminate on the target support exists
    within this depth for this cone), and the returned tree is the best
    paid completion; ``approximate`` means the budget ran out first.
    """
    cfg = cfg or SearchConfig()
    coords_target = _as_coords_measure(target, chart)
    floated = coords_target.as_float()
    dictionary = _build_dictionary(cone, chart, cfg)
    dir_mat = np.array([[float(v) for v in d.entries()] for d in dictionary]) \
        if dictionary else np.zeros((0, 3))

    bary = barycenter(floated)
    b = tuple(float(v) for v in bary.entries())
    atoms0 = tuple(
        (tuple(float(v) for v in a.point.entries()), float(a.weight), 0,
         _leaf(tuple(float(v) for v in a.point.entries()), float(a.weight)))
        for a in floated.atoms)

    if not dictionary:
        raise SearchError("empty direction dictionary")

    trivial = LaminateTree(SplitNode(Coords(*b), 1.0))
    trivial_defect = float(distance(flatten(trivial), floated))
    incumbent_cost = float("inf")
    candidates: list[tuple[float, int, object]] = []  # (cost, seq, node)
    seq = itertools.count(1)

    seeded = _greedy_rollout(atoms0, b, cone, chart, cfg, dictionary, dir_mat)
    if seeded is not None:
        candidates.append((seeded[0], next(seq), seeded[1]))
        incumbent_cost = seeded[0]

    # A* on accumulated translation cost with the admissible heuristic
    # h = |moment(state) - b|_inf: merges preserve the total first moment
    # and a translation of mass w by delta moves it by at most w |delta|,
    # so closing the misalignment costs at least h.  Pure-merge states
    # keep h = 0, hence still pop before any paid state.
    heap = [(0.0, 0, 0.0, atoms0)]
    visited: dict = {}
    nodes = 0
    cap_hit = False
    zero_done = False
    found_exact = False

    while heap:
        f, _, cost, atoms = heapq.heappop(heap)
        if cost > cfg.tol:
            # cost-0 states all have f ~ 0 and pop first, so the pure-merge
            # space is exhausted once a paid state surfaces
            zero_done = True
        if f >= incumbent_cost - 1e-15 and candidates:
            break
        key = _state_key(atoms)
        prev = visited.get(key)
        if prev is not None and prev <= cost + 1e-15:
            continue
        visited[key] = cost
        if len(atoms) == 1:
            pt, w, dep, node = atoms[0]
            delta = tuple(bb - pp for bb, pp in zip(b, pt))
            extra = max(abs(d) for d in delta)
            total = cost + (extra if extra > cfg.tol else 0.0)
            if total < incumbent_cost:
                root = _shift(node, delta) if extra > cfg.tol else node
                candidates.append((total, next(seq), root))
                candidates.sort(key=lambda c: (c[0], c[1]))
                del candidates[cfg.max_candidates:]
                incumbent_cost = total
                if total <= cfg.tol:
                    found_exact = True
                    break
            continue
        if nodes >= cfg.max_nodes:
            cap_hit = True
            break
        nodes += 1
        if cost > cfg.tol and (len(atoms) <= 3 or nodes % cfg.dive_every == 0):
            dive = _greedy_rollout(atoms, b, cone, chart, cfg, dictionary,
                                   dir_mat, cost)
            if dive is not None and dive[0] < incumbent_cost:
                candidates.append((dive[0], next(seq), dive[1]))
                candidates.sort(key=lambda c: (c[0], c[1]))
                del candidates[cfg.max_candidates:]
                incumbent_cost = dive[0]
        for child_cost, child in _moves(atoms, cost, cone, chart, cfg,
                                        dictionary, dir_mat):
            child_f = child_cost + _misalignment(child, b)
            if child_f < incumbent_cost - 1e-15:
                heapq.heappush(heap, (child_f, next(seq), child_cost, child))

    if not heap and not cap_hit:
        zero_done = True

    best_tree, best_defect = trivial, trivial_defect
    scored = []
    for total, sq, node in candidates:
        tree = LaminateTree(_materialize(node))
        defect = float(distance(flatten(tree), floated))
        scored.append((defect, total, sq, tree))
    if scored:
        scored.sort(key=lambda r: (r[0], r[1], r[2]))
        if scored[0][0] <= best_defect:
            best_defect, _, _, best_tree = scored[0]

    # zero_done is decided the moment the first paid state pops, so a node
    # cap hit later (in the paid phase) does not weaken the verdict
    if best_defect <= cfg.tol:
        status = "exact"
    elif zero_done:
        status = "infeasible-at-depth"
    else:
        status = "approximate"

    directions, weights = tree_split_profile(best_tree)
    return SearchResult(
        tree=best_tree, defect=best_defect, nodes=nodes, status=status,
        directions=directions, weights=weights,
        meta={"trivial_defect": trivial_defect, "cap_hit": cap_hit,
              "zero_space_exhausted": zero_done,
              "completions": len(candidates), "found_exact": found_exact,
              "dictionary_size": len(dictionary)})


def _as_coords_measure(target: DiscreteMeasure, chart: Chart) -> DiscreteMeasure:
    first = target.atoms[0].point
    if isinstance(first, Coords):
        return target
    return target.map_points(lambda m: chart.matrix_to_coords(m))


def _greedy_rollout(atoms, b, cone, chart, cfg, dictionary, dir_mat,
                    cost: float = 0.0):
    """Deterministic cheapest-move rollout to a full tree; used to seed and
    tighten the incumbent during the paid phase."""
    guard = 0
    while len(atoms) > 1:
        moves = _moves(atoms, cost, cone, chart, cfg, dictionary, dir_mat)
        if not moves:
            return None
        cost, atoms = moves[0]
        guard += 1
        if guard > 128:
            return None
    pt, w, dep, node = atoms[0]
    delta = tuple(bb - pp for bb, pp in zip(b, pt))
    extra = max(abs(d) for d in delta)
    if extra > cfg.tol:
        return (cost + extra, _shift(node, delta))
    return (cost, node)


def _moves(atoms, cost, cone, chart, cfg, dictionary, dir_mat):
    out = []
    n = len(atoms)
    for i in range(n):
        pi, wi, di, ni = atoms[i]
        for j in range(i + 1, n):
            pj, wj, dj, nj = atoms[j]
            lam = wi / (wi + wj)
            if not (cfg.w_min <= lam <= cfg.w_max
                    and cfg.w_min <= 1 - lam <= cfg.w_max):
                continue
            depth = max(di, dj) + 1
            if depth > cfg.max_depth:
                continue
            diff = tuple(a - b for a, b in zip(pj, pi))
            scale = max(abs(v) for v in diff)
            if scale > 1e-12:
                d = Coords(*diff)
                if cone.contains(d, cfg.tol) and _normal_ok(d, chart, cfg):
                    out.append((cost, _merged(atoms, i, j, pj, depth)))
            li, hj = (i, j) if (wi, i) <= (wj, j) else (j, i)
            pl, wl = atoms[li][0], atoms[li][1]
            ph = atoms[hj][0]
            v = np.array([a - b for a, b in zip(pl, ph)])
            if dir_mat.shape[0]:
                # paid moves: translate the lighter subtree onto a cone
                # line through the heavier atom
                phis, ss = _chebyshev_fits(v, dir_mat)
                order = np.argsort(phis, kind="stable")[:cfg.per_pair]
                for k in order:
                    delta_inf = float(phis[k])
                    if delta_inf <= 1e-12:
                        continue
                    newpl = tuple(ph[m] + float(ss[k]) * dir_mat[k][m]
                                  for m in range(3))
                    out.append((cost + wl * delta_inf,
                                _merged(atoms, li, hj, None, depth,
                                        moved_point=newpl)))
            for t, k in _cone_snaps(cone, v):
                snapped = tuple(v[m] + (t if m == k else 0.0) for m in range(3))
                d = Coords(*snapped)
                if d.is_zero() or not cone.contains(d, cfg.tol) \
                        or not _normal_ok(d, chart, cfg):
                    continue
                newpl = tuple(ph[m] + snapped[m] for m in range(3))
                out.append((cost + wl * abs(t),
                            _merged(atoms, li, hj, None, depth,
                                    moved_point=newpl)))
    out.sort(key=lambda mc: (mc[0], _state_key(mc[1])))
    return out


def _cone_snaps(cone: Cone, v: np.ndarray) -> list[tuple[float, int]]:
    """Minimal single-coordinate translations putting v on a quadric cone.

    The quadric has no square terms, so its restriction to each coordinate
    is affine and the snap offsets come out in closed form (these are
    exactly the perturbations the explicit tau-laminate uses)."""
    if cone.kind != "quadric":
        return []
    t = float(cone.tau)
    x, y, z = (float(c) for c in v)
    q = (1 + 2 * t) * x * y + t * x * z + t * y * z
    if abs(q) < 1e-15:
        return []
    grads = ((1 + 2 * t) * y + t * z, (1 + 2 * t) * x + t * z, t * x + t * y)
    out = []
    for k, g in enumerate(grads):
        if abs(g) > 1e-12:
            out.append((-q / g, k))
    out.sort(key=lambda r: (abs(r[0]), r[1]))
    return out


def _merged(atoms, i, j, _pj, depth, moved_point=None):
    pi, wi, di, ni = atoms[i]
    pj, wj, dj, nj = atoms[j]
    if moved_point is not None:
        delta = tuple(a - b for a, b in zip(moved_point, pi))
        ni = _shift(ni, delta)
        pi = moved_point
    w = wi + wj
    point = tuple((wi * a + wj * b) / w for a, b in zip(pi, pj))
    node = ("split", point, w, ni, nj)
    rest = tuple(a for k, a in enumerate(atoms) if k not in (i, j))
    return rest + ((point, w, depth, node),)


def tree_split_profile(tree: LaminateTree):
    """Canonical (direction, relative weight) per split, pre-order.

    The weight reported is the mass fraction of the child lying on the
    positive side of the canonical direction."""
    directions: list[Coords] = []
    weights: list[float] = []
    for _, node in tree.nodes():
        if node.is_leaf:
            continue
        left, right = node.children
        diff = right.point - left.point
        if diff.is_zero():
            continue
        can = diff.as_float().canonical()
        aligned = sum(float(a) * float(bb)
                      for a, bb in zip(diff.entries(), can.entries())) > 0
        plus = right if aligned else left
        directions.append(can)
        weights.append(float(plus.weight) / float(node.weight))
    return directions, weights


# ----------------------------------------------------------------------
# weight polytope: which leaf weights are reachable on a fixed support
# ----------------------------------------------------------------------

@dataclass
class FeasibilityResult:
    feasible: bool
    tree: Optional[LaminateTree] = None
    reason: str = ""


@dataclass
class InfeasibilityCertificate:
    certificate: Certificate
    lipschitz_bound: float
    defect_lower_bound: float


class LaminationPolytope:
    """Reachable leaf-weight vectors on a fixed support, by exhaustive
    recursion over the partitions of the support set.

    For a query weight vector all conditional barycenters are determined,
    so each candidate skeleton is checked exactly (rational arithmetic on
    rational queries).  The check is complete over laminates whose leaves
    are distinct support atoms; an LP separator certificate provides
    support-independent infeasibility evidence with a quantitative
    transport-defect lower bound.
    """

    MAX_SUPPORT = 12

    def __init__(self, support: Sequence[Coords], cone: Cone, depth: int):
        support = tuple(support)
        if len(support) > self.MAX_SUPPORT:
            raise SearchError(
                f"support of {len(support)} exceeds cap {self.MAX_SUPPORT}")
        if depth < 1 or depth > 16:
            raise SearchError("depth must be in 1..16")
        self.support = support
        self.cone = cone
        self.depth = depth

    def feasible(self, weights: Sequence[Scalar], tol: float = 1e-9) -> FeasibilityResult:
        ws = list(weights)
        if len(ws) != len(self.support):
            raise SearchError("one weight per support point required")
        if any(w < 0 for w in ws):
            return FeasibilityResult(False, reason="negative weight")
        total = sum(ws)
        exact = all(not isinstance(w, float) for w in ws) \
            and all(p.is_exact() for p in self.support)
        if (total != 1) if exact else abs(float(total) - 1) > 1e-9:
            return FeasibilityResult(False, reason="weights do not sum to 1")
        idx = [i for i, w in enumerate(ws) if w > 0]
        bary = _conditional_barycenter(self.support, ws, idx)
        if (not bary.is_zero()) if exact else float(bary.norm_inf()) > tol:
            return FeasibilityResult(False, reason="barycenter is not zero")

        moment_cache: dict = {}
        best_split: dict = {}
        need_cache: dict = {}
        contains_tol = 0.0 if exact else tol

        def need(subset: frozenset) -> int:
            if subset in need_cache:
                return need_cache[subset]
            if len(subset) == 1:
                need_cache[subset] = 0
                return 0
            members = sorted(subset)
            pivot, rest = members[0], members[1:]
            best = len(self.support) + 1
            choice = None
            for mask in range(1 << len(rest)):
                left = frozenset([pivot] + [rest[k] for k in range(len(rest))
                                            if mask >> k & 1])
                if len(left) == len(members):
                    continue
                right = subset - left
                bl = _conditional_barycenter(self.support, ws, left, moment_cache)
                br = _conditional_barycenter(self.support, ws, right, moment_cache)
                diff = br - bl
                if diff.is_zero():
                    continue
                if not self.cone.contains(diff, contains_tol or 1e-30):
                    continue
                d = 1 + max(need(left), need(right))
                if d < best:
                    best = d
                    choice = (left, right)
            need_cache[subset] = best
            if choice:
                best_split[subset] = choice
            return best

        root_set = frozenset(idx)
        if need(root_set) > self.depth:
            return FeasibilityResult(False, reason="no skeleton within depth")

        def build(subset: frozenset) -> SplitNode:
            members = sorted(subset)
            w = sum(ws[i] for i in members)
            point = _conditional_barycenter(self.support, ws, subset, moment_cache)
            if len(members) == 1:
                return SplitNode(point, w)
            left, right = best_split[subset]
            return SplitNode(point, w, (build(left), build(right)))

        return FeasibilityResult(True, tree=LaminateTree(build(root_set)))

    def certify_infeasible(self, weights: Sequence[Scalar], degree: int = 3,
                           cfg: Optional[SeparatorConfig] = None
                           ) -> InfeasibilityCertificate:
        """Separator-based lower bound on the transport distance from the
        query to any laminate of this cone supported in the hull.

        If f is cone-convex on the hull box and gap = f(b) - <f, w> > 0,
        every laminate w' has <f, w'> >= f(b), so the pairing difference is
        at least gap; dividing by a Lipschitz bound of f (the sup of
        |grad f|_1, dual to the inf ground metric) bounds the transport
        distance from below."""
        mu = DiscreteMeasure(
            [(p, w) for p, w in zip(self.support, weights) if w > 0])
        cert = separate(mu, self.cone, degree=degree, cfg=cfg)
        lip = _lipschitz_bound(cert.f, Box.around(mu.points(), 0.0))
        lb = float(cert.gap) / lip if (cert.status == "verified" and lip > 0) else 0.0
        return InfeasibilityCertificate(
            certificate=cert, lipschitz_bound=lip, defect_lower_bound=lb)


def weight_polytope(support: Sequence[Coords], cone: Cone,
                    depth: int) -> LaminationPolytope:
    return LaminationPolytope(support, cone, depth)


def _conditional_barycenter(support, ws, subset, cache=None) -> Coords:
    key = frozenset(subset)
    if cache is not None and key in cache:
        return cache[key]
    members = sorted(key)
    w = sum(ws[i] for i in members)
    acc = support[members[0]].scale(ws[members[0]])
    for i in members[1:]:
        acc = acc + support[i].scale(ws[i])
    out = acc.scale((Fraction(1, 1) if not isinstance(w, float) else 1.0) / w)
    if cache is not None:
        cache[key] = out
    return out


def _lipschitz_bound(f, box: Box) -> float:
    bound = 0.0
    for j in range(3):
        dj = f.derivative(j)
        part = 0.0
        for e, c in dj.coeffs.items():
            term = abs(float(c))
            for k, exp in enumerate(e):
                term *= max(abs(box.lo[k]), abs(box.hi[k])) ** exp
            part += term
        bound += part
    return bound


# ----------------------------------------------------------------------
# tau sweeps and proper directions
# ----------------------------------------------------------------------

@dataclass
class SweepRow:
    tau: float
    result: Optional[SearchResult] = None
    error: str = ""
    chart: Optional[Chart] = None


def sweep(target_builder: Callable, taus: Sequence[Scalar],
          chart_builder: Callable, cone_builder: Callable,
          cfg: Optional[SearchConfig] = None) -> list[SweepRow]:
    """One search per tau; per-row failures are recorded, not raised."""
    taus = list(taus)
    if any(float(t) <= 0 for t in taus):
        raise SearchError("sweep taus must be positive")
    if any(float(a) < float(b) for a, b in zip(taus, taus[1:])):
        raise SearchError("sweep taus must be descending")
    rows = []
    for tau in taus:
        try:
            chart = chart_builder(tau)
            result = search(target_builder(tau), chart, cone_builder(tau), cfg)
            rows.append(SweepRow(tau=float(tau), result=result, chart=chart))
        except Exception as exc:  # per-row isolation
            rows.append(SweepRow(tau=float(tau), error=f"{type(exc).__name__}: {exc}"))
    return rows


def proper_directions(rows: Sequence[SweepRow], w_min: float = 0.05,
                      w_max: float = 0.95, angle_tol: float = 0.2,
                      min_rows: int = 3) -> list[tuple[tuple[float, float], float]]:
    """Split normals whose relative weights stay inside [w_min, w_max]
    across the sweep, with their tau -> 0 extrapolated limits.

    Relative weights are folded to min(lam, 1-lam); splits are matched
    across rows by normal proximity against the smallest-tau row."""
    usable = [r for r in rows if r.result is not None and r.chart is not None]
    if len(usable) < min_rows:
        raise SearchError(f"need at least {min_rows} sweep rows")
    profiles = []
    for r in usable:
        splits = []
        for d, lam in zip(r.result.directions, r.result.weights):
            try:
                n = normal_of(d, r.chart)
            except Exception:
                continue
            splits.append((n, min(lam, 1.0 - lam)))
        profiles.append((r.tau, splits))
    anchor_tau, anchor_splits = profiles[-1]
    out = []
    for n0, lam0 in anchor_splits:
        series = [(anchor_tau, n0, lam0)]
        for tau, splits in profiles[:-1]:
            match = None
            for n, lam in splits:
                ang = normal_angle(n, n0)
                if ang <= angle_tol:
                    score = (ang, abs(lam - lam0))
                    if match is None or score < match[0]:
                        match = (score, n, lam)
            if match is not None:
                series.append((tau, match[1], match[2]))
        if len(series) < min_rows:
            continue
        if not all(w_min <= lam <= w_max for _, _, lam in series):
            continue
        taus = np.array([s[0] for s in series])
        lam_fit = float(np.polyfit(taus, [s[2] for s in series], 1)[1]) \
            if len(series) > 1 else lam0
        nx = float(np.polyfit(taus, [s[1][0] for s in series], 1)[1])
        ny = float(np.polyfit(taus, [s[1][1] for s in series], 1)[1])
        norm = float(np.hypot(nx, ny))
        if norm == 0:
            continue
        n_lim = (nx / norm, ny / norm)
        if n_lim[0] < -1e-12 or (abs(n_lim[0]) <= 1e-12 and n_lim[1] < 0):
            n_lim = (-n_lim[0], -n_lim[1])
        out.append((n_lim, min(max(lam_fit, 0.0), 1.0)))
    dedup = {}
    for n, lam in out:
        key = (round(n[0], 4), round(n[1], 4), round(lam, 4))
        dedup.setdefault(key, (n, lam))
    return sorted(dedup.values(), key=lambda r: (r[0], r[1]))
