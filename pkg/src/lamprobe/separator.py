"""Search for cone-convex polynomial separators.

A separator against a target measure (barycenter 0, chart coordinates) is a
polynomial f, convex along every cone direction inside a box around the
support, whose Jensen gap f(0) - <f, target> is strictly positive.  A
dense-verified separator certifies that the target is not a laminate for
that cone at any depth.

The search is an LP over the polynomial coefficients under the
normalization |coeff|_inf <= 1: maximize the gap subject to sampled
segment-convexity constraints, iterating constraint generation (each round
adds the worst violated lines found by an exact per-line minimization of
the directional second derivative, which for degree <= 4 is a quadratic in
the line parameter).  A certificate is only called verified after an
independent dense scan, never on the LP's own samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .chart import Cone, Coords, cone_family
from .matcore import Scalar, is_exact_scalar
from .measure import DiscreteMeasure


class SeparatorError(ValueError):
    pass


# ----------------------------------------------------------------------
# polynomials on chart coordinates
# ----------------------------------------------------------------------

def monomials_upto(degree: int, nvars: int = 3,
                   min_degree: int = 0) -> list[tuple[int, ...]]:
    out = [e for e in iproduct(range(degree + 1), repeat=nvars)
           if min_degree <= sum(e) <= degree]
    return sorted(out, key=lambda e: (sum(e), e))


class PolyFunc:
    """Polynomial with a sparse exponent -> coefficient map.

    Coefficients may be exact; evaluation is exact on exact input, which is
    what lets a certificate's gap be recomputed in rational arithmetic.
    """

    __slots__ = ("nvars", "coeffs")

    def __init__(self, coeffs: dict, nvars: int = 3):
        clean = {}
        for e, c in coeffs.items():
            e = tuple(int(k) for k in e)
            if len(e) != nvars:
                raise SeparatorError(f"exponent {e} has wrong arity")
            if c != 0:
                clean[e] = clean.get(e, 0) + c
        self.nvars = nvars
        self.coeffs = clean

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def coeff_norm(self) -> float:
        return max((abs(float(c)) for c in self.coeffs.values()), default=0.0)

    def is_exact(self) -> bool:
        return all(is_exact_scalar(c) for c in self.coeffs.values())

    def scale(self, s: Scalar) -> "PolyFunc":
        return PolyFunc({e: s * c for e, c in self.coeffs.items()}, self.nvars)

    def __call__(self, point) -> Scalar:
        vals = point.entries() if hasattr(point, "entries") else tuple(point)
        total = 0
        for e, c in self.coeffs.items():
            term = c
            for v, k in zip(vals, e):
                for _ in range(k):
                    term = term * v
            total = total + term
        return total

    def eval_array(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on an (n, nvars) float array."""
        out = np.zeros(pts.shape[0])
        for e, c in self.coeffs.items():
            term = np.full(pts.shape[0], float(c))
            for j, k in enumerate(e):
                if k:
                    term *= pts[:, j] ** k
            out += term
        return out

    def derivative(self, j: int) -> "PolyFunc":
        out = {}
        for e, c in self.coeffs.items():
            if e[j] == 0:
                continue
            ne = list(e)
            ne[j] -= 1
            out[tuple(ne)] = out.get(tuple(ne), 0) + c * e[j]
        return PolyFunc(out, self.nvars)

    def directional_derivative(self, d: Sequence[float]) -> "PolyFunc":
        out = PolyFunc({}, self.nvars)
        for j, dj in enumerate(d):
            if dj != 0:
                part = self.derivative(j).scale(dj)
                out = out + part
        return out

    def __add__(self, other: "PolyFunc") -> "PolyFunc":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return PolyFunc(out, self.nvars)

    def line_restriction(self, p: Sequence[Scalar],
                         d: Sequence[Scalar]) -> list[Scalar]:
        """Coefficients of t -> f(p + t d), lowest degree first."""
        deg = self.degree
        out = [0] * (deg + 1)
        for e, c in self.coeffs.items():
            poly = [c]
            for j, k in enumerate(e):
                for _ in range(k):
                    poly = _poly_mul_linear(poly, p[j], d[j])
            for i, v in enumerate(poly):
                out[i] = out[i] + v
        return out

    def second_derivative_on_line(self, p, d) -> tuple[Scalar, Scalar, Scalar]:
        """(C, B, A) with g''(t) = C + B t + A t^2 along t -> f(p + t d)."""
        g = self.line_restriction(p, d)
        g += [0] * (5 - len(g))
        return (2 * g[2], 6 * g[3], 12 * g[4])


def _poly_mul_linear(poly: list, a, b) -> list:
    """poly(t) * (a + b t)."""
    out = [0] * (len(poly) + 1)
    for i, c in enumerate(poly):
        out[i] = out[i] + c * a
        out[i + 1] = out[i + 1] + c * b
    return out


# ----------------------------------------------------------------------
# regions, line sampling
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    @staticmethod
    def around(points: Iterable[Coords], inflate: float = 0.1) -> "Box":
        pts = [[float(v) for v in p.entries()] for p in points]
        lo, hi = [], []
        spread = max(max(c) - min(c) for c in zip(*pts)) or 1.0
        for c in zip(*pts):
            a, b = min(c), max(c)
            center, half = 0.5 * (a + b), 0.5 * (b - a)
            half = max(half, 0.05 * spread)
            lo.append(center - (1 + inflate) * half)
            hi.append(center + (1 + inflate) * half)
        return Box(tuple(lo), tuple(hi))

    def contains(self, p: Sequence[float]) -> bool:
        return all(l - 1e-12 <= v <= h + 1e-12
                   for l, v, h in zip(self.lo, p, self.hi))


def _halton(n: int, skip: int = 20) -> np.ndarray:
    """Low-discrepancy points in [0,1)^3 (radical inverses base 2, 3, 5)."""
    def radical(i: int, base: int) -> float:
        f, r = 1.0, 0.0
        while i > 0:
            f /= base
            r += f * (i % base)
            i //= base
        return r

    return np.array([[radical(i, b) for b in (2, 3, 5)]
                     for i in range(skip, skip + n)])


def base_points(box: Box, count: int, extra: Iterable[Coords] = ()) -> np.ndarray:
    lo = np.array(box.lo)
    hi = np.array(box.hi)
    pts = [lo + (hi - lo) * u for u in _halton(count)]
    for p in extra:
        q = np.array([float(v) for v in p.entries()])
        pts.append(np.clip(q, lo, hi))
    return np.array(pts)


def cone_directions(cone: Cone, count: int = 65,
                    rng: Optional[np.random.Generator] = None,
                    random_extra: int = 0) -> list[Coords]:
    """Unit float directions sampling the cone (deterministic grid, plus
    optional seeded random parameters for quadric cones)."""
    dirs = [d.as_float() for d in cone.sample_directions(count=count)]
    if cone.kind == "quadric" and random_extra and rng is not None:
        for c in rng.standard_cauchy(random_extra):
            try:
                d1, d2 = cone_family(float(c), float(cone.tau))
            except Exception:
                continue
            dirs.extend((d1.as_float(), d2.as_float()))
    out = []
    seen = set()
    for d in dirs:
        n = d.norm2()
        if n == 0:
            continue
        u = d.scale(1.0 / n).canonical()
        key = tuple(round(v, 12) for v in u.as_float().entries())
        if key not in seen:
            seen.add(key)
            nn = u.as_float()
            out.append(nn.scale(1.0 / nn.norm2()))
    return out


# ----------------------------------------------------------------------
# directional convexity scan
# ----------------------------------------------------------------------

def _line_intervals(pts: np.ndarray, d: np.ndarray, box: Box):
    """Clip lines p + t d to the box; returns (t_lo, t_hi) arrays."""
    t_lo = np.full(pts.shape[0], -np.inf)
    t_hi = np.full(pts.shape[0], np.inf)
    for j in range(3):
        lo, hi = box.lo[j], box.hi[j]
        if abs(d[j]) < 1e-15:
            continue
        t1 = (lo - pts[:, j]) / d[j]
        t2 = (hi - pts[:, j]) / d[j]
        t_lo = np.maximum(t_lo, np.minimum(t1, t2))
        t_hi = np.minimum(t_hi, np.maximum(t1, t2))
    return t_lo, t_hi


def _direction_violations(f: PolyFunc, d: Coords, pts: np.ndarray, box: Box):
    """Exact per-line minimum of g'' over the clipped segment.

    Returns (min_values, argmin_t); g''(t) is the quadratic
    Q_d(p) + t grad(Q_d)(p).d + t^2 * (D_d^2 Q_d)/2 with Q_d = D_d^2 f.
    """
    dv = [float(v) for v in d.entries()]
    qd = f.directional_derivative(dv).directional_derivative(dv)
    c0 = qd.eval_array(pts)
    grads = [qd.derivative(j) for j in range(3)]
    c1 = np.zeros(pts.shape[0])
    for j in range(3):
        if dv[j] != 0:
            c1 += dv[j] * grads[j].eval_array(pts)
    curv = qd.directional_derivative(dv).directional_derivative(dv)
    c2 = 0.5 * float(curv(Coords(0.0, 0.0, 0.0)))
    t_lo, t_hi = _line_intervals(pts, np.array(dv), box)
    ok = t_lo <= t_hi
    t_lo = np.where(ok, t_lo, 0.0)
    t_hi = np.where(ok, t_hi, 0.0)

    def q(t):
        return c0 + c1 * t + c2 * t * t

    v_lo, v_hi = q(t_lo), q(t_hi)
    vals = np.minimum(v_lo, v_hi)
    args = np.where(v_lo <= v_hi, t_lo, t_hi)
    if c2 > 0:
        tv = np.clip(-c1 / (2 * c2), t_lo, t_hi)
        v_v = q(tv)
        args = np.where(v_v < vals, tv, args)
        vals = np.minimum(vals, v_v)
    return vals, args


def convexity_violation(f: PolyFunc, cone: Cone, region: Box,
                        samples: int = 10000, seed: int = 0,
                        extra_directions: Iterable[Coords] = (),
                        extra_points: Iterable[Coords] = ()) -> float:
    """Worst negative part of the directional second derivative over the
    sampled lines (0 means no violation found)."""
    worst, _ = violation_scan(f, cone, region, samples, seed,
                              extra_directions=extra_directions,
                              extra_points=extra_points, top=1)
    return worst


def worker_count() -> int:
    """Thread count for the violation scans, from LAMPROBE_THREADS
    (default: available parallelism)."""
    import os
    raw = os.environ.get("LAMPROBE_THREADS", "")
    if raw.strip():
        try:
            return max(int(raw), 1)
        except ValueError:
            pass
    return os.cpu_count() or 1


def violation_scan(f: PolyFunc, cone: Cone, region: Box, samples: int,
                   seed: int, extra_directions: Iterable[Coords] = (),
                   extra_points: Iterable[Coords] = (), top: int = 32):
    """Returns (worst_violation, worst_lines) where each line is
    (violation, base point ndarray, direction Coords, argmin t).

    Directions may be scanned by a thread pool; the reduction is a
    maximum over per-direction results collected in direction order, so
    the outcome does not depend on scheduling."""
    rng = np.random.default_rng(seed)
    dirs = cone_directions(cone, count=65, rng=rng,
                           random_extra=max(samples // 2000, 16))
    dirs.extend(d.as_float() for d in extra_directions)
    n_base = max(samples // max(len(dirs), 1), 8)
    pts = base_points(region, n_base, extra=extra_points)

    def scan_one(d: Coords):
        vals, args = _direction_violations(f, d, pts, region)
        idx = int(np.argmin(vals))
        if vals[idx] < 0:
            return (-float(vals[idx]), pts[idx], d, float(args[idx]))
        return None

    workers = worker_count()
    if workers > 1 and len(dirs) >= 4 * workers:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(scan_one, dirs))
    else:
        results = [scan_one(d) for d in dirs]
    worst_lines = [r for r in results if r is not None]
    worst = max((r[0] for r in worst_lines), default=0.0)
    worst_lines.sort(key=lambda r: -r[0])
    return worst, worst_lines[:top]


# ----------------------------------------------------------------------
# LP separator search
# ----------------------------------------------------------------------

@dataclass
class SeparatorConfig:
    rounds: int = 50
    add_per_round: int = 32
    lp_bases: int = 24
    scan_samples: int = 20000
    dense_lines: int = 1_000_000
    grid_count: int = 65
    verify_tol: float = 1e-9
    gap_tol: float = 1e-9
    gen_tol: float = 1e-10
    seed: int = 0
    box_inflate: float = 0.1
    sparsify: bool = True


@dataclass
class Certificate:
    f: PolyFunc
    gap: Scalar
    violation: float
    status: str                      # verified | refuted | inconclusive
    meta: dict = field(default_factory=dict)


def pairing_gap(f: PolyFunc, target: DiscreteMeasure) -> Scalar:
    """f(0) - <f, target>, exact when both sides are exact."""
    zero = Coords(0, 0, 0)
    total = f(zero)
    for atom in target.atoms:
        total = total - atom.weight * f(atom.point)
    return total


def _moments(target: DiscreteMeasure, monos: list[tuple[int, ...]]) -> list[float]:
    out = []
    for e in monos:
        m = 0
        for atom in target.atoms:
            vals = atom.point.entries()
            term = atom.weight
            for v, k in zip(vals, e):
                for _ in range(k):
                    term = term * v
            m = m + term
        out.append(float(m))
    return out


def _constraint_row(monos, p, d, t) -> list[float]:
    row = []
    for e in monos:
        mono = PolyFunc({e: 1})
        c, b, a = mono.second_derivative_on_line(p, d)
        row.append(float(c) + float(b) * t + float(a) * t * t)
    return row


def separate(target: DiscreteMeasure, cone: Cone, degree: int = 4,
             cfg: Optional[SeparatorConfig] = None) -> Certificate:
    """LP search for a cone-convex separator against the target measure.

    The returned certificate has already been through the independent dense
    verification; its status is trustworthy as reported.
    """
    cfg = cfg or SeparatorConfig()
    if degree < 2:
        raise SeparatorError("separator degree must be at least 2")
    first = target.atoms[0].point
    if not isinstance(first, Coords):
        raise SeparatorError("separate expects a coordinate-space measure")
    bc = _target_barycenter_norm(target)
    if bc > 1e-9:
        raise SeparatorError(f"target barycenter is not zero (|b| = {bc:.3g})")

    monos = monomials_upto(degree, min_degree=2)
    objective = np.array(_moments(target, monos))
    box = Box.around(target.points(), cfg.box_inflate)
    rng = np.random.default_rng(cfg.seed)

    dirs = cone_directions(cone, count=cfg.grid_count, rng=rng, random_extra=16)
    pts = base_points(box, cfg.lp_bases, extra=list(target.points()) + [Coords(0, 0, 0)])
    rows: list[list[float]] = []
    for d in dirs:
        dv = np.array([float(v) for v in d.entries()])
        t_lo, t_hi = _line_intervals(pts, dv, box)
        for i in range(pts.shape[0]):
            for t in (t_lo[i], 0.5 * (t_lo[i] + t_hi[i]), t_hi[i]):
                rows.append(_constraint_row(monos, pts[i], dv, t))

    history = []
    x = np.zeros(len(monos))
    rounds_used = 0
    for round_no in range(cfg.rounds):
        rounds_used = round_no + 1
        res = linprog(objective, A_ub=-np.array(rows), b_ub=np.zeros(len(rows)),
                      bounds=[(-1, 1)] * len(monos), method="highs")
        if not res.success:
            raise SeparatorError(f"separator LP failed: {res.message}")
        x = res.x
        history.append(-float(res.fun))
        f = PolyFunc({e: c for e, c in zip(monos, x)})
        worst, lines = violation_scan(
            f, cone, box, cfg.scan_samples, seed=cfg.seed + round_no,
            top=cfg.add_per_round)
        if worst <= cfg.gen_tol * max(1.0, f.coeff_norm()):
            break
        for _, p, d, t in lines:
            dv = np.array([float(v) for v in d.entries()])
            rows.append(_constraint_row(monos, p, dv, t))

    if cfg.sparsify and len(rows):
        x = _sparsify(objective, rows, x, history[-1])
    f = PolyFunc({e: c for e, c in zip(monos, x) if abs(c) > 1e-13})
    cert = Certificate(f=f, gap=pairing_gap(f, target), violation=math.inf,
                       status="inconclusive",
                       meta={"objective_history": history,
                             "rounds": rounds_used,
                             "constraints": len(rows),
                             "degree": degree,
                             "seed": cfg.seed})
    return verify_certificate(cert, cone, target, cfg.dense_lines, cfg=cfg)


def _target_barycenter_norm(target: DiscreteMeasure) -> float:
    from .measure import barycenter
    return float(barycenter(target).norm_inf())


def _sparsify(objective, rows, x, best_obj: float):
    """Secondary LP: among near-optimal coefficient vectors, minimize the
    l1 norm.  Kills the free coefficients the main LP leaves at arbitrary
    vertex values."""
    n = len(objective)
    a = np.array(rows)
    a2 = np.hstack([-a, a])
    obj2 = np.ones(2 * n)
    lock = np.hstack([objective, -objective]).reshape(1, -1)
    a_ub = np.vstack([a2, lock])
    b_ub = np.concatenate([np.zeros(a.shape[0]),
                           [float(objective @ x) + 1e-9]])
    res = linprog(obj2, A_ub=a_ub, b_ub=b_ub,
                  bounds=[(0, 1)] * (2 * n), method="highs")
    if not res.success:
        return x
    return res.x[:n] - res.x[n:]


def verify_certificate(cert: Certificate, cone: Cone,
                       target: DiscreteMeasure,
                       dense_samples: int = 1_000_000,
                       cfg: Optional[SeparatorConfig] = None) -> Certificate:
    """Re-evaluate the gap and run the dense independent convexity scan;
    statuses: refuted (convexity broken), verified (clean and positive
    gap), inconclusive otherwise.  Tolerances are relative to the
    coefficient scale so scaling a certificate cannot change its status."""
    cfg = cfg or SeparatorConfig()
    box = Box.around(target.points(), cfg.box_inflate)
    scale = max(cert.f.coeff_norm(), 1e-300)
    violation = convexity_violation(
        cert.f, cone, box, samples=dense_samples, seed=cfg.seed + 10_000,
        extra_points=target.points())
    gap = pairing_gap(cert.f, target)
    if violation > cfg.verify_tol * scale:
        status = "refuted"
    elif float(gap) > cfg.gap_tol * scale:
        status = "verified"
    else:
        status = "inconclusive"
    meta = dict(cert.meta)
    meta["dense_samples"] = dense_samples
    return Certificate(f=cert.f, gap=gap, violation=violation,
                       status=status, meta=meta)
