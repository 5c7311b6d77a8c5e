"""Three-dimensional matrix subspaces, their coordinates, and rank-one cones.

Two charts are supported.  The tau-parametrized 2x2 chart has basis

    B1 = [[1, 0], [2t, 0]],   B2 = [[0, 2t], [0, 1]],   B3 = [[t, t], [t, t]]

so that (x, y, z) maps to [[x + tz, 2ty + tz], [2tx + tz, y + tz]].  Its
rank-one directions form the quadric cone (1+2t)xy + txz + tyz = 0, which
for t = 0 degenerates to the condition xy = 0.  The 3x2 chart has basis
e11, e22, (rows 0,0,(1,1)) and its rank-one directions are exactly the three
coordinate axes.

Directions are treated projectively: membership tests are scale-invariant,
and reports use the canonical form with sup-norm 1 and positive first
nonzero component.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .matcore import (Matrix, MatrixError, Scalar, canonical_sign,
                      is_exact_scalar, parse_scalar, rank_one_factor)


class ChartError(ValueError):
    pass


class NotInSubspaceError(ChartError):
    def __init__(self, residual):
        super().__init__(f"matrix not in subspace (residual {residual!r})")
        self.residual = residual


class SingularParameterError(ChartError):
    pass


class Coords:
    """A point (x, y, z) in chart coordinates."""

    __slots__ = ("x", "y", "z")

    def __init__(self, x: Scalar, y: Scalar, z: Scalar):
        self.x = x
        self.y = y
        self.z = z

    def entries(self) -> tuple[Scalar, Scalar, Scalar]:
        return (self.x, self.y, self.z)

    def __iter__(self):
        return iter(self.entries())

    def __repr__(self) -> str:
        return f"Coords({self.x!r}, {self.y!r}, {self.z!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Coords) and self.entries() == other.entries()

    def __hash__(self) -> int:
        return hash(self.entries())

    def __add__(self, other: "Coords") -> "Coords":
        return Coords(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Coords") -> "Coords":
        return Coords(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Coords":
        return self.scale(-1)

    def scale(self, s: Scalar) -> "Coords":
        return Coords(s * self.x, s * self.y, s * self.z)

    def norm_inf(self) -> Scalar:
        return max(abs(self.x), abs(self.y), abs(self.z))

    def norm2(self) -> float:
        return math.sqrt(float(self.x) ** 2 + float(self.y) ** 2
                         + float(self.z) ** 2)

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0 and self.z == 0

    def is_exact(self) -> bool:
        return all(is_exact_scalar(v) for v in self.entries())

    def as_float(self) -> "Coords":
        return Coords(float(self.x), float(self.y), float(self.z))

    def sort_key(self) -> tuple:
        return (float(self.x), float(self.y), float(self.z))

    def canonical(self) -> "Coords":
        """Projective canonical form: |.|_inf = 1, first nonzero positive."""
        s = self.norm_inf()
        if s == 0:
            raise ChartError("zero direction has no canonical form")
        d = self.scale(1 / s if not is_exact_scalar(s) else Fraction(1, 1) / s)
        sign = canonical_sign([float(v) for v in d.entries()])
        return d.scale(sign)


AXES = (Coords(1, 0, 0), Coords(0, 1, 0), Coords(0, 0, 1))


class Chart:
    """One of the two 3-dimensional subspaces, with its coordinate map."""

    __slots__ = ("kind", "tau")

    def __init__(self, kind: str, tau: Scalar | None = None):
        if kind == "tau":
            if tau is None or tau < 0:
                raise ChartError("tau chart needs tau >= 0")
            self.tau = tau
        elif kind == "3x2":
            self.tau = None
        else:
            raise ChartError(f"unknown chart kind {kind!r}")
        self.kind = kind

    def __repr__(self) -> str:
        return f"Chart({self.kind!r}, tau={self.tau!r})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, Chart) and self.kind == other.kind
                and self.tau == other.tau)

    @property
    def rows(self) -> int:
        return 2 if self.kind == "tau" else 3

    def is_degenerate(self) -> bool:
        """The tau = 0 chart: B3 vanishes and the subspace drops to 2D."""
        return self.kind == "tau" and self.tau == 0

    def basis(self) -> tuple[Matrix, Matrix, Matrix]:
        if self.kind == "tau":
            t = self.tau
            return (Matrix([[1, 0], [2 * t, 0]]),
                    Matrix([[0, 2 * t], [0, 1]]),
                    Matrix([[t, t], [t, t]]))
        return (Matrix([[1, 0], [0, 0], [0, 0]]),
                Matrix([[0, 0], [0, 1], [0, 0]]),
                Matrix([[0, 0], [0, 0], [1, 1]]))

    def coords_to_matrix(self, c: Coords) -> Matrix:
        x, y, z = c.entries()
        if self.kind == "tau":
            t = self.tau
            return Matrix([[x + t * z, 2 * t * y + t * z],
                           [2 * t * x + t * z, y + t * z]])
        return Matrix([[x, 0], [0, y], [z, z]])

    def matrix_to_coords(self, mat: Matrix, tol: float = 1e-9) -> Coords:
        """Invert the identification; raises NotInSubspaceError otherwise."""
        scale = mat.norm_inf()
        if self.kind == "3x2":
            if mat.shape != (3, 2):
                raise ChartError(f"expected 3x2 matrix, got {mat.shape}")
            half = Fraction(1, 2) if mat.is_exact() else 0.5
            c = Coords(mat[0, 0], mat[1, 1],
                       half * (mat[2, 0] + mat[2, 1]))
        else:
            if mat.shape != (2, 2):
                raise ChartError(f"expected 2x2 matrix, got {mat.shape}")
            t = self.tau
            (a, b), (cc, d) = mat.rows
            if self.is_degenerate():
                c = Coords(a, d, 0 if mat.is_exact() else 0.0)
            else:
                denom = 2 * t * (1 - 2 * t)
                if denom == 0:
                    raise ChartError("chart degenerates at tau = 1/2")
                z = ((cc - 2 * t * a) + (b - 2 * t * d)) / denom
                c = Coords(a - t * z, d - t * z, z)
        exact = mat.is_exact() and (self.tau is None or is_exact_scalar(self.tau))
        residual = (mat - self.coords_to_matrix(c)).norm_inf()
        bound = 0 if exact else tol * max(float(scale), 1.0)
        if residual > bound:
            raise NotInSubspaceError(residual)
        return c

    def natural_cone(self) -> "Cone":
        if self.kind == "tau":
            return Cone.quadric(self.tau)
        return Cone.axes()


class Cone:
    """Scale-invariant set of rank-one coordinate directions.

    Kinds: ``quadric`` (the tau-cone; tau = 0 is the degenerate xy = 0
    cone), ``axes`` (the three coordinate axes), and ``dict`` (an explicit
    finite set of directions matched up to angular tolerance).
    """

    __slots__ = ("kind", "tau", "directions")

    def __init__(self, kind: str, tau: Scalar | None = None,
                 directions: Sequence[Coords] | None = None):
        self.kind = kind
        self.tau = tau
        self.directions = tuple(directions) if directions else None
        if kind == "quadric" and (tau is None or tau < 0):
            raise ChartError("quadric cone needs tau >= 0")
        if kind == "dict" and not self.directions:
            raise ChartError("dictionary cone needs at least one direction")
        if kind not in ("quadric", "axes", "dict"):
            raise ChartError(f"unknown cone kind {kind!r}")

    @staticmethod
    def quadric(tau: Scalar) -> "Cone":
        return Cone("quadric", tau=tau)

    @staticmethod
    def lambda0() -> "Cone":
        return Cone("quadric", tau=0)

    @staticmethod
    def axes() -> "Cone":
        return Cone("axes")

    @staticmethod
    def dictionary(directions: Iterable[Coords]) -> "Cone":
        return Cone("dict", directions=tuple(directions))

    def __repr__(self) -> str:
        if self.kind == "quadric":
            return f"Cone.quadric({self.tau!r})"
        if self.kind == "axes":
            return "Cone.axes()"
        return f"Cone.dictionary({len(self.directions)} directions)"

    def residual(self, d: Coords) -> Scalar:
        """Quadric residual (1+2t)xy + txz + tyz; exact on exact input."""
        if self.kind != "quadric":
            raise ChartError("residual defined for quadric cones")
        t = self.tau
        x, y, z = d.entries()
        return (1 + 2 * t) * x * y + t * x * z + t * y * z

    def contains(self, d: Coords, tol: float = 1e-9) -> bool:
        if d.is_zero():
            raise ChartError("zero direction")
        if self.kind == "quadric":
            q = self.residual(d)
            if d.is_exact() and is_exact_scalar(self.tau):
                return q == 0
            n = d.norm2()
            return abs(float(q)) <= tol * n * n
        if self.kind == "axes":
            entries = d.entries()
            best = max(abs(float(v)) for v in entries)
            for k in range(3):
                others = [entries[i] for i in range(3) if i != k]
                if d.is_exact():
                    if all(v == 0 for v in others):
                        return True
                elif all(abs(float(v)) <= tol * best for v in others):
                    return True
            return False
        df = d.as_float()
        nd = df.norm2()
        for u in self.directions:
            uf = u.as_float()
            cross = _cross_norm(df, uf)
            if cross <= tol * nd * uf.norm2():
                return True
        return False

    def sample_directions(self, c_lo: float = 1 / 16, c_hi: float = 16.0,
                          count: int = 65) -> list[Coords]:
        """Deterministic finite dictionary of cone directions.

        For quadric cones the one-parameter families from :func:`cone_family`
        are sampled on a signed log grid in c, plus the three axis images.
        """
        if self.kind == "axes":
            return list(AXES)
        if self.kind == "dict":
            return [d.canonical() for d in self.directions]
        out: list[Coords] = []
        for c in c_grid(c_lo, c_hi, count):
            try:
                d1, d2 = cone_family(c, self.tau)
            except SingularParameterError:
                continue
            out.extend((d1, d2))
        out.extend(AXES)
        seen = {}
        for d in out:
            can = d.as_float().canonical()
            key = tuple(round(v, 12) for v in can.entries())
            seen.setdefault(key, can)
        return [seen[k] for k in sorted(seen)]


def in_cone(d: Coords, cone: Cone, tol: float = 1e-9) -> bool:
    return cone.contains(d, tol)


def c_grid(c_lo: float = 1 / 16, c_hi: float = 16.0, count: int = 65) -> list[float]:
    """Signed log grid of degenerate-family parameters: 0 and +-magnitudes.

    ``count`` must be odd: (count-1)/2 log-spaced magnitudes per sign plus 0.
    The c = infinity directions are the axis images and are appended by
    :meth:`Cone.sample_directions` separately.
    """
    if count < 3 or count % 2 == 0:
        raise ChartError("c-grid size must be odd and >= 3")
    if not 0 < c_lo < c_hi:
        raise ChartError("need 0 < c_lo < c_hi")
    m = (count - 1) // 2
    lo, hi = float(c_lo), float(c_hi)
    if m == 1:
        mags = [math.sqrt(lo * hi)]
    else:
        step = (math.log(hi) - math.log(lo)) / (m - 1)
        mags = [math.exp(math.log(lo) + k * step) for k in range(1, m - 1)]
        mags = [lo] + mags + [hi]
    return sorted([-v for v in mags] + [0.0] + mags)


def cone_family(c: Scalar, tau: Scalar) -> tuple[Coords, Coords]:
    """The two rank-one direction families (c, -tc/(c+t(1+2c)), 1) and its
    swap; both satisfy the quadric equation identically.

    c = 0 gives (0, 0, 1) twice; c = inf gives the axes (1,0,0), (0,1,0).
    """
    if isinstance(c, float) and math.isinf(c):
        return (Coords(1, 0, 0), Coords(0, 1, 0))
    if c == 0:
        one = Coords(0, 0, 1)
        return (one, one)
    denom = c + tau * (1 + 2 * c)
    if abs(float(denom)) <= 1e-14 * max(1.0, abs(float(c))):
        raise SingularParameterError(f"singular parameter c={c!r}, tau={tau!r}")
    w = -tau * c / denom
    return (Coords(c, w, 1), Coords(w, c, 1))


def normal_of(d: Coords, chart: Chart, tol: float = 1e-7) -> tuple[float, float]:
    """Lamination normal of a rank-one coordinate direction: the unit n of
    the rank-one factorization of the direction's matrix image."""
    mat = chart.coords_to_matrix(d)
    return rank_one_factor(mat.as_float(), tol=tol).normal


def normal_angle(n1: Sequence[float], n2: Sequence[float]) -> float:
    """Angle between two normals, signs ignored (normals are projective)."""
    dot = abs(n1[0] * n2[0] + n1[1] * n2[1])
    s1 = math.hypot(*n1)
    s2 = math.hypot(*n2)
    return math.acos(min(dot / (s1 * s2), 1.0))


def _cross_norm(a: Coords, b: Coords) -> float:
    cx = float(a.y) * float(b.z) - float(a.z) * float(b.y)
    cy = float(a.z) * float(b.x) - float(a.x) * float(b.z)
    cz = float(a.x) * float(b.y) - float(a.y) * float(b.x)
    return math.sqrt(cx * cx + cy * cy + cz * cz)


# ----------------------------------------------------------------------
# spec-string parsing for the CLI
# ----------------------------------------------------------------------

def parse_chart(spec: str) -> Chart:
    spec = spec.strip()
    if spec == "3x2":
        return Chart("3x2")
    if spec.startswith("tau:"):
        return Chart("tau", tau=parse_scalar(spec[4:]))
    raise ChartError(f"unknown chart spec {spec!r} (use 'tau:T' or '3x2')")


def parse_cone(spec: str, load_directions=None) -> Cone:
    spec = spec.strip()
    if spec == "lambda0":
        return Cone.lambda0()
    if spec == "axes":
        return Cone.axes()
    if spec.startswith("tau:"):
        return Cone.quadric(parse_scalar(spec[4:]))
    if spec.startswith("dict:@"):
        if load_directions is None:
            raise ChartError("no loader provided for dictionary cone files")
        return Cone.dictionary(load_directions(spec[6:]))
    raise ChartError(
        f"unknown cone spec {spec!r} (use 'tau:T', 'lambda0', 'axes', 'dict:@file')")
