"""Small dense matrices with dual scalar modes: exact rationals or floats.

The toolkit works with tiny real matrices (2x2, 3x2, and 1x2 row
projections).  Entries are either exact (``int``/``Fraction``) or ``float``;
mixing the two inside one matrix demotes it to float mode through Python's
normal numeric contagion.  Exact mode exists because every identity the
constructions satisfy is an identity of rational functions of the parameter
tau, so verification should not hinge on tolerance tuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

Scalar = Union[int, Fraction, float]

#: default relative tolerance for float-mode rank decisions
RANK_TOL = 1e-12


class MatrixError(ValueError):
    pass


class NotRankOneError(MatrixError):
    pass


def is_exact_scalar(x: Scalar) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def parse_scalar(value) -> Scalar:
    """Accept ints, floats, Fractions, or 'p/q' / decimal strings."""
    if isinstance(value, str):
        text = value.strip()
        if "/" in text or "." not in text and "e" not in text.lower():
            return Fraction(text)
        return float(text)
    if isinstance(value, bool):
        raise MatrixError("boolean is not a scalar")
    if isinstance(value, (int, Fraction)):
        return value
    if isinstance(value, float):
        return value
    raise MatrixError(f"cannot interpret {value!r} as a scalar")


def _check_finite(x: Scalar) -> None:
    if isinstance(x, float) and not math.isfinite(x):
        raise MatrixError(f"non-finite entry {x!r}")


class Matrix:
    """Immutable m x N matrix of scalars (row-major)."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable[Scalar]]):
        rows = tuple(tuple(r) for r in rows)
        if not rows or not rows[0]:
            raise MatrixError("empty matrix")
        ncols = len(rows[0])
        for r in rows:
            if len(r) != ncols:
                raise MatrixError("ragged rows")
            for x in r:
                _check_finite(x)
        self.rows = rows

    # -- basic structure ---------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    def entries(self) -> tuple[Scalar, ...]:
        return tuple(x for row in self.rows for x in row)

    def __getitem__(self, ij: tuple[int, int]) -> Scalar:
        i, j = ij
        return self.rows[i][j]

    def __repr__(self) -> str:
        return f"Matrix({[list(r) for r in self.rows]!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    # -- arithmetic --------------------------------------------------------

    def _zip(self, other: "Matrix", op) -> "Matrix":
        if not isinstance(other, Matrix) or other.shape != self.shape:
            raise MatrixError("shape mismatch")
        return Matrix(
            tuple(tuple(op(a, b) for a, b in zip(ra, rb))
                  for ra, rb in zip(self.rows, other.rows))
        )

    def __add__(self, other: "Matrix") -> "Matrix":
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self) -> "Matrix":
        return self.scale(-1)

    def scale(self, s: Scalar) -> "Matrix":
        return Matrix(tuple(tuple(s * x for x in r) for r in self.rows))

    def __rmul__(self, s: Scalar) -> "Matrix":
        return self.scale(s)

    # -- predicates and norms ----------------------------------------------

    def norm_inf(self) -> Scalar:
        return max(abs(x) for x in self.entries())

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.entries())

    def is_exact(self) -> bool:
        return all(is_exact_scalar(x) for x in self.entries())

    def as_float(self) -> "Matrix":
        return Matrix(tuple(tuple(float(x) for x in r) for r in self.rows))

    def sort_key(self) -> tuple:
        return (self.m, self.n) + tuple(float(x) for x in self.entries())

    @staticmethod
    def zero(m: int, n: int, exact: bool = True) -> "Matrix":
        z = 0 if exact else 0.0
        return Matrix(tuple(tuple(z for _ in range(n)) for _ in range(m)))


def det2(mat: Matrix) -> Scalar:
    """Determinant of a 2x2 matrix, exact in rational mode."""
    if mat.shape != (2, 2):
        raise MatrixError(f"det2 needs a 2x2 matrix, got {mat.shape}")
    (a, b), (c, d) = mat.rows
    return a * d - b * c


def minors2(mat: Matrix) -> list[Scalar]:
    """All 2x2 minors (row pair x column pair)."""
    out = []
    m, n = mat.shape
    for i in range(m):
        for k in range(i + 1, m):
            for j in range(n):
                for l in range(j + 1, n):
                    out.append(mat.rows[i][j] * mat.rows[k][l]
                               - mat.rows[i][l] * mat.rows[k][j])
    return out


def _singular_values(mat: Matrix) -> list[float]:
    """Descending singular values.  LAPACK keeps the small one accurate to
    machine precision times sigma1, which the Gram-matrix closed form does
    not (it loses half the digits to cancellation)."""
    import numpy as np

    rows = [[float(x) for x in r] for r in mat.rows]
    return list(np.linalg.svd(np.array(rows), compute_uv=False))


def rank_class(mat: Matrix, tol: float = RANK_TOL) -> str:
    """Classify as 'zero', 'rank-one', or 'rank-two'.

    Exact entries use vanishing of all 2x2 minors; float entries compare
    singular values (sigma2 <= tol * sigma1).  The zero matrix gets its own
    verdict: it is neither rank-one nor rank-two.
    """
    if tol <= 0 and not mat.is_exact():
        raise MatrixError("tol must be positive in float mode")
    if mat.is_zero():
        return "zero"
    if min(mat.shape) == 1:
        return "rank-one"
    if mat.is_exact():
        return "rank-one" if all(d == 0 for d in minors2(mat)) else "rank-two"
    sigma = _singular_values(mat)
    return "rank-one" if sigma[1] <= tol * sigma[0] else "rank-two"


def rank_one_test(mat: Matrix, tol: float = RANK_TOL) -> bool:
    return rank_class(mat, tol) == "rank-one"


@dataclass(frozen=True)
class RankOneFactors:
    """Factorization M = left (x) normal with |normal| = 1.

    The normal is sign-fixed so its first nonzero component is positive,
    which makes repeated factorizations (and report snapshots) identical.
    """

    left: tuple[float, ...]
    normal: tuple[float, ...]

    def reconstruct(self) -> Matrix:
        return Matrix(tuple(tuple(v * n for n in self.normal) for v in self.left))


def canonical_sign(vec: Sequence[float], zero_tol: float = 1e-12) -> int:
    """+1/-1 so that vec scaled by it has positive first nonzero entry."""
    for x in vec:
        if abs(x) > zero_tol:
            return 1 if x > 0 else -1
    return 1


def rank_one_factor(mat: Matrix, tol: float = RANK_TOL) -> RankOneFactors:
    """Factor a rank-one matrix as v (x) n.  Raises on zero/rank-two input."""
    verdict = rank_class(mat, tol)
    if verdict != "rank-one":
        raise NotRankOneError(f"not rank-one: matrix is {verdict}")
    rows = [[float(x) for x in r] for r in mat.rows]
    norms = [math.hypot(*r) if len(r) == 2 else math.sqrt(sum(x * x for x in r))
             for r in rows]
    best = max(range(len(rows)), key=lambda i: (norms[i], -i))
    direction = rows[best]
    scale = math.sqrt(sum(x * x for x in direction))
    unit = [x / scale for x in direction]
    sign = canonical_sign(unit)
    normal = tuple(sign * x for x in unit)
    left = tuple(sum(x * n for x, n in zip(r, normal)) for r in rows)
    return RankOneFactors(left=left, normal=normal)
