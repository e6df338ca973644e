"""Saaty judgment scale and exact reciprocal pairwise-comparison matrices.

Judgments are stored as exact rationals (`fractions.Fraction`) so that
reciprocity a_ji = 1/a_ij holds exactly, not merely to rounding. Floating
point enters only when a matrix is handed to the numerical layer
(:mod:`stepwise_ahp.priorities`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import StructureError

#: The 17 admissible judgment ratios: 1/9 .. 1/2, 1, 2 .. 9, ascending.
SAATY_VALUES: tuple[Fraction, ...] = tuple(
    [Fraction(1, k) for k in range(9, 1, -1)] + [Fraction(k) for k in range(1, 10)]
)
SAATY_SET = frozenset(SAATY_VALUES)
_LOG_GRID = np.log([float(v) for v in SAATY_VALUES])

#: Verbal grades of the five main scale steps; intermediates sit between them.
LINGUISTIC_GRADES = {
    1: "equally important",
    3: "moderately more important",
    5: "strongly more important",
    7: "very strongly more important",
    9: "extremely more important",
}

#: Largest matrix order the shipped random-index table covers.
MAX_ITEMS = 10


def reciprocal(value: Fraction) -> Fraction:
    """Exact reciprocal of a judgment value."""
    return Fraction(value.denominator, value.numerator)


def is_saaty_value(value) -> bool:
    """True iff `value` is exactly one of the 17 admissible ratios."""
    return value in SAATY_SET


def snap_to_scale(x: float) -> Fraction:
    """Nearest admissible judgment to a positive ratio, measured in log space.

    Exact log-midpoint ties resolve to the smaller grid value, so snapping is
    deterministic.
    """
    if x <= 0:
        raise StructureError(f"cannot snap non-positive ratio {x!r} to the scale")
    idx = int(np.argmin(np.abs(math.log(x) - _LOG_GRID)))
    return SAATY_VALUES[idx]


@dataclass(frozen=True)
class Violation:
    """One invariant violation at a matrix cell."""

    row: int
    col: int
    code: str  # "diagonal" | "reciprocity" | "scale" | "positivity"
    message: str


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[Violation, ...]

    def __bool__(self) -> bool:
        return self.ok


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise StructureError(f"matrix entries must be rationals, got {type(value).__name__}")


def scan_entries(
    rows: Sequence[Sequence[Fraction]], require_grid: bool = True
) -> list[Violation]:
    """Invariant scan over a square grid of rationals.

    Reports every offending cell: non-unit diagonal, broken reciprocity
    (flagged at the lower-triangle cell), non-positive entries, and, when
    `require_grid` is set, off-diagonal entries outside the Saaty scale.
    """
    n = len(rows)
    out: list[Violation] = []
    for i in range(n):
        for j in range(n):
            v = rows[i][j]
            if v <= 0:
                out.append(Violation(i, j, "positivity", f"entry {v} is not positive"))
    for i in range(n):
        if rows[i][i] != 1:
            out.append(Violation(i, i, "diagonal", f"diagonal entry is {rows[i][i]}, must be 1"))
    for i in range(n):
        for j in range(i + 1, n):
            a, b = rows[i][j], rows[j][i]
            if a > 0 and b > 0 and a * b != 1:
                out.append(
                    Violation(j, i, "reciprocity", f"entry is {b}, expected {reciprocal(a)} = 1/{a}")
                )
    if require_grid:
        for i in range(n):
            for j in range(n):
                if i != j and rows[i][j] > 0 and rows[i][j] not in SAATY_SET:
                    out.append(
                        Violation(i, j, "scale", f"entry {rows[i][j]} is not on the 1/9..9 scale")
                    )
    return out


class ComparisonMatrix:
    """Square positive reciprocal matrix of pairwise judgments.

    The constructor enforces only structure (square, 2 <= n <= 10, positive
    rational entries, unique labels); invariant checks that should be
    *reported* rather than raised (diagonal, reciprocity, scale membership)
    live in :func:`validate_matrix`.
    """

    __slots__ = ("entries", "labels")

    def __init__(self, entries: Iterable[Iterable], labels: Sequence[str] | None = None):
        rows = tuple(tuple(_as_fraction(v) for v in row) for row in entries)
        n = len(rows)
        if n < 2:
            raise StructureError(f"matrix needs at least 2 items, got {n}")
        if n > MAX_ITEMS:
            raise StructureError(f"matrix order {n} exceeds the supported maximum {MAX_ITEMS}")
        if any(len(row) != n for row in rows):
            raise StructureError("matrix entries are not square")
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                if v <= 0:
                    raise StructureError(f"entry ({i},{j}) = {v} is not positive")
        if labels is None:
            labels = tuple(f"item{i + 1}" for i in range(n))
        labels = tuple(str(x) for x in labels)
        if len(labels) != n:
            raise StructureError(f"{len(labels)} labels for {n} items")
        if len(set(labels)) != n:
            raise StructureError("labels are not unique")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("ComparisonMatrix is immutable")

    @property
    def n(self) -> int:
        return len(self.entries)

    def entry(self, i: int, j: int) -> Fraction:
        return self.entries[i][j]

    def as_array(self) -> np.ndarray:
        """Entries as a float64 array, for the numerical layer."""
        return np.array([[float(v) for v in row] for row in self.entries])

    def transpose(self) -> "ComparisonMatrix":
        n = self.n
        return ComparisonMatrix(
            [[self.entries[j][i] for j in range(n)] for i in range(n)], self.labels
        )

    def permuted(self, perm: Sequence[int]) -> "ComparisonMatrix":
        """Rows, columns and labels reordered by `perm` (new index i holds old perm[i])."""
        if sorted(perm) != list(range(self.n)):
            raise StructureError(f"{perm!r} is not a permutation of 0..{self.n - 1}")
        return ComparisonMatrix(
            [[self.entries[perm[i]][perm[j]] for j in range(self.n)] for i in range(self.n)],
            [self.labels[p] for p in perm],
        )

    def with_entry(self, i: int, j: int, value) -> "ComparisonMatrix":
        """Copy with cell (i, j) set and (j, i) set to the exact reciprocal."""
        if i == j:
            raise StructureError("diagonal entries are fixed at 1")
        v = _as_fraction(value)
        rows = [list(row) for row in self.entries]
        rows[i][j] = v
        rows[j][i] = reciprocal(v)
        return ComparisonMatrix(rows, self.labels)

    @classmethod
    def from_upper(cls, upper: Sequence, labels: Sequence[str] | None = None) -> "ComparisonMatrix":
        """Build from the upper triangle row by row; reciprocals are mirrored.

        For n items, `upper` lists a_12 .. a_1n, a_23 .. a_2n, ... (n(n-1)/2
        values).
        """
        m = len(upper)
        n = round((1 + math.isqrt(1 + 8 * m)) / 2)
        if n * (n - 1) // 2 != m:
            raise StructureError(f"{m} upper-triangle values do not fill any square matrix")
        rows = [[Fraction(1)] * n for _ in range(n)]
        it = iter(upper)
        for i in range(n):
            for j in range(i + 1, n):
                v = _as_fraction(next(it))
                rows[i][j] = v
                rows[j][i] = reciprocal(v)
        return cls(rows, labels)

    @classmethod
    def from_weights(cls, weights: Sequence, labels: Sequence[str] | None = None) -> "ComparisonMatrix":
        """Perfectly consistent matrix with entries w_i / w_j (exact ratios)."""
        ws = [_as_fraction(w) for w in weights]
        if any(w <= 0 for w in ws):
            raise StructureError("weights must be strictly positive")
        return cls([[wi / wj for wj in ws] for wi in ws], labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComparisonMatrix):
            return NotImplemented
        return self.entries == other.entries and self.labels == other.labels

    def __hash__(self) -> int:
        return hash((self.entries, self.labels))

    def __repr__(self) -> str:
        return f"ComparisonMatrix(n={self.n}, labels={self.labels!r})"


def validate_matrix(m: ComparisonMatrix, require_grid: bool = True) -> ValidationResult:
    """Check all ComparisonMatrix invariants, reporting every violated cell.

    With `require_grid` (the default, appropriate for human judgments)
    off-diagonal entries must sit on the Saaty scale; aggregated matrices are
    checked with `require_grid=False` since geometric means leave the grid.
    """
    violations = scan_entries(m.entries, require_grid=require_grid)
    return ValidationResult(ok=not violations, violations=tuple(violations))


def validate_rows(
    rows: Sequence[Sequence], labels: Sequence[str] | None = None, require_grid: bool = True
) -> ValidationResult:
    """Like :func:`validate_matrix` but for raw nested data, pre-construction.

    Raises :class:`StructureError` for non-square input or fewer than 2 items;
    all other problems come back as reportable violations.
    """
    rows = [[_as_fraction(v) for v in row] for row in rows]
    n = len(rows)
    if n < 2:
        raise StructureError(f"matrix needs at least 2 items, got {n}")
    if n > MAX_ITEMS:
        raise StructureError(f"matrix order {n} exceeds the supported maximum {MAX_ITEMS}")
    if any(len(row) != n for row in rows):
        raise StructureError("matrix entries are not square")
    if labels is not None and len(set(labels)) != len(labels):
        raise StructureError("labels are not unique")
    violations = scan_entries(rows, require_grid=require_grid)
    return ValidationResult(ok=not violations, violations=tuple(violations))
