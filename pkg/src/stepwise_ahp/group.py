"""Multi-member judgments: aggregation, leave-one-out analysis, influence.

Aggregation takes the cell-wise geometric mean of the members' matrices
(judgment-level aggregation). The geometric mean preserves reciprocity,
which an arithmetic mean would not; aggregated entries are deliberately NOT
snapped back to the judgment grid.

All members hold equal positions: the mean is unweighted, each member
counting 1/k.

The influence ranking measures how much each member damages group coherence:
influence(d) = group CR minus the group CR recomputed without d. Positive
influence means the group would be more coherent without d's judgments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DomainError, ValidationError
from .hierarchy import (
    EvaluationConsistency,
    FullEvaluation,
    Hierarchy,
    evaluation_consistency,
    validate_evaluation,
)
from .matrix import ComparisonMatrix, reciprocal


@dataclass(frozen=True)
class DecisionMaker:
    """A group member. Every member carries the same weight, 1/k for k members."""

    id: str
    display_name: str = ""

    def __post_init__(self):
        if not str(self.id).strip():
            raise DomainError("member id must be non-empty")


def equal_share(member_count: int) -> float:
    """The uniform member weight; the only weighting scheme supported."""
    if member_count < 1:
        raise DomainError("member count must be at least 1")
    return 1.0 / member_count


@dataclass(frozen=True)
class JudgmentSet:
    """One member's complete evaluation, tagged with their id."""

    owner: str
    evaluation: FullEvaluation


def integer_nth_root(x: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer, by Newton iteration."""
    if x < 0 or k < 1:
        raise DomainError(f"nth root undefined for x={x}, k={k}")
    if k == 1 or x in (0, 1):
        return x
    r = 1 << ((x.bit_length() + k - 1) // k)
    while True:
        nr = ((k - 1) * r + x // r ** (k - 1)) // k
        if nr >= r:
            return r
        r = nr


def geometric_mean(values: Sequence[Fraction]) -> Fraction:
    """Geometric mean of positive rationals, exact whenever it is rational.

    The product is taken in exact arithmetic; if numerator and denominator of
    the reduced product are both perfect k-th powers the result is the exact
    rational root, otherwise the root is evaluated in floating point (and
    wrapped as a Fraction, so the caller-facing type never changes).
    """
    k = len(values)
    if k == 0:
        raise DomainError("geometric mean of an empty list")
    prod = Fraction(1)
    for v in values:
        if v <= 0:
            raise DomainError(f"geometric mean requires positive values, got {v}")
        prod *= v
    num, den = prod.numerator, prod.denominator
    rn = integer_nth_root(num, k)
    rd = integer_nth_root(den, k)
    if rn**k == num and rd**k == den:
        return Fraction(rn, rd)
    return Fraction(math.exp((math.log(num) - math.log(den)) / k))


def _check_sets(sets: Sequence[JudgmentSet], hierarchy: Hierarchy | None = None) -> None:
    if not sets:
        raise DomainError("no judgment sets to aggregate")
    owners = [s.owner for s in sets]
    if len(set(owners)) != len(owners):
        raise DomainError(f"duplicate judgment-set owners: {sorted(owners)}")
    reference = sets[0].evaluation
    for s in sets:
        if hierarchy is not None:
            s.evaluation.check_against(hierarchy)
        for (key, m), (_, ref) in zip(s.evaluation.matrices(), reference.matrices()):
            if m.labels != ref.labels:
                raise ValidationError(
                    f"member {s.owner!r} matrix {key!r} labels {m.labels!r} "
                    f"do not match the group's {ref.labels!r}",
                    matrix=key,
                    member=s.owner,
                )
        if len(s.evaluation.alternative_matrices) != len(reference.alternative_matrices):
            raise ValidationError(
                f"member {s.owner!r} supplies {len(s.evaluation.alternative_matrices)} "
                f"alternative matrices, the group has {len(reference.alternative_matrices)}",
                member=s.owner,
            )
        try:
            validate_evaluation(s.evaluation, require_grid=True)
        except ValidationError as e:
            raise ValidationError(
                f"member {s.owner!r}: {e}", violations=e.violations, matrix=e.matrix, member=s.owner
            ) from None


def _aggregate_matrices(matrices: Sequence[ComparisonMatrix]) -> ComparisonMatrix:
    # cell-wise geometric mean over the upper triangle, reciprocals mirrored
    # so the result is exactly reciprocal even when roots fall back to floats
    n = matrices[0].n
    rows = [[Fraction(1)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            g = geometric_mean([m.entries[i][j] for m in matrices])
            rows[i][j] = g
            rows[j][i] = reciprocal(g)
    return ComparisonMatrix(rows, matrices[0].labels)


def aggregate_judgments(
    sets: Sequence[JudgmentSet], hierarchy: Hierarchy | None = None
) -> FullEvaluation:
    """Cell-wise geometric mean of the members' evaluations.

    Passing the hierarchy additionally checks every set against its shape.
    Aggregating a single set returns it unchanged (k=1 roots are exact).
    """
    _check_sets(sets, hierarchy)
    slot_count = len(sets[0].evaluation.alternative_matrices)
    criteria = _aggregate_matrices([s.evaluation.criteria_matrix for s in sets])
    alternatives = tuple(
        _aggregate_matrices([s.evaluation.alternative_matrices[idx] for s in sets])
        for idx in range(slot_count)
    )
    return FullEvaluation(criteria_matrix=criteria, alternative_matrices=alternatives)


def group_consistency(
    sets: Sequence[JudgmentSet],
    hierarchy: Hierarchy | None = None,
    method: str = "eigenvector",
) -> EvaluationConsistency:
    """Consistency diagnosis of the aggregated evaluation.

    The group consistency ratio is the worst ratio across the aggregated
    matrices: the stop rule downstream must guarantee every matrix is
    acceptable, so the conservative scalar is the maximum.
    """
    return evaluation_consistency(aggregate_judgments(sets, hierarchy), method=method)


@dataclass(frozen=True)
class MemberInfluence:
    """One member's effect on group coherence.

    `matrix_influence` breaks the scalar down per matrix key: how much the
    group's ratio for that matrix drops when this member is excluded.
    """

    member: str
    own_worst_ratio: float
    leave_one_out_ratio: float
    influence: float
    matrix_influence: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class InfluenceReport:
    """Group ratio plus each member's leave-one-out influence.

    `per_member` covers every member exactly once, sorted by member id.
    `most_influential` maximizes influence; exact ties resolve to the
    smallest member id, so the choice is invariant under input order.
    """

    group_ratio: float
    per_member: tuple[MemberInfluence, ...]
    most_influential: str

    def ranked_ids(self) -> tuple[str, ...]:
        """Member ids from most to least influential, ties by id."""
        return tuple(
            m.member for m in sorted(self.per_member, key=lambda m: (-m.influence, m.member))
        )

    def for_member(self, member_id: str) -> MemberInfluence:
        for m in self.per_member:
            if m.member == member_id:
                return m
        raise DomainError(f"no influence entry for member {member_id!r}")


def influence_ranking(
    sets: Sequence[JudgmentSet],
    hierarchy: Hierarchy | None = None,
    method: str = "eigenvector",
) -> InfluenceReport:
    """Leave-one-out influence of every member.

    influence(d) = group worst CR - worst CR of the aggregate without d.
    Requires at least 2 members; leave-one-out is undefined for a single one.
    """
    if len(sets) < 2:
        raise DomainError(f"influence ranking needs at least 2 members, got {len(sets)}")
    group = group_consistency(sets, hierarchy, method=method)
    keys = [d.key for d in group.diagnoses]
    entries = []
    for s in sorted(sets, key=lambda s: s.owner):
        rest = [t for t in sets if t.owner != s.owner]
        loo = group_consistency(rest, hierarchy, method=method)
        own = evaluation_consistency(s.evaluation, method=method)
        entries.append(
            MemberInfluence(
                member=s.owner,
                own_worst_ratio=own.worst_ratio,
                leave_one_out_ratio=loo.worst_ratio,
                influence=group.worst_ratio - loo.worst_ratio,
                matrix_influence=tuple(
                    (
                        key,
                        group.report_for(key).consistency_ratio
                        - loo.report_for(key).consistency_ratio,
                    )
                    for key in keys
                ),
            )
        )
    # entries are sorted by member id and max keeps the first maximum, so
    # exact ties resolve to the smallest id regardless of input order
    best = max(entries, key=lambda m: m.influence)
    return InfluenceReport(
        group_ratio=group.worst_ratio,
        per_member=tuple(entries),
        most_influential=best.member,
    )
