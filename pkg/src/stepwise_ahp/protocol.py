"""Step-wise group re-evaluation protocol.

The loop: every member submits a complete evaluation; the group consistency
ratio is computed on the aggregate; while it sits at or above the threshold,
the member whose judgments damage coherence most (highest leave-one-out
influence) is routed back to re-judge, then the group is re-evaluated. The
session ends when the ratio drops below the threshold (converged) or a
budget runs out (budget-exhausted).

States are immutable; every operation returns a new SessionState. Replaying
the same submissions through a fresh session reproduces the same log, which
is what the persistence layer's event-log storage relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .errors import DomainError, ProtocolError
from .group import DecisionMaker, InfluenceReport, JudgmentSet, influence_ranking
from .hierarchy import FullEvaluation, Hierarchy, validate_evaluation
from .matrix import ComparisonMatrix

COLLECTING = "collecting"
AWAITING_REVISION = "awaiting-revision"
CONVERGED = "converged"
BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class StopRule:
    """Termination contract: a target ratio and two budgets."""

    cr_threshold: float = 0.1
    max_group_iterations: int = 10
    max_per_member_revisions: int = 3

    def __post_init__(self):
        if not self.cr_threshold > 0:
            raise DomainError(f"cr_threshold must be positive, got {self.cr_threshold}")
        if self.max_group_iterations < 1 or self.max_per_member_revisions < 1:
            raise DomainError("iteration budgets must be at least 1")


@dataclass(frozen=True)
class IterationRecord:
    """One revision round.

    Appended when a member is routed to revise; `group_cr_after` stays None
    until the next advance computes the post-revision ratio, so the chain
    group_cr_after(k) = group_cr_before(k+1) holds by construction.
    """

    round: int
    group_cr_before: float
    influence_report: InfluenceReport
    target_member: str
    revised: bool
    group_cr_after: float | None


@dataclass(frozen=True)
class SessionState:
    hierarchy: Hierarchy
    members: tuple[DecisionMaker, ...]
    stop_rule: StopRule
    judgments: Mapping[str, FullEvaluation] = field(default_factory=dict)
    log: tuple[IterationRecord, ...] = ()
    phase: str = COLLECTING
    revision_target: str | None = None

    @property
    def is_final(self) -> bool:
        return self.phase in (CONVERGED, BUDGET_EXHAUSTED)

    def member_ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.members)

    def missing_members(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.members if m.id not in self.judgments)

    def current_sets(self) -> tuple[JudgmentSet, ...]:
        """Submitted evaluations as judgment sets, in roster order."""
        return tuple(
            JudgmentSet(owner=m.id, evaluation=self.judgments[m.id])
            for m in self.members
            if m.id in self.judgments
        )

    def revision_count(self, member_id: str) -> int:
        return sum(1 for r in self.log if r.target_member == member_id and r.revised)

    def revision_counts(self) -> dict[str, int]:
        return {m.id: self.revision_count(m.id) for m in self.members}

    @property
    def ready_for_advance(self) -> bool:
        if self.phase == COLLECTING:
            return not self.missing_members()
        if self.phase == AWAITING_REVISION:
            return bool(self.log) and self.log[-1].revised
        return False


def start_session(
    hierarchy: Hierarchy, members: Sequence[DecisionMaker], stop_rule: StopRule | None = None
) -> SessionState:
    """Open a session in the collecting phase with an empty log."""
    members = tuple(members)
    if len(members) < 2:
        raise DomainError(f"a group session needs at least 2 members, got {len(members)}")
    ids = [m.id for m in members]
    if len(set(ids)) != len(ids):
        raise DomainError(f"duplicate member ids: {sorted(ids)}")
    return SessionState(
        hierarchy=hierarchy, members=members, stop_rule=stop_rule or StopRule()
    )


def submit_judgments(
    state: SessionState, member_id: str, evaluation: FullEvaluation
) -> SessionState:
    """Store or replace one member's complete evaluation.

    Allowed while collecting (any member, any number of times) and during
    awaiting-revision for the targeted member only. Resubmitting unchanged
    judgments counts as a revision; content is not policed, budgets are.
    """
    if member_id not in state.member_ids():
        raise DomainError(f"unknown member {member_id!r}")
    if state.phase == COLLECTING:
        pass
    elif state.phase == AWAITING_REVISION:
        if member_id != state.revision_target:
            raise ProtocolError(
                f"session awaits a revision from {state.revision_target!r}, "
                f"not from {member_id!r}"
            )
    else:
        raise ProtocolError(f"session is {state.phase}; no further submissions are accepted")
    evaluation.check_against(state.hierarchy)
    validate_evaluation(evaluation, require_grid=True)
    judgments = dict(state.judgments)
    judgments[member_id] = evaluation
    log = state.log
    if state.phase == AWAITING_REVISION:
        log = log[:-1] + (replace(log[-1], revised=True),)
    return replace(state, judgments=judgments, log=log)


def advance_round(state: SessionState) -> SessionState:
    """Evaluate the group and either stop or route the next revision.

    Order of the stop checks: threshold first, then the group iteration
    budget, then per-member budgets (a round is opened only if some member
    can still revise).
    """
    if state.is_final:
        raise ProtocolError(f"session is already {state.phase}")
    if not state.ready_for_advance:
        if state.phase == COLLECTING:
            missing = state.missing_members()
            raise ProtocolError(
                f"cannot advance: waiting for submissions from {', '.join(missing)}",
                missing=missing,
            )
        raise ProtocolError(
            f"cannot advance: waiting for a revision from {state.revision_target!r}"
        )
    report = influence_ranking(state.current_sets(), state.hierarchy)
    current_cr = report.group_ratio
    log = state.log
    if log and log[-1].group_cr_after is None:
        log = log[:-1] + (replace(log[-1], group_cr_after=current_cr),)
    if current_cr < state.stop_rule.cr_threshold:
        return replace(state, log=log, phase=CONVERGED, revision_target=None)
    if len(log) >= state.stop_rule.max_group_iterations:
        return replace(state, log=log, phase=BUDGET_EXHAUSTED, revision_target=None)
    counts = state.revision_counts()
    target = next(
        (
            m
            for m in report.ranked_ids()
            if counts[m] < state.stop_rule.max_per_member_revisions
        ),
        None,
    )
    if target is None:
        return replace(state, log=log, phase=BUDGET_EXHAUSTED, revision_target=None)
    record = IterationRecord(
        round=len(log) + 1,
        group_cr_before=current_cr,
        influence_report=report,
        target_member=target,
        revised=False,
        group_cr_after=None,
    )
    return replace(
        state, log=log + (record,), phase=AWAITING_REVISION, revision_target=target
    )


def session_trajectory(state: SessionState) -> tuple[tuple[int, float], ...]:
    """(round, group CR) per logged round.

    A round's value is the ratio measured after its revision; a round still
    awaiting its revision reports the ratio that opened it.
    """
    return tuple(
        (r.round, r.group_cr_after if r.group_cr_after is not None else r.group_cr_before)
        for r in state.log
    )


def carry_forward(
    current: FullEvaluation,
    criteria_matrix: ComparisonMatrix | None = None,
    alternative_matrices: Mapping[str, ComparisonMatrix] | None = None,
) -> FullEvaluation:
    """Merge a partial revision onto an existing evaluation.

    A revising member may resubmit any subset of matrices; everything not
    resubmitted is carried forward unchanged. `alternative_matrices` is keyed
    by criterion id.
    """
    alternative_matrices = dict(alternative_matrices or {})
    criteria_ids = current.criteria_matrix.labels
    unknown = set(alternative_matrices) - set(criteria_ids)
    if unknown:
        raise DomainError(f"revision names unknown criteria: {sorted(unknown)}")
    merged_alts = tuple(
        alternative_matrices.get(cid, current.alternative_matrices[idx])
        for idx, cid in enumerate(criteria_ids)
    )
    return FullEvaluation(
        criteria_matrix=criteria_matrix if criteria_matrix is not None else current.criteria_matrix,
        alternative_matrices=merged_alts,
    )
