"""Session lifecycle: collect, evaluate, route one member to revise, stop."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from stepwise_ahp.consistency import CR_THRESHOLD
from stepwise_ahp.errors import DomainError, ProtocolError, ValidationError
from stepwise_ahp.group import DecisionMaker, JudgmentSet
from stepwise_ahp.hierarchy import FullEvaluation, Hierarchy
from stepwise_ahp.matrix import ComparisonMatrix
from stepwise_ahp.protocol import (
    AWAITING_REVISION,
    BUDGET_EXHAUSTED,
    COLLECTING,
    CONVERGED,
    SessionState,
    StopRule,
    advance_round,
    carry_forward,
    session_trajectory,
    start_session,
    submit_judgments,
)

F = Fraction


def drive_to_end(state, revisions=None):
    """Advance until final; the target resubmits unchanged unless scripted."""
    revisions = dict(revisions or {})
    while True:
        state = advance_round(state)
        if state.is_final:
            return state
        target = state.revision_target
        queue = revisions.get(target)
        ev = queue.pop(0) if queue else state.judgments[target]
        state = submit_judgments(state, target, ev)


@pytest.fixture
def collected(hierarchy3, conflict_members, conflict_group):
    state = start_session(hierarchy3, conflict_members, StopRule())
    for s in conflict_group:
        state = submit_judgments(state, s.owner, s.evaluation)
    return state


class TestStopRule:
    def test_defaults(self):
        r = StopRule()
        assert r.cr_threshold == CR_THRESHOLD
        assert r.max_group_iterations >= 1
        assert r.max_per_member_revisions >= 1

    def test_validation(self):
        with pytest.raises(DomainError):
            StopRule(cr_threshold=0.0)
        with pytest.raises(DomainError):
            StopRule(max_group_iterations=0)
        with pytest.raises(DomainError):
            StopRule(max_per_member_revisions=0)


class TestCollecting:
    def test_fresh_session(self, hierarchy3, conflict_members):
        s = start_session(hierarchy3, conflict_members)
        assert s.phase == COLLECTING
        assert s.missing_members() == ("dm1", "dm2", "dm3")
        assert not s.ready_for_advance
        assert s.log == ()

    def test_needs_two_members(self, hierarchy3):
        with pytest.raises(DomainError):
            start_session(hierarchy3, (DecisionMaker("solo"),))

    def test_duplicate_ids_refused(self, hierarchy3):
        with pytest.raises(DomainError):
            start_session(hierarchy3, (DecisionMaker("x"), DecisionMaker("x")))

    def test_last_submission_flips_readiness(self, hierarchy3, conflict_members, conflict_group):
        state = start_session(hierarchy3, conflict_members)
        for s in conflict_group[:2]:
            state = submit_judgments(state, s.owner, s.evaluation)
        assert state.missing_members() == ("dm3",)
        assert not state.ready_for_advance
        state = submit_judgments(state, "dm3", conflict_group[2].evaluation)
        assert state.missing_members() == ()
        assert state.ready_for_advance

    def test_resubmission_replaces(self, hierarchy3, conflict_members, conflict_group):
        state = start_session(hierarchy3, conflict_members)
        state = submit_judgments(state, "dm1", conflict_group[2].evaluation)
        state = submit_judgments(state, "dm1", conflict_group[0].evaluation)
        assert state.judgments["dm1"] == conflict_group[0].evaluation

    def test_unknown_member_rejected(self, hierarchy3, conflict_members, conflict_group):
        state = start_session(hierarchy3, conflict_members)
        with pytest.raises(DomainError):
            submit_judgments(state, "ghost", conflict_group[0].evaluation)

    def test_invalid_judgments_leave_state_alone(self, hierarchy3, conflict_members):
        state = start_session(hierarchy3, conflict_members)
        off_grid = FullEvaluation(
            criteria_matrix=ComparisonMatrix(
                [[1, 10, 1], [F(1, 10), 1, 1], [1, 1, 1]], hierarchy3.criteria
            ),
            alternative_matrices=tuple(
                ComparisonMatrix.from_upper([1, 1, 1], hierarchy3.alternatives) for _ in range(3)
            ),
        )
        with pytest.raises(ValidationError):
            submit_judgments(state, "dm1", off_grid)
        assert state.judgments == {}

    def test_advance_before_everyone_submitted(self, hierarchy3, conflict_members, conflict_group):
        state = start_session(hierarchy3, conflict_members)
        state = submit_judgments(state, "dm2", conflict_group[1].evaluation)
        with pytest.raises(ProtocolError) as exc:
            advance_round(state)
        assert exc.value.missing == ("dm1", "dm3")


class TestAdvance:
    def test_consistent_group_converges_immediately(
        self, hierarchy3, conflict_members, conflict_group
    ):
        state = start_session(hierarchy3, conflict_members)
        for m in conflict_members:
            state = submit_judgments(state, m.id, conflict_group[0].evaluation)
        state = advance_round(state)
        assert state.phase == CONVERGED
        assert state.log == ()
        assert session_trajectory(state) == ()

    def test_conflict_group_opens_a_round(self, collected):
        state = advance_round(collected)
        assert state.phase == AWAITING_REVISION
        assert state.revision_target == "dm3"
        assert len(state.log) == 1
        rec = state.log[0]
        assert rec.round == 1
        assert rec.target_member == "dm3"
        assert rec.group_cr_after is None
        assert not rec.revised
        assert rec.influence_report.most_influential == "dm3"

    def test_round_one_target_matches_oracle(self, collected, conflict_group):
        state = advance_round(collected)
        _, _, most = oracles.alt_influence(conflict_group)
        assert state.revision_target == most

    def test_only_target_may_submit_while_awaiting(self, collected, agreeing_evaluation):
        state = advance_round(collected)
        with pytest.raises(ProtocolError):
            submit_judgments(state, "dm1", agreeing_evaluation)

    def test_advance_without_revision_is_refused(self, collected):
        state = advance_round(collected)
        assert not state.ready_for_advance
        with pytest.raises(ProtocolError):
            advance_round(state)

    def test_revision_closes_the_round(self, collected, agreeing_evaluation):
        state = advance_round(collected)
        state = submit_judgments(state, "dm3", agreeing_evaluation)
        assert state.log[-1].revised
        assert state.ready_for_advance
        state = advance_round(state)
        assert state.phase == CONVERGED
        assert state.log[-1].group_cr_after is not None
        assert state.log[-1].group_cr_after < CR_THRESHOLD

    def test_submissions_refused_after_final(self, collected, agreeing_evaluation):
        state = advance_round(collected)
        state = submit_judgments(state, "dm3", agreeing_evaluation)
        state = advance_round(state)
        assert state.is_final
        with pytest.raises(ProtocolError):
            submit_judgments(state, "dm3", agreeing_evaluation)
        with pytest.raises(ProtocolError):
            advance_round(state)

    def test_single_round_budget(self, hierarchy3, conflict_members, conflict_group):
        rule = StopRule(max_group_iterations=1)
        state = start_session(hierarchy3, conflict_members, rule)
        for s in conflict_group:
            state = submit_judgments(state, s.owner, s.evaluation)
        state = advance_round(state)
        state = submit_judgments(state, "dm3", state.judgments["dm3"])
        state = advance_round(state)
        assert state.phase == BUDGET_EXHAUSTED
        assert len(state.log) == 1
        assert state.log[0].group_cr_after is not None

    def test_unchanged_resubmission_counts_as_revision(self, collected):
        state = drive_to_end(collected)
        assert state.phase == BUDGET_EXHAUSTED
        assert all(rec.revised for rec in state.log)
        # nobody changes anything, so the 3 x 3 per-member revision capacity
        # binds before the group iteration cap of 10
        assert len(state.log) == 9
        assert state.revision_counts() == {"dm1": 3, "dm2": 3, "dm3": 3}


class TestBudgets:
    def test_per_member_budget_rotates_targets(self, hierarchy3):
        # both members inconsistent, nobody changes anything: the round robin
        # burns each member's single revision, then the session gives up
        cyc_a = ComparisonMatrix.from_upper([9, F(1, 9), 9], hierarchy3.criteria)
        cyc_b = ComparisonMatrix.from_upper([7, F(1, 7), 7], hierarchy3.criteria)
        ones = ComparisonMatrix.from_upper([1, 1, 1], hierarchy3.alternatives)
        ev_a = FullEvaluation(cyc_a, (ones, ones, ones))
        ev_b = FullEvaluation(cyc_b, (ones, ones, ones))
        rule = StopRule(max_group_iterations=10, max_per_member_revisions=1)
        state = start_session(hierarchy3, (DecisionMaker("a"), DecisionMaker("b")), rule)
        state = submit_judgments(state, "a", ev_a)
        state = submit_judgments(state, "b", ev_b)
        state = drive_to_end(state)
        assert state.phase == BUDGET_EXHAUSTED
        targets = [rec.target_member for rec in state.log]
        assert len(targets) == 2
        assert set(targets) == {"a", "b"}
        assert state.revision_count("a") == 1
        assert state.revision_count("b") == 1

    def test_exhausted_member_is_skipped(self, hierarchy3, conflict_members, conflict_group):
        rule = StopRule(max_group_iterations=10, max_per_member_revisions=2)
        state = start_session(hierarchy3, conflict_members, rule)
        for s in conflict_group:
            state = submit_judgments(state, s.owner, s.evaluation)
        state = drive_to_end(state)
        # dm3 twice, then the runner-up members get their turns
        targets = [rec.target_member for rec in state.log]
        assert targets[:2] == ["dm3", "dm3"]
        assert all(targets.count(m) <= 2 for m in ("dm1", "dm2", "dm3"))


class TestLogInvariants:
    def test_chain_links(self, collected):
        state = drive_to_end(collected)
        for a, b in zip(state.log, state.log[1:]):
            assert a.group_cr_after == b.group_cr_before
        assert [rec.round for rec in state.log] == list(range(1, len(state.log) + 1))
        assert all(rec.group_cr_after is not None for rec in state.log)

    def test_trajectory_mirrors_log(self, collected):
        state = drive_to_end(collected)
        traj = session_trajectory(state)
        assert len(traj) == len(state.log)
        for (rnd, cr), rec in zip(traj, state.log):
            assert rnd == rec.round
            assert cr == rec.group_cr_after

    def test_single_round_convergence_gives_single_point(self, collected, agreeing_evaluation):
        state = advance_round(collected)
        state = submit_judgments(state, "dm3", agreeing_evaluation)
        state = advance_round(state)
        assert state.phase == CONVERGED
        traj = session_trajectory(state)
        assert len(traj) == 1
        assert traj[0][0] == 1

    def test_convergence_is_sound(self, collected, agreeing_evaluation):
        from stepwise_ahp.group import group_consistency

        state = advance_round(collected)
        state = submit_judgments(state, "dm3", agreeing_evaluation)
        state = advance_round(state)
        ec = group_consistency(state.current_sets(), state.hierarchy)
        assert ec.worst_ratio < state.stop_rule.cr_threshold + 1e-12

    def test_targets_follow_stored_influence(self, collected):
        state = drive_to_end(collected)
        spent: dict[str, int] = {}
        for rec in state.log:
            eligible = [
                mid
                for mid in rec.influence_report.ranked_ids()
                if spent.get(mid, 0) < state.stop_rule.max_per_member_revisions
            ]
            assert rec.target_member == eligible[0]
            spent[rec.target_member] = spent.get(rec.target_member, 0) + 1


class TestReplay:
    def test_same_script_same_states(self, hierarchy3, conflict_members, conflict_group):
        def run():
            state = start_session(hierarchy3, conflict_members, StopRule())
            for s in conflict_group:
                state = submit_judgments(state, s.owner, s.evaluation)
            return drive_to_end(state)

        a, b = run(), run()
        assert a.phase == b.phase
        assert a.log == b.log
        assert a.judgments == b.judgments

    @given(st.integers(min_value=0, max_value=2**31 - 1))
    @settings(max_examples=15)
    def test_fuzzed_sessions_terminate_and_stay_lawful(self, seed):
        rng = np.random.default_rng([seed])
        h = Hierarchy("goal", "pick", ("c1", "c2"), ("a1", "a2"))
        members = tuple(DecisionMaker(f"m{i + 1}") for i in range(int(rng.integers(2, 5))))
        rule = StopRule(
            max_group_iterations=int(rng.integers(1, 6)),
            max_per_member_revisions=int(rng.integers(1, 4)),
        )
        state = start_session(h, members, rule)
        for m in members:
            state = submit_judgments(state, m.id, oracles.random_evaluation(rng, h))
        advances = 0
        while not state.is_final:
            state = advance_round(state)
            advances += 1
            assert advances <= rule.max_group_iterations + 1
            if state.phase == AWAITING_REVISION:
                state = submit_judgments(
                    state, state.revision_target, oracles.random_evaluation(rng, h)
                )
        assert len(state.log) <= rule.max_group_iterations
        if state.phase == CONVERGED and state.log:
            assert state.log[-1].group_cr_after < rule.cr_threshold


class TestCarryForward:
    def test_partial_patch(self, agreeing_evaluation, hierarchy3):
        cyc = ComparisonMatrix.from_upper([9, F(1, 9), 9], hierarchy3.criteria)
        patched = carry_forward(agreeing_evaluation, criteria_matrix=cyc)
        assert patched.criteria_matrix == cyc
        assert patched.alternative_matrices == agreeing_evaluation.alternative_matrices

    def test_alternative_patch_by_criterion(self, agreeing_evaluation, hierarchy3):
        repl = ComparisonMatrix.from_upper([5, 5, 1], hierarchy3.alternatives)
        patched = carry_forward(agreeing_evaluation, alternative_matrices={"c2": repl})
        assert patched.alternative_matrices[1] == repl
        assert patched.alternative_matrices[0] == agreeing_evaluation.alternative_matrices[0]

    def test_unknown_criterion_refused(self, agreeing_evaluation, hierarchy3):
        repl = ComparisonMatrix.from_upper([5, 5, 1], hierarchy3.alternatives)
        with pytest.raises(DomainError):
            carry_forward(agreeing_evaluation, alternative_matrices={"nope": repl})

    def test_noop_patch_returns_equal_evaluation(self, agreeing_evaluation):
        assert carry_forward(agreeing_evaluation) == agreeing_evaluation
