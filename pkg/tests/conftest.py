"""Shared fixtures: small matrices, a three-member conflict group, temp stores."""

from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))  # makes `import oracles` work

from stepwise_ahp.group import DecisionMaker, JudgmentSet
from stepwise_ahp.hierarchy import FullEvaluation, Hierarchy
from stepwise_ahp.matrix import ComparisonMatrix

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("suite")

FIXTURES = Path(__file__).parent / "fixtures"

F = Fraction


@pytest.fixture
def m1() -> ComparisonMatrix:
    """Mildly inconsistent 3x3 benchmark; frozen oracle numbers live in the tests."""
    return ComparisonMatrix.from_upper([3, 5, 3])


@pytest.fixture
def hierarchy3() -> Hierarchy:
    return Hierarchy(
        goal_id="goal",
        goal_name="pick a vendor",
        criteria=("c1", "c2", "c3"),
        alternatives=("a1", "a2", "a3"),
    )


def _matrix(upper, labels):
    return ComparisonMatrix.from_upper(upper, labels)


def conflict_sets(hierarchy: Hierarchy) -> tuple[JudgmentSet, ...]:
    """Two agreeing members and one contrarian.

    dm1 and dm2 share a coherent view. dm3 inverts the criteria order and the
    first alternative matrix, which makes dm3 wildly inconsistent on its own
    and pushes the aggregate over the acceptability threshold.
    """
    c = hierarchy.criteria
    a = hierarchy.alternatives
    agree = FullEvaluation(
        criteria_matrix=_matrix([2, 4, 2], c),
        alternative_matrices=(
            _matrix([3, 9, 3], a),
            _matrix([1, 1, 1], a),
            _matrix([1, F(1, 2), F(1, 2)], a),
        ),
    )
    contrarian = FullEvaluation(
        criteria_matrix=_matrix([F(1, 9), 1, F(1, 4)], c),
        alternative_matrices=(
            _matrix([F(1, 3), F(1, 9), F(1, 3)], a),
            _matrix([1, 1, 1], a),
            _matrix([1, F(1, 2), F(1, 2)], a),
        ),
    )
    return (
        JudgmentSet(owner="dm1", evaluation=agree),
        JudgmentSet(owner="dm2", evaluation=agree),
        JudgmentSet(owner="dm3", evaluation=contrarian),
    )


@pytest.fixture
def conflict_group(hierarchy3):
    return conflict_sets(hierarchy3)


@pytest.fixture
def conflict_members():
    return (
        DecisionMaker("dm1", "first"),
        DecisionMaker("dm2", "second"),
        DecisionMaker("dm3", "third"),
    )


@pytest.fixture
def agreeing_evaluation(hierarchy3) -> FullEvaluation:
    """The view dm1/dm2 hold in the conflict fixture; handy as a revision."""
    return conflict_sets(hierarchy3)[0].evaluation


@pytest.fixture
def store_dir(tmp_path) -> Path:
    d = tmp_path / "store"
    d.mkdir()
    return d
