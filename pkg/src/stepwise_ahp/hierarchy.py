"""Two-level decision hierarchies and priority synthesis.

A hierarchy is a goal, a set of criteria, and a set of alternatives. One
complete appraisal (FullEvaluation) supplies a criteria matrix plus one
alternatives matrix per criterion; synthesis combines local priorities into
global alternative priorities by the weighted sum over criteria.

Matrices inside an evaluation are addressed by key: "criteria" for the
criteria matrix and "alternatives/<criterion id>" for each alternatives
matrix. These keys appear in diagnostics, error payloads, and the service
API.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .consistency import ConsistencyReport, consistency_report
from .errors import StructureError, ValidationError
from .matrix import MAX_ITEMS, ComparisonMatrix, validate_matrix

#: Beyond this many alternatives, keeping pairwise judgments consistent gets
#: markedly harder; synthesis still runs but attaches a warning.
ALTERNATIVES_ADVICE_LIMIT = 3

CRITERIA_KEY = "criteria"


def alternatives_key(criterion_id: str) -> str:
    return f"alternatives/{criterion_id}"


def _check_identifier(kind: str, value: str) -> str:
    value = str(value)
    if not value.strip():
        raise StructureError(f"{kind} identifier must be non-empty")
    if "/" in value or "\n" in value:
        # identifiers embed into matrix keys and file names
        raise StructureError(f"{kind} identifier {value!r} may not contain '/' or newlines")
    return value


@dataclass(frozen=True)
class Hierarchy:
    goal_id: str
    goal_name: str
    criteria: tuple[str, ...]
    alternatives: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "goal_id", _check_identifier("goal", self.goal_id))
        object.__setattr__(self, "goal_name", str(self.goal_name))
        object.__setattr__(
            self, "criteria", tuple(_check_identifier("criterion", c) for c in self.criteria)
        )
        object.__setattr__(
            self, "alternatives", tuple(_check_identifier("alternative", a) for a in self.alternatives)
        )
        for kind, labels in (("criteria", self.criteria), ("alternatives", self.alternatives)):
            if len(labels) < 2:
                raise StructureError(f"need at least 2 {kind}, got {len(labels)}")
            if len(labels) > MAX_ITEMS:
                raise StructureError(f"{len(labels)} {kind} exceed the supported maximum {MAX_ITEMS}")
        everything = (self.goal_id,) + self.criteria + self.alternatives
        if len(set(everything)) != len(everything):
            raise StructureError("goal, criteria and alternative identifiers must all be distinct")

    @property
    def n_criteria(self) -> int:
        return len(self.criteria)

    @property
    def n_alternatives(self) -> int:
        return len(self.alternatives)

    def matrix_keys(self) -> tuple[str, ...]:
        return (CRITERIA_KEY,) + tuple(alternatives_key(c) for c in self.criteria)


@dataclass(frozen=True)
class FullEvaluation:
    """One appraiser's complete judgments over a hierarchy.

    `alternative_matrices` follows the hierarchy's criteria order. Matrix
    labels must agree with the hierarchy labels, which pins orientation: cell
    (i, j) always means "row item relative to column item".
    """

    criteria_matrix: ComparisonMatrix
    alternative_matrices: tuple[ComparisonMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "alternative_matrices", tuple(self.alternative_matrices))

    def check_against(self, hierarchy: Hierarchy) -> None:
        if self.criteria_matrix.labels != hierarchy.criteria:
            raise StructureError(
                f"criteria matrix labels {self.criteria_matrix.labels!r} "
                f"do not match hierarchy criteria {hierarchy.criteria!r}"
            )
        if len(self.alternative_matrices) != hierarchy.n_criteria:
            raise StructureError(
                f"{len(self.alternative_matrices)} alternative matrices "
                f"for {hierarchy.n_criteria} criteria"
            )
        for c, m in zip(hierarchy.criteria, self.alternative_matrices):
            if m.labels != hierarchy.alternatives:
                raise StructureError(
                    f"alternative matrix under {c!r} has labels {m.labels!r}, "
                    f"expected {hierarchy.alternatives!r}"
                )

    def matrices(self) -> tuple[tuple[str, ComparisonMatrix], ...]:
        """(key, matrix) pairs: criteria matrix first, then criteria order."""
        out = [(CRITERIA_KEY, self.criteria_matrix)]
        for c, m in zip(self.criteria_matrix.labels, self.alternative_matrices):
            out.append((alternatives_key(c), m))
        return tuple(out)

    def matrix_by_key(self, key: str) -> ComparisonMatrix:
        for k, m in self.matrices():
            if k == key:
                return m
        raise StructureError(f"no matrix with key {key!r}")


def validate_evaluation(evaluation: FullEvaluation, require_grid: bool = True) -> None:
    """Raise ValidationError naming the first matrix whose invariants fail.

    Aggregated evaluations carry off-grid entries by design; validate those
    with `require_grid=False`.
    """
    for key, m in evaluation.matrices():
        result = validate_matrix(m, require_grid=require_grid)
        if not result.ok:
            raise ValidationError(
                f"matrix {key!r} violates judgment invariants",
                violations=result.violations,
                matrix=key,
            )


@dataclass(frozen=True)
class MatrixDiagnosis:
    """Consistency report for one matrix slot of an evaluation.

    `stage` separates the criteria matrix ("preliminary", judged before
    alternatives exist in the workflow) from the alternative matrices
    ("final", the ones whose coherence decides the outcome).
    """

    key: str
    stage: str  # "preliminary" | "final"
    report: ConsistencyReport


@dataclass(frozen=True)
class EvaluationConsistency:
    """Per-matrix reports plus the worst ratio and where it occurs."""

    diagnoses: tuple[MatrixDiagnosis, ...]
    worst_ratio: float
    worst_key: str

    @property
    def acceptable(self) -> bool:
        return all(d.report.acceptable for d in self.diagnoses)

    def report_for(self, key: str) -> ConsistencyReport:
        for d in self.diagnoses:
            if d.key == key:
                return d.report
        raise StructureError(f"no diagnosis for matrix key {key!r}")


def evaluation_consistency(
    evaluation: FullEvaluation, method: str = "eigenvector"
) -> EvaluationConsistency:
    """Diagnose every matrix of an evaluation.

    The worst ratio is the maximum consistency ratio across slots (undefined
    ratios count as 0); ties go to the earliest slot in evaluation order, so
    attribution is deterministic.
    """
    diagnoses = []
    for key, m in evaluation.matrices():
        stage = "preliminary" if key == CRITERIA_KEY else "final"
        diagnoses.append(MatrixDiagnosis(key, stage, consistency_report(m, method=method)))
    worst = max(diagnoses, key=lambda d: d.report.consistency_ratio)
    return EvaluationConsistency(
        diagnoses=tuple(diagnoses),
        worst_ratio=worst.report.consistency_ratio,
        worst_key=worst.key,
    )


@dataclass(frozen=True)
class SynthesisResult:
    """Global priorities with full per-matrix diagnostics."""

    hierarchy: Hierarchy
    criteria_weights: tuple[float, ...]
    local_weights: tuple[tuple[float, ...], ...]  # per criterion, over alternatives
    global_weights: tuple[float, ...]
    ranking: tuple[int, ...]  # alternative indices, best first; ties by hierarchy order
    consistency: EvaluationConsistency
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def ranked_alternatives(self) -> tuple[tuple[str, float], ...]:
        return tuple((self.hierarchy.alternatives[i], self.global_weights[i]) for i in self.ranking)


def synthesize_global(
    hierarchy: Hierarchy,
    evaluation: FullEvaluation,
    method: str = "eigenvector",
    require_grid: bool = True,
) -> SynthesisResult:
    """Derive global alternative priorities for one evaluation.

    global_a = sum_c w_c * u_{c,a} with w the criteria weights and u the local
    alternative weights under each criterion; global weights sum to 1 by
    construction. Consistency is diagnosed but never enforced here; callers
    decide what to do with unacceptable ratios.
    """
    evaluation.check_against(hierarchy)
    validate_evaluation(evaluation, require_grid=require_grid)
    consistency = evaluation_consistency(evaluation, method=method)
    w = consistency.report_for(CRITERIA_KEY).weights
    locals_ = tuple(
        consistency.report_for(alternatives_key(c)).weights for c in hierarchy.criteria
    )
    global_w = tuple(
        sum(w[c] * locals_[c][a] for c in range(hierarchy.n_criteria))
        for a in range(hierarchy.n_alternatives)
    )
    ranking = tuple(sorted(range(hierarchy.n_alternatives), key=lambda a: (-global_w[a], a)))
    warnings = []
    if hierarchy.n_alternatives > ALTERNATIVES_ADVICE_LIMIT:
        warnings.append(
            f"{hierarchy.n_alternatives} alternatives under comparison: consistent pairwise "
            f"judgment degrades quickly beyond {ALTERNATIVES_ADVICE_LIMIT}; "
            "consider shortlisting before the session"
        )
    return SynthesisResult(
        hierarchy=hierarchy,
        criteria_weights=w,
        local_weights=locals_,
        global_weights=global_w,
        ranking=ranking,
        consistency=consistency,
        warnings=tuple(warnings),
    )
