"""Group multi-criteria decision support with step-wise consistency repair.

Pairwise judgment matrices on the 1/9..9 comparison scale, priority
derivation, consistency diagnostics, geometric-mean group aggregation,
and an iterative protocol that routes the member most responsible for
group inconsistency back to re-judgment until the group ratio clears
the 0.1 bar or budgets run out.
"""

from .consistency import (
    CR_THRESHOLD,
    ORDINAL_TIE_TOL,
    RANDOM_INDEX,
    ConsistencyReport,
    consistency_index,
    consistency_ratio,
    consistency_report,
    judgment_ordinal_violations,
    random_index,
    weight_ordinal_violations,
)
from .errors import (
    AhpError,
    DomainError,
    MalformedDocumentError,
    MigrationNeededError,
    NumericalError,
    ProtocolError,
    StructureError,
    ValidationError,
)
from .group import (
    DecisionMaker,
    InfluenceReport,
    JudgmentSet,
    MemberInfluence,
    aggregate_judgments,
    equal_share,
    geometric_mean,
    group_consistency,
    influence_ranking,
)
from .hierarchy import (
    ALTERNATIVES_ADVICE_LIMIT,
    CRITERIA_KEY,
    EvaluationConsistency,
    FullEvaluation,
    Hierarchy,
    MatrixDiagnosis,
    SynthesisResult,
    alternatives_key,
    evaluation_consistency,
    synthesize_global,
    validate_evaluation,
)
from .matrix import (
    LINGUISTIC_GRADES,
    MAX_ITEMS,
    SAATY_VALUES,
    ComparisonMatrix,
    ValidationResult,
    Violation,
    is_saaty_value,
    reciprocal,
    snap_to_scale,
    validate_matrix,
    validate_rows,
)
from .persistence import (
    FORMAT_VERSION,
    JudgmentsSubmitted,
    RoundAdvanced,
    SessionCreated,
    SessionLog,
    Trajectory,
    canonical_json,
    decode,
    encode,
    read_document,
    replay_session,
    simulation_csv,
    simulation_summary,
    trajectory_csv,
    trajectory_from_state,
    write_document,
)
from .priorities import (
    PriorityResult,
    derive_priorities,
    geometric_mean_weights,
    lambda_max,
    power_iteration,
)
from .protocol import (
    AWAITING_REVISION,
    BUDGET_EXHAUSTED,
    COLLECTING,
    CONVERGED,
    IterationRecord,
    SessionState,
    StopRule,
    advance_round,
    carry_forward,
    session_trajectory,
    start_session,
    submit_judgments,
)
from .simulate import (
    AgentProfile,
    ReplicationResult,
    SimulationConfig,
    SimulationResult,
    consensus_pull_revision,
    generate_judgments,
    paper_like_config,
    run_simulation,
)

__version__ = "0.1.0"
