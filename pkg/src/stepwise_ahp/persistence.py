"""Canonical file formats and session storage.

Every persisted document is a JSON envelope:

    {"format_version": "1.0.0", "kind": "<kind>", "payload": {...}}

with kind one of: hierarchy, judgment-set, session, simulation-config,
trajectory. Encoding is canonical: keys sorted, compact separators, ASCII,
one trailing newline, so equal documents have byte-identical encodings.

Matrix entries travel as exact rational strings "p/q" in lowest terms
("3/1", never "3" or "0.333"): floats would silently break the exact
reciprocity the whole pipeline relies on. decode accepts only what encode
produces; it validates everything and repairs nothing.

Sessions persist as append-only event logs (created / submitted / advanced)
and are reconstructed by replaying the events through the protocol.
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import (
    MalformedDocumentError,
    MigrationNeededError,
    ValidationError,
)
from .group import DecisionMaker, JudgmentSet, group_consistency
from .hierarchy import FullEvaluation, Hierarchy
from .matrix import ComparisonMatrix, scan_entries
from .protocol import (
    CONVERGED,
    SessionState,
    StopRule,
    advance_round,
    start_session,
    submit_judgments,
)
from .simulate import AgentProfile, SimulationConfig, SimulationResult

FORMAT_VERSION = "1.0.0"

KIND_HIERARCHY = "hierarchy"
KIND_JUDGMENT_SET = "judgment-set"
KIND_SESSION = "session"
KIND_SIMULATION_CONFIG = "simulation-config"
KIND_TRAJECTORY = "trajectory"

_RATIONAL_RE = re.compile(r"^([1-9][0-9]*)/([1-9][0-9]*)$")


def canonical_json(obj) -> str:
    """Canonical serialization: sorted keys, compact, ASCII, newline-terminated."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True, allow_nan=False) + "\n"


def format_fraction(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def parse_fraction(text, where: str = "entry") -> Fraction:
    """Parse an exact rational string; reject anything else.

    Only "p/q" in lowest terms is accepted. Floats, bare integers, and
    reducible fractions are refused: the format has exactly one spelling per
    value so that round-trips are byte-exact.
    """
    if not isinstance(text, str):
        raise MalformedDocumentError(
            f"{where}: matrix entries must be rational strings \"p/q\", got {text!r}"
        )
    m = _RATIONAL_RE.match(text)
    if not m:
        raise MalformedDocumentError(
            f"{where}: {text!r} is not a rational string \"p/q\""
        )
    num, den = int(m.group(1)), int(m.group(2))
    f = Fraction(num, den)
    if (f.numerator, f.denominator) != (num, den):
        raise MalformedDocumentError(
            f"{where}: {text!r} is not in lowest terms (expected {format_fraction(f)})"
        )
    return f


# ---------------------------------------------------------------------------
# matrices and evaluations

def matrix_payload(m: ComparisonMatrix) -> dict:
    return {
        "labels": list(m.labels),
        "rows": [[format_fraction(v) for v in row] for row in m.entries],
    }


def parse_matrix(obj, where: str, require_grid: bool = True) -> ComparisonMatrix:
    if not isinstance(obj, dict) or set(obj) != {"labels", "rows"}:
        raise MalformedDocumentError(f"{where}: matrix must be an object with labels and rows")
    labels = obj["labels"]
    rows = obj["rows"]
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise MalformedDocumentError(f"{where}: labels must be a list of strings")
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise MalformedDocumentError(f"{where}: rows must be a list of lists")
    n = len(rows)
    if n < 2 or any(len(r) != n for r in rows) or len(labels) != n:
        raise MalformedDocumentError(
            f"{where}: expected a square matrix with one label per row, got {n} rows"
        )
    parsed = [
        [parse_fraction(cell, f"{where} cell ({i},{j})") for j, cell in enumerate(row)]
        for i, row in enumerate(rows)
    ]
    violations = scan_entries(parsed, require_grid=require_grid)
    if violations:
        raise ValidationError(
            f"{where}: matrix violates judgment invariants",
            violations=violations,
            matrix=where,
        )
    return ComparisonMatrix(parsed, labels)


def evaluation_payload(e: FullEvaluation) -> dict:
    return {
        "criteria": matrix_payload(e.criteria_matrix),
        "alternatives": {
            cid: matrix_payload(m)
            for cid, m in zip(e.criteria_matrix.labels, e.alternative_matrices)
        },
    }


def parse_evaluation(obj, where: str = "evaluation", require_grid: bool = True) -> FullEvaluation:
    if not isinstance(obj, dict) or set(obj) != {"criteria", "alternatives"}:
        raise MalformedDocumentError(
            f"{where}: evaluation must be an object with criteria and alternatives"
        )
    criteria = parse_matrix(obj["criteria"], f"{where}.criteria", require_grid=require_grid)
    alts = obj["alternatives"]
    if not isinstance(alts, dict):
        raise MalformedDocumentError(f"{where}: alternatives must be an object keyed by criterion")
    if set(alts) != set(criteria.labels):
        raise MalformedDocumentError(
            f"{where}: alternatives keys {sorted(alts)} do not match criteria {sorted(criteria.labels)}"
        )
    matrices = tuple(
        parse_matrix(alts[cid], f"{where}.alternatives[{cid}]", require_grid=require_grid)
        for cid in criteria.labels
    )
    return FullEvaluation(criteria_matrix=criteria, alternative_matrices=matrices)


# ---------------------------------------------------------------------------
# session event log

@dataclass(frozen=True)
class SessionCreated:
    hierarchy: Hierarchy
    members: tuple[DecisionMaker, ...]
    stop_rule: StopRule


@dataclass(frozen=True)
class JudgmentsSubmitted:
    member: str
    evaluation: FullEvaluation


@dataclass(frozen=True)
class RoundAdvanced:
    pass


SessionEvent = SessionCreated | JudgmentsSubmitted | RoundAdvanced


@dataclass(frozen=True)
class SessionLog:
    """The complete persisted history of one session, oldest event first."""

    events: tuple[SessionEvent, ...]

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events or not isinstance(self.events[0], SessionCreated):
            raise MalformedDocumentError("a session log must start with a creation event")
        if any(isinstance(e, SessionCreated) for e in self.events[1:]):
            raise MalformedDocumentError("a session log may contain only one creation event")


def replay_session(log: SessionLog) -> SessionState:
    """Rebuild the in-memory state by running the events through the protocol.

    Any protocol-order or validation error during replay means the log was
    not produced by these rules; it propagates unchanged.
    """
    created = log.events[0]
    state = start_session(created.hierarchy, created.members, created.stop_rule)
    for event in log.events[1:]:
        if isinstance(event, JudgmentsSubmitted):
            state = submit_judgments(state, event.member, event.evaluation)
        elif isinstance(event, RoundAdvanced):
            state = advance_round(state)
        else:
            raise MalformedDocumentError(f"unexpected session event {event!r}")
    return state


# ---------------------------------------------------------------------------
# trajectory

@dataclass(frozen=True)
class Trajectory:
    """CR-per-round series of one session.

    `initial_cr` is the group ratio before any revision (None while the
    session is still collecting); each round carries the ratio measured
    after its revision and who revised.
    """

    initial_cr: float | None
    rounds: tuple[tuple[int, float, str], ...]


def trajectory_from_state(state: SessionState) -> Trajectory:
    if state.log:
        initial = state.log[0].group_cr_before
    elif state.phase == CONVERGED:
        # converged before any revision round: the only measured ratio is the
        # current one
        initial = group_consistency(state.current_sets(), state.hierarchy).worst_ratio
    else:
        initial = None
    rounds = tuple(
        (r.round, r.group_cr_after if r.group_cr_after is not None else r.group_cr_before, r.target_member)
        for r in state.log
    )
    return Trajectory(initial_cr=initial, rounds=rounds)


def trajectory_csv(trajectory: Trajectory) -> str:
    """CSV serialization: round,group_cr,target_member; round 0 is the start."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["round", "group_cr", "target_member"])
    if trajectory.initial_cr is not None:
        w.writerow([0, float(trajectory.initial_cr), ""])
    for rnd, cr, target in trajectory.rounds:
        w.writerow([rnd, float(cr), target])
    return buf.getvalue()


def simulation_csv(result: SimulationResult) -> str:
    """Per-replication trajectories: replication,round,group_cr,target_member."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["replication", "round", "group_cr", "target_member"])
    for rep in result.replications:
        w.writerow([rep.replication, 0, float(rep.initial_cr), ""])
        for rnd, cr, target in rep.rounds:
            w.writerow([rep.replication, rnd, float(cr), target])
    return buf.getvalue()


def simulation_summary(result: SimulationResult) -> dict:
    """JSON-ready run summary with the config echoed for provenance."""
    return {
        "config": simulation_config_payload(result.config),
        "mean_initial_cr": result.mean_initial_cr,
        "mean_final_cr": result.mean_final_cr,
        "mean_cr_by_round": [
            {"round": rnd, "group_cr": cr} for rnd, cr in result.mean_cr_by_round
        ],
        "phases": {phase: count for phase, count in result.phase_counts},
        "replications": [
            {
                "replication": rep.replication,
                "initial_cr": rep.initial_cr,
                "final_cr": rep.final_cr,
                "phase": rep.phase,
                "rounds": [
                    {"round": rnd, "group_cr": cr, "target_member": target}
                    for rnd, cr, target in rep.rounds
                ],
            }
            for rep in result.replications
        ],
    }


# ---------------------------------------------------------------------------
# payload builders and parsers per kind

def hierarchy_payload(h: Hierarchy) -> dict:
    return {
        "goal": {"id": h.goal_id, "name": h.goal_name},
        "criteria": list(h.criteria),
        "alternatives": list(h.alternatives),
    }


def parse_hierarchy(obj) -> Hierarchy:
    if not isinstance(obj, dict) or set(obj) != {"goal", "criteria", "alternatives"}:
        raise MalformedDocumentError("hierarchy payload must have goal, criteria, alternatives")
    goal = obj["goal"]
    if not isinstance(goal, dict) or set(goal) != {"id", "name"}:
        raise MalformedDocumentError("hierarchy goal must be an object with id and name")
    for key in ("criteria", "alternatives"):
        if not isinstance(obj[key], list) or not all(isinstance(x, str) for x in obj[key]):
            raise MalformedDocumentError(f"hierarchy {key} must be a list of strings")
    if not isinstance(goal["id"], str) or not isinstance(goal["name"], str):
        raise MalformedDocumentError("hierarchy goal id and name must be strings")
    return Hierarchy(
        goal_id=goal["id"],
        goal_name=goal["name"],
        criteria=tuple(obj["criteria"]),
        alternatives=tuple(obj["alternatives"]),
    )


def _judgment_set_payload(js: JudgmentSet) -> dict:
    return {"owner": js.owner, "evaluation": evaluation_payload(js.evaluation)}


def _parse_judgment_set(obj) -> JudgmentSet:
    if not isinstance(obj, dict) or set(obj) != {"owner", "evaluation"}:
        raise MalformedDocumentError("judgment-set payload must have owner and evaluation")
    if not isinstance(obj["owner"], str) or not obj["owner"]:
        raise MalformedDocumentError("judgment-set owner must be a non-empty string")
    return JudgmentSet(owner=obj["owner"], evaluation=parse_evaluation(obj["evaluation"]))


def stop_rule_payload(rule: StopRule) -> dict:
    return {
        "cr_threshold": float(rule.cr_threshold),
        "max_group_iterations": rule.max_group_iterations,
        "max_per_member_revisions": rule.max_per_member_revisions,
    }


def _require_number(obj, key: str, where: str) -> float:
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedDocumentError(f"{where}: {key} must be a number")
    return float(v)


def _require_int(obj, key: str, where: str) -> int:
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise MalformedDocumentError(f"{where}: {key} must be an integer")
    return v


def parse_stop_rule(obj, where: str = "stop_rule") -> StopRule:
    if not isinstance(obj, dict) or set(obj) != {
        "cr_threshold",
        "max_group_iterations",
        "max_per_member_revisions",
    }:
        raise MalformedDocumentError(f"{where}: expected the three stop-rule fields")
    return StopRule(
        cr_threshold=_require_number(obj, "cr_threshold", where),
        max_group_iterations=_require_int(obj, "max_group_iterations", where),
        max_per_member_revisions=_require_int(obj, "max_per_member_revisions", where),
    )


def members_payload(members: Sequence[DecisionMaker]) -> list:
    return [{"id": m.id, "name": m.display_name} for m in members]


def parse_members(obj, where: str = "members") -> tuple[DecisionMaker, ...]:
    if not isinstance(obj, list):
        raise MalformedDocumentError(f"{where}: must be a list")
    out = []
    for i, m in enumerate(obj):
        if not isinstance(m, dict) or set(m) != {"id", "name"}:
            raise MalformedDocumentError(f"{where}[{i}]: member must have id and name")
        if not isinstance(m["id"], str) or not isinstance(m["name"], str):
            raise MalformedDocumentError(f"{where}[{i}]: member id and name must be strings")
        out.append(DecisionMaker(id=m["id"], display_name=m["name"]))
    return tuple(out)


def _session_payload(log: SessionLog) -> dict:
    events = []
    for e in log.events:
        if isinstance(e, SessionCreated):
            events.append(
                {
                    "event": "session-created",
                    "hierarchy": hierarchy_payload(e.hierarchy),
                    "members": members_payload(e.members),
                    "stop_rule": stop_rule_payload(e.stop_rule),
                }
            )
        elif isinstance(e, JudgmentsSubmitted):
            events.append(
                {
                    "event": "judgments-submitted",
                    "member": e.member,
                    "evaluation": evaluation_payload(e.evaluation),
                }
            )
        else:
            events.append({"event": "round-advanced"})
    return {"events": events}


def _parse_session(obj) -> SessionLog:
    if not isinstance(obj, dict) or set(obj) != {"events"}:
        raise MalformedDocumentError("session payload must be an object with events")
    raw = obj["events"]
    if not isinstance(raw, list) or not raw:
        raise MalformedDocumentError("session events must be a non-empty list")
    events: list[SessionEvent] = []
    for i, e in enumerate(raw):
        where = f"events[{i}]"
        if not isinstance(e, dict) or "event" not in e:
            raise MalformedDocumentError(f"{where}: each event needs an event field")
        kind = e["event"]
        if kind == "session-created":
            if set(e) != {"event", "hierarchy", "members", "stop_rule"}:
                raise MalformedDocumentError(f"{where}: bad session-created fields")
            events.append(
                SessionCreated(
                    hierarchy=parse_hierarchy(e["hierarchy"]),
                    members=parse_members(e["members"], f"{where}.members"),
                    stop_rule=parse_stop_rule(e["stop_rule"], f"{where}.stop_rule"),
                )
            )
        elif kind == "judgments-submitted":
            if set(e) != {"event", "member", "evaluation"}:
                raise MalformedDocumentError(f"{where}: bad judgments-submitted fields")
            if not isinstance(e["member"], str):
                raise MalformedDocumentError(f"{where}: member must be a string")
            events.append(
                JudgmentsSubmitted(
                    member=e["member"],
                    evaluation=parse_evaluation(e["evaluation"], f"{where}.evaluation"),
                )
            )
        elif kind == "round-advanced":
            if set(e) != {"event"}:
                raise MalformedDocumentError(f"{where}: round-advanced carries no fields")
            events.append(RoundAdvanced())
        else:
            raise MalformedDocumentError(f"{where}: unknown event {kind!r}")
    return SessionLog(events=tuple(events))


def _weights_map_payload(m: Mapping[str, tuple[float, ...]]) -> dict:
    return {k: [float(x) for x in v] for k, v in m.items()}


def _bias_map_payload(m: Mapping[str, tuple[tuple[float, ...], ...]]) -> dict:
    return {k: [[float(x) for x in row] for row in rows] for k, rows in m.items()}


def _profile_payload(p: AgentProfile) -> dict:
    return {
        "base_weights": _weights_map_payload(p.base_weights),
        "noise_level": float(p.noise_level),
        "compliance": float(p.compliance),
        "bias": _bias_map_payload(p.bias),
    }


def _parse_number_list(obj, where: str) -> tuple[float, ...]:
    if not isinstance(obj, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj
    ):
        raise MalformedDocumentError(f"{where}: expected a list of numbers")
    return tuple(float(x) for x in obj)


def _parse_profile(obj, where: str) -> AgentProfile:
    if not isinstance(obj, dict) or set(obj) != {"base_weights", "noise_level", "compliance", "bias"}:
        raise MalformedDocumentError(
            f"{where}: profile must have base_weights, noise_level, compliance, bias"
        )
    bw = obj["base_weights"]
    bias = obj["bias"]
    if not isinstance(bw, dict) or not isinstance(bias, dict):
        raise MalformedDocumentError(f"{where}: base_weights and bias must be objects")
    base_weights = {
        str(k): _parse_number_list(v, f"{where}.base_weights[{k}]") for k, v in bw.items()
    }
    bias_map = {}
    for k, rows in bias.items():
        if not isinstance(rows, list):
            raise MalformedDocumentError(f"{where}.bias[{k}]: expected a list of rows")
        bias_map[str(k)] = tuple(
            _parse_number_list(row, f"{where}.bias[{k}][{i}]") for i, row in enumerate(rows)
        )
    return AgentProfile(
        base_weights=base_weights,
        noise_level=_require_number(obj, "noise_level", where),
        compliance=_require_number(obj, "compliance", where),
        bias=bias_map,
    )


def simulation_config_payload(cfg: SimulationConfig) -> dict:
    return {
        "criteria_count": cfg.criteria_count,
        "alternatives_count": cfg.alternatives_count,
        "profiles": [_profile_payload(p) for p in cfg.profiles],
        "stop_rule": stop_rule_payload(cfg.stop_rule),
        "seed": cfg.seed,
        "replications": cfg.replications,
    }


def _parse_simulation_config(obj) -> SimulationConfig:
    expected = {"criteria_count", "alternatives_count", "profiles", "stop_rule", "seed", "replications"}
    if not isinstance(obj, dict) or set(obj) != expected:
        raise MalformedDocumentError(f"simulation-config payload must have fields {sorted(expected)}")
    if not isinstance(obj["profiles"], list):
        raise MalformedDocumentError("simulation-config profiles must be a list")
    return SimulationConfig(
        criteria_count=_require_int(obj, "criteria_count", "simulation-config"),
        alternatives_count=_require_int(obj, "alternatives_count", "simulation-config"),
        profiles=tuple(
            _parse_profile(p, f"profiles[{i}]") for i, p in enumerate(obj["profiles"])
        ),
        stop_rule=parse_stop_rule(obj["stop_rule"]),
        seed=_require_int(obj, "seed", "simulation-config"),
        replications=_require_int(obj, "replications", "simulation-config"),
    )


def trajectory_payload(t: Trajectory) -> dict:
    return {
        "initial_cr": None if t.initial_cr is None else float(t.initial_cr),
        "rounds": [
            {"round": rnd, "group_cr": float(cr), "target_member": target}
            for rnd, cr, target in t.rounds
        ],
    }


def _parse_trajectory(obj) -> Trajectory:
    if not isinstance(obj, dict) or set(obj) != {"initial_cr", "rounds"}:
        raise MalformedDocumentError("trajectory payload must have initial_cr and rounds")
    initial = obj["initial_cr"]
    if initial is not None and (isinstance(initial, bool) or not isinstance(initial, (int, float))):
        raise MalformedDocumentError("trajectory initial_cr must be a number or null")
    if not isinstance(obj["rounds"], list):
        raise MalformedDocumentError("trajectory rounds must be a list")
    rounds = []
    for i, r in enumerate(obj["rounds"]):
        where = f"rounds[{i}]"
        if not isinstance(r, dict) or set(r) != {"round", "group_cr", "target_member"}:
            raise MalformedDocumentError(f"{where}: bad round fields")
        if not isinstance(r["target_member"], str):
            raise MalformedDocumentError(f"{where}: target_member must be a string")
        rounds.append(
            (_require_int(r, "round", where), _require_number(r, "group_cr", where), r["target_member"])
        )
    if [r[0] for r in rounds] != list(range(1, len(rounds) + 1)):
        raise MalformedDocumentError("trajectory rounds must be numbered 1..k in order")
    return Trajectory(
        initial_cr=None if initial is None else float(initial), rounds=tuple(rounds)
    )


# ---------------------------------------------------------------------------
# envelope

_ENCODERS = {
    Hierarchy: (KIND_HIERARCHY, hierarchy_payload),
    JudgmentSet: (KIND_JUDGMENT_SET, _judgment_set_payload),
    SessionLog: (KIND_SESSION, _session_payload),
    SimulationConfig: (KIND_SIMULATION_CONFIG, simulation_config_payload),
    Trajectory: (KIND_TRAJECTORY, trajectory_payload),
}

_PARSERS = {
    KIND_HIERARCHY: parse_hierarchy,
    KIND_JUDGMENT_SET: _parse_judgment_set,
    KIND_SESSION: _parse_session,
    KIND_SIMULATION_CONFIG: _parse_simulation_config,
    KIND_TRAJECTORY: _parse_trajectory,
}

Document = Hierarchy | JudgmentSet | SessionLog | SimulationConfig | Trajectory


def encode(document: Document) -> str:
    """Canonical envelope text for any persistable document.

    Documents are re-validated through their payload parser before encoding,
    so an invariant-violating value is refused rather than written.
    """
    for cls, (kind, build) in _ENCODERS.items():
        if isinstance(document, cls):
            payload = build(document)
            _PARSERS[kind](payload)  # refuse to encode what decode would refuse
            return canonical_json(
                {"format_version": FORMAT_VERSION, "kind": kind, "payload": payload}
            )
    raise MalformedDocumentError(f"cannot encode {type(document).__name__}")


def decode(text: str) -> Document:
    """Parse and fully validate one canonical document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedDocumentError(f"not valid JSON: {e}") from None
    if not isinstance(obj, dict):
        raise MalformedDocumentError("document must be a JSON object")
    if set(obj) != {"format_version", "kind", "payload"}:
        raise MalformedDocumentError(
            "document must have exactly format_version, kind and payload"
        )
    version = obj["format_version"]
    if not isinstance(version, str):
        raise MalformedDocumentError("format_version must be a string")
    if version != FORMAT_VERSION:
        raise MigrationNeededError(
            f"document format {version!r} is not supported (this build speaks {FORMAT_VERSION})"
        )
    kind = obj["kind"]
    if kind not in _PARSERS:
        raise MalformedDocumentError(f"unknown document kind {kind!r}")
    return _PARSERS[kind](obj["payload"])


# ---------------------------------------------------------------------------
# files

def write_text_atomic(path: str, text: str) -> None:
    """Write via a temp file in the same directory plus rename.

    Readers never observe a half-written file; the rename either happens
    fully or not at all.
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_document(path: str, document: Document) -> None:
    write_text_atomic(path, encode(document))


def read_document(path: str) -> Document:
    with open(path, encoding="utf-8") as fh:
        return decode(fh.read())
