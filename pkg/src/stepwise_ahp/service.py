"""HTTP session service for live group facilitation.

Thin shell over the protocol module: every state change goes through the
same pure transition functions the CLI uses, and every change appends to the
same canonical event log, so a session driven over HTTP is byte-identical
to one driven in process.

Auth model: creating a session mints one facilitator token plus one token
per member. Member tokens may submit for their own id only; the facilitator
token advances rounds; any session token may read. Tokens live in a sidecar
file next to the session log, never inside it.

Clients stay live by long-polling the state endpoint with the last version
they saw; the server answers when the version moves or the timeout lapses.
"""

from __future__ import annotations

import json
import os
import secrets
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .consistency import ConsistencyReport
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
from .group import aggregate_judgments, influence_ranking
from .hierarchy import (
    EvaluationConsistency,
    FullEvaluation,
    evaluation_consistency,
    synthesize_global,
)
from .persistence import (
    JudgmentsSubmitted,
    RoundAdvanced,
    SessionCreated,
    SessionLog,
    canonical_json,
    decode,
    encode,
    evaluation_payload,
    hierarchy_payload,
    parse_evaluation,
    parse_hierarchy,
    parse_matrix,
    parse_members,
    parse_stop_rule,
    replay_session,
    stop_rule_payload,
    trajectory_from_state,
    trajectory_csv,
    trajectory_payload,
    write_text_atomic,
)
from .protocol import (
    SessionState,
    advance_round,
    carry_forward,
    start_session,
    submit_judgments,
)

DEFAULT_STORE = "./ahp-sessions"
STORE_ENV_VAR = "STEPWISE_AHP_STORE"
MAX_POLL_SECONDS = 30.0


def resolve_store_dir(flag_value: str | None = None) -> str:
    """Store path precedence: environment variable, then flag, then default."""
    return os.environ.get(STORE_ENV_VAR) or flag_value or DEFAULT_STORE


# ---------------------------------------------------------------------------
# views

def _report_view(report: ConsistencyReport) -> dict:
    return {
        "n": report.n,
        "lambda_max": report.lambda_max,
        "consistency_index": report.consistency_index,
        "random_index": report.random_index,
        "consistency_ratio": report.consistency_ratio,
        "ratio_defined": report.ratio_defined,
        "acceptable": report.acceptable,
        "weights": list(report.weights),
        "weight_order_violations": [list(t) for t in report.weight_violations],
        "judgment_order_violations": [list(t) for t in report.judgment_violations],
    }


def consistency_view(ec: EvaluationConsistency) -> dict:
    return {
        "worst_ratio": ec.worst_ratio,
        "worst_key": ec.worst_key,
        "acceptable": ec.acceptable,
        "matrices": [
            {"key": d.key, "stage": d.stage, **_report_view(d.report)}
            for d in ec.diagnoses
        ],
    }


def session_view(state: SessionState, version: int) -> dict:
    """Complete diagnostics snapshot; the UI renders this and computes nothing."""
    members = []
    for m in state.members:
        evaluation = state.judgments.get(m.id)
        members.append(
            {
                "id": m.id,
                "name": m.display_name,
                "submitted": evaluation is not None,
                "revisions_used": state.revision_count(m.id),
                "consistency": None
                if evaluation is None
                else consistency_view(evaluation_consistency(evaluation)),
            }
        )
    view = {
        "version": version,
        "phase": state.phase,
        "round": len(state.log),
        "revision_target": state.revision_target,
        "ready_for_advance": state.ready_for_advance,
        "missing_members": list(state.missing_members()),
        "hierarchy": hierarchy_payload(state.hierarchy),
        "stop_rule": stop_rule_payload(state.stop_rule),
        "members": members,
        "group": None,
        "aggregate": None,
        "influence": None,
        "trajectory": trajectory_payload(trajectory_from_state(state)),
        "ranking": None,
    }
    if not state.missing_members():
        sets = state.current_sets()
        aggregate = aggregate_judgments(sets, state.hierarchy)
        view["aggregate"] = evaluation_payload(aggregate)
        view["group"] = consistency_view(evaluation_consistency(aggregate))
        report = influence_ranking(sets, state.hierarchy)
        view["influence"] = {
            "group_ratio": report.group_ratio,
            "most_influential": report.most_influential,
            "members": [
                {
                    "member": e.member,
                    "own_worst_ratio": e.own_worst_ratio,
                    "leave_one_out_ratio": e.leave_one_out_ratio,
                    "influence": e.influence,
                }
                for e in report.per_member
            ],
        }
        if state.is_final:
            synthesis = synthesize_global(state.hierarchy, aggregate, require_grid=False)
            view["ranking"] = [
                {"alternative": alt, "weight": w}
                for alt, w in synthesis.ranked_alternatives()
            ]
    return view


# ---------------------------------------------------------------------------
# runtime sessions

class _Runtime:
    """One live session: protocol state, its event log, tokens, and a lock.

    The version equals the event count, which makes it stable across process
    restarts (the log is append-only).
    """

    def __init__(self, events: list, state: SessionState, tokens: dict):
        self.events = events
        self.state = state
        self.tokens = tokens
        self.lock = threading.Lock()
        self.changed = threading.Condition(self.lock)

    @property
    def version(self) -> int:
        return len(self.events)


class SessionHub:
    """Registry of live sessions backed by a store directory."""

    def __init__(self, store_dir: str):
        self.store_dir = store_dir
        os.makedirs(store_dir, exist_ok=True)
        self._sessions: dict[str, _Runtime] = {}
        self._registry_lock = threading.Lock()

    def _session_path(self, sid: str) -> str:
        return os.path.join(self.store_dir, f"{sid}.json")

    def _tokens_path(self, sid: str) -> str:
        return os.path.join(self.store_dir, f"{sid}.tokens.json")

    def create(self, created: SessionCreated) -> tuple[str, _Runtime]:
        state = start_session(created.hierarchy, created.members, created.stop_rule)
        sid = secrets.token_urlsafe(9)
        tokens = {
            "facilitator": secrets.token_urlsafe(18),
            "members": {m.id: secrets.token_urlsafe(18) for m in created.members},
        }
        runtime = _Runtime([created], state, tokens)
        with self._registry_lock:
            self._sessions[sid] = runtime
        write_text_atomic(self._session_path(sid), encode(SessionLog(tuple(runtime.events))))
        write_text_atomic(self._tokens_path(sid), canonical_json(tokens))
        return sid, runtime

    def get(self, sid: str) -> _Runtime:
        with self._registry_lock:
            runtime = self._sessions.get(sid)
            if runtime is not None:
                return runtime
        runtime = self._load(sid)
        with self._registry_lock:
            # lost a load race: keep the first one registered
            return self._sessions.setdefault(sid, runtime)

    def _load(self, sid: str) -> _Runtime:
        path = self._session_path(sid)
        tokens_path = self._tokens_path(sid)
        if not os.path.exists(path) or not os.path.exists(tokens_path):
            raise KeyError(sid)
        with open(path, encoding="utf-8") as fh:
            log = decode(fh.read())
        if not isinstance(log, SessionLog):
            raise MalformedDocumentError(f"{path} does not hold a session document")
        with open(tokens_path, encoding="utf-8") as fh:
            tokens = json.load(fh)
        return _Runtime(list(log.events), replay_session(log), tokens)

    def persist(self, sid: str, runtime: _Runtime) -> None:
        write_text_atomic(self._session_path(sid), encode(SessionLog(tuple(runtime.events))))


# ---------------------------------------------------------------------------
# request plumbing

class _HttpFail(Exception):
    def __init__(self, status: int, code: str, message: str, extra: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.extra = extra or {}


def _fail_response(exc: _HttpFail) -> JSONResponse:
    body = {"error": {"code": exc.code, "message": exc.message, **exc.extra}}
    return JSONResponse(status_code=exc.status, content=body)


def _map_error(e: Exception) -> _HttpFail:
    if isinstance(e, ValidationError):
        extra: dict = {"details": e.details()}
        if e.member:
            extra["member"] = e.member
        return _HttpFail(400, e.code, str(e), extra)
    if isinstance(e, ProtocolError):
        return _HttpFail(409, e.code, str(e), {"missing": list(e.missing)})
    if isinstance(e, (StructureError, DomainError, MalformedDocumentError, MigrationNeededError)):
        return _HttpFail(400, e.code, str(e))
    if isinstance(e, NumericalError):
        return _HttpFail(500, e.code, str(e))
    if isinstance(e, AhpError):
        return _HttpFail(400, e.code, str(e))
    raise e


def _bearer_token(request: Request) -> str:
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip()
    raise _HttpFail(403, "bad-token", "missing bearer token")


def _check_any_token(runtime: _Runtime, token: str) -> None:
    candidates = [runtime.tokens["facilitator"], *runtime.tokens["members"].values()]
    if not any(secrets.compare_digest(token, t) for t in candidates):
        raise _HttpFail(403, "bad-token", "token does not belong to this session")


def _check_facilitator(runtime: _Runtime, token: str) -> None:
    if not secrets.compare_digest(token, runtime.tokens["facilitator"]):
        raise _HttpFail(403, "bad-token", "round control requires the facilitator token")


def _member_for_token(runtime: _Runtime, token: str) -> str:
    for member_id, t in runtime.tokens["members"].items():
        if secrets.compare_digest(token, t):
            return member_id
    raise _HttpFail(403, "bad-token", "submissions require a member token")


def _json_body(raw: bytes) -> dict:
    try:
        body = json.loads(raw)
    except json.JSONDecodeError as e:
        raise _HttpFail(400, "malformed", f"request body is not valid JSON: {e}")
    if not isinstance(body, dict):
        raise _HttpFail(400, "malformed", "request body must be a JSON object")
    return body


def _submitted_evaluation(runtime: _Runtime, member_id: str, body: dict) -> FullEvaluation:
    """Body carries either a complete evaluation or a patch over the member's
    last accepted one; the log always records the complete result."""
    has_eval = "evaluation" in body
    has_patch = "patch" in body
    if has_eval == has_patch:
        raise _HttpFail(400, "malformed", "provide exactly one of evaluation or patch")
    if has_eval:
        return parse_evaluation(body["evaluation"])
    patch = body["patch"]
    if not isinstance(patch, dict) or not set(patch) <= {"criteria", "alternatives"}:
        raise _HttpFail(400, "malformed", "patch may only carry criteria and alternatives")
    current = runtime.state.judgments.get(member_id)
    if current is None:
        raise _HttpFail(409, "protocol-order", f"{member_id} has no evaluation to patch yet")
    criteria = None
    if "criteria" in patch:
        criteria = parse_matrix(patch["criteria"], "patch.criteria")
    alternatives = None
    if "alternatives" in patch:
        if not isinstance(patch["alternatives"], dict):
            raise _HttpFail(400, "malformed", "patch.alternatives must be an object")
        alternatives = {
            str(cid): parse_matrix(m, f"patch.alternatives[{cid}]")
            for cid, m in patch["alternatives"].items()
        }
    return carry_forward(current, criteria_matrix=criteria, alternative_matrices=alternatives)


# ---------------------------------------------------------------------------
# app

def create_app(store_dir: str | None = None) -> FastAPI:
    hub = SessionHub(resolve_store_dir(store_dir))
    app = FastAPI(title="stepwise-ahp facilitation service", docs_url=None, redoc_url=None)

    @app.exception_handler(_HttpFail)
    async def _on_fail(request: Request, exc: _HttpFail):  # pragma: no cover - plumbing
        return _fail_response(exc)

    def _runtime_or_404(sid: str) -> _Runtime:
        try:
            return hub.get(sid)
        except KeyError:
            raise _HttpFail(404, "unknown-session", f"no session {sid!r}")
        except AhpError as e:
            raise _map_error(e)

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = _json_body(await request.body())
        if not {"hierarchy", "members", "stop_rule"} <= set(body):
            raise _HttpFail(400, "malformed", "need hierarchy, members and stop_rule")
        try:
            created = SessionCreated(
                hierarchy=parse_hierarchy(body["hierarchy"]),
                members=parse_members(body["members"]),
                stop_rule=parse_stop_rule(body["stop_rule"]),
            )
            sid, runtime = hub.create(created)
        except AhpError as e:
            raise _map_error(e)
        with runtime.lock:
            view = session_view(runtime.state, runtime.version)
        return JSONResponse(
            status_code=201,
            content={
                "session": sid,
                "facilitator_token": runtime.tokens["facilitator"],
                "member_tokens": dict(runtime.tokens["members"]),
                "state": view,
            },
        )

    @app.get("/sessions/{sid}")
    def get_state(sid: str, request: Request, wait_version: int | None = None, timeout: float = 25.0):
        runtime = _runtime_or_404(sid)
        _check_any_token(runtime, _bearer_token(request))
        deadline_wait = max(0.0, min(float(timeout), MAX_POLL_SECONDS))
        with runtime.lock:
            if wait_version is not None and runtime.version <= wait_version:
                runtime.changed.wait(deadline_wait)
            return session_view(runtime.state, runtime.version)

    @app.post("/sessions/{sid}/judgments")
    async def post_judgments(sid: str, request: Request):
        raw = await request.body()
        runtime = _runtime_or_404(sid)
        member_id = _member_for_token(runtime, _bearer_token(request))
        body = _json_body(raw)
        if "member" in body and body["member"] != member_id:
            raise _HttpFail(
                403, "bad-token", f"this token submits for {member_id!r}, not {body['member']!r}"
            )
        with runtime.lock:
            try:
                evaluation = _submitted_evaluation(runtime, member_id, body)
                runtime.state = submit_judgments(runtime.state, member_id, evaluation)
            except AhpError as e:
                raise _map_error(e)
            runtime.events.append(JudgmentsSubmitted(member=member_id, evaluation=evaluation))
            hub.persist(sid, runtime)
            runtime.changed.notify_all()
            return session_view(runtime.state, runtime.version)

    @app.post("/sessions/{sid}/advance")
    async def post_advance(sid: str, request: Request):
        runtime = _runtime_or_404(sid)
        _check_facilitator(runtime, _bearer_token(request))
        with runtime.lock:
            try:
                runtime.state = advance_round(runtime.state)
            except AhpError as e:
                raise _map_error(e)
            runtime.events.append(RoundAdvanced())
            hub.persist(sid, runtime)
            runtime.changed.notify_all()
            return session_view(runtime.state, runtime.version)

    @app.post("/sessions/{sid}/preview")
    async def post_preview(sid: str, request: Request):
        """Consistency diagnostics for an unsubmitted evaluation.

        Lets the grid UI show a live CR per edit without doing any math
        client side. Stateless: nothing is recorded.
        """
        raw = await request.body()
        runtime = _runtime_or_404(sid)
        _check_any_token(runtime, _bearer_token(request))
        body = _json_body(raw)
        if "evaluation" not in body:
            raise _HttpFail(400, "malformed", "need an evaluation to preview")
        try:
            evaluation = parse_evaluation(body["evaluation"])
            evaluation.check_against(runtime.state.hierarchy)
            return consistency_view(evaluation_consistency(evaluation))
        except AhpError as e:
            raise _map_error(e)

    @app.get("/sessions/{sid}/trajectory.csv")
    def get_trajectory(sid: str, request: Request):
        runtime = _runtime_or_404(sid)
        _check_any_token(runtime, _bearer_token(request))
        with runtime.lock:
            csv_text = trajectory_csv(trajectory_from_state(runtime.state))
        return Response(content=csv_text, media_type="text/csv")

    @app.get("/sessions/{sid}/log")
    def get_log(sid: str, request: Request):
        runtime = _runtime_or_404(sid)
        _check_any_token(runtime, _bearer_token(request))
        with runtime.lock:
            document = encode(SessionLog(tuple(runtime.events)))
        return Response(content=document, media_type="application/json")

    return app


def serve(store_dir: str | None, host: str, port: int) -> None:  # pragma: no cover
    import uvicorn

    uvicorn.run(create_app(store_dir), host=host, port=port, log_level="warning")
