"""Command line entry points.

Five subcommands: validate documents, solve a single evaluation, replay a
group session from judgment files, run simulations, serve the HTTP API.

Exit codes are part of the contract:
    0  success
    2  validation or document-format failure
    3  numerical failure (eigensolver did not converge)
    4  protocol-order failure
    5  I/O failure (unreadable or unwritable paths)

All output is deterministic for fixed inputs and seed: floats are printed
with fixed precision and every file goes through the canonical encoder.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .consistency import CR_THRESHOLD, ConsistencyReport
from .errors import (
    DomainError,
    MalformedDocumentError,
    MigrationNeededError,
    NumericalError,
    ProtocolError,
    StructureError,
    ValidationError,
)
from .group import DecisionMaker, JudgmentSet, aggregate_judgments
from .hierarchy import (
    ALTERNATIVES_ADVICE_LIMIT,
    Hierarchy,
    evaluation_consistency,
    synthesize_global,
)
from .persistence import (
    JudgmentsSubmitted,
    RoundAdvanced,
    SessionCreated,
    SessionLog,
    Trajectory,
    canonical_json,
    encode,
    read_document,
    simulation_csv,
    simulation_summary,
    trajectory_csv,
    trajectory_from_state,
    write_text_atomic,
)
from .protocol import StopRule, advance_round, start_session, submit_judgments
from .simulate import SimulationConfig, run_simulation

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_PROTOCOL = 4
EXIT_IO = 5

_VALIDATION_ERRORS = (
    ValidationError,
    StructureError,
    DomainError,
    MalformedDocumentError,
    MigrationNeededError,
)


def _verdict(report: ConsistencyReport) -> str:
    if not report.ratio_defined:
        return f"ratio undefined for n={report.n}, treated acceptable"
    cr = report.consistency_ratio
    if report.acceptable:
        return f"acceptable ({cr:.4g} < {CR_THRESHOLD})"
    return f"inconsistent ({cr:.4g} >= {CR_THRESHOLD})"


def _read_as(path: str, expected_type, kind_name: str):
    document = read_document(path)
    if not isinstance(document, expected_type):
        raise MalformedDocumentError(
            f"{path} holds a {type(document).__name__} document, expected {kind_name}"
        )
    return document


def _warn_alternatives(hierarchy: Hierarchy, enabled: bool) -> None:
    if enabled and hierarchy.n_alternatives > ALTERNATIVES_ADVICE_LIMIT:
        print(
            f"note: {hierarchy.n_alternatives} alternatives; pairwise comparison "
            f"is most reliable with at most {ALTERNATIVES_ADVICE_LIMIT}",
            file=sys.stderr,
        )


def _print_matrix_diagnostics(judgment_set: JudgmentSet, method: str) -> None:
    diagnosis = evaluation_consistency(judgment_set.evaluation, method=method)
    for d in diagnosis.diagnoses:
        r = d.report
        print(
            f"  {d.key} ({d.stage}): n={r.n} lambda_max={r.lambda_max:.6f} "
            f"CI={r.consistency_index:.6f} CR={r.consistency_ratio:.6f} {_verdict(r)}"
        )
        if r.judgment_violations:
            triples = " ".join(str(t) for t in r.judgment_violations)
            print(f"    order violations in judgments: {triples}")


def _cmd_validate(args) -> int:
    for path in args.paths:
        document = read_document(path)
        name = type(document).__name__
        if isinstance(document, JudgmentSet):
            print(f"{path}: judgment-set owned by {document.owner}")
            _print_matrix_diagnostics(document, args.method)
        elif isinstance(document, Hierarchy):
            print(
                f"{path}: hierarchy {document.goal_id!r} with "
                f"{document.n_criteria} criteria, {document.n_alternatives} alternatives"
            )
            _warn_alternatives(document, args.warn_alternatives)
        else:
            print(f"{path}: valid {name} document")
    return EXIT_OK


def _cmd_solve(args) -> int:
    hierarchy = _read_as(args.hierarchy, Hierarchy, "hierarchy")
    judgment_set = _read_as(args.judgments, JudgmentSet, "judgment-set")
    judgment_set.evaluation.check_against(hierarchy)
    result = synthesize_global(hierarchy, judgment_set.evaluation, method=args.method)
    _warn_alternatives(hierarchy, args.warn_alternatives)

    print(f"criteria weights ({args.method}):")
    for cid, w in zip(hierarchy.criteria, result.criteria_weights):
        print(f"  {cid}  {w:.6f}")
    diagnosis = result.consistency
    for d in diagnosis.diagnoses:
        print(f"consistency {d.key}: CR={d.report.consistency_ratio:.6f} {_verdict(d.report)}")
    for cid, local in zip(hierarchy.criteria, result.local_weights):
        print(f"local weights under {cid}:")
        for aid, w in zip(hierarchy.alternatives, local):
            print(f"  {aid}  {w:.6f}")
    print("global ranking:")
    for place, (aid, w) in enumerate(result.ranked_alternatives(), start=1):
        print(f"  {place}. {aid}  {w:.6f}")
    if not diagnosis.acceptable:
        print(
            f"warning: worst CR {diagnosis.worst_ratio:.6f} ({diagnosis.worst_key}) "
            "exceeds the 0.1 threshold; ranking is unreliable",
            file=sys.stderr,
        )
    return EXIT_OK


def _parse_revisions(specs: list[str]) -> dict[str, list[str]]:
    queues: dict[str, list[str]] = {}
    for spec in specs:
        member, sep, path = spec.partition("=")
        if not sep or not member or not path:
            raise DomainError(f"--revise expects member=path, got {spec!r}")
        queues.setdefault(member, []).append(path)
    return queues


def _cmd_group(args) -> int:
    hierarchy = _read_as(args.hierarchy, Hierarchy, "hierarchy")
    judgment_sets = [_read_as(p, JudgmentSet, "judgment-set") for p in args.judgments]
    members = tuple(DecisionMaker(id=js.owner) for js in judgment_sets)
    rule = StopRule(
        cr_threshold=args.cr_threshold,
        max_group_iterations=args.max_rounds,
        max_per_member_revisions=args.max_revisions,
    )
    revisions = _parse_revisions(args.revise)
    for member in revisions:
        if member not in {m.id for m in members}:
            raise DomainError(f"--revise names unknown member {member!r}")

    state = start_session(hierarchy, members, rule)
    events = [SessionCreated(hierarchy=hierarchy, members=members, stop_rule=rule)]
    for js in judgment_sets:
        state = submit_judgments(state, js.owner, js.evaluation)
        events.append(JudgmentsSubmitted(member=js.owner, evaluation=js.evaluation))

    while not state.is_final:
        state = advance_round(state)
        events.append(RoundAdvanced())
        if state.is_final:
            break
        target = state.revision_target
        queue = revisions.get(target, [])
        if queue:
            revision_set = _read_as(queue.pop(0), JudgmentSet, "judgment-set")
            if revision_set.owner != target:
                raise DomainError(
                    f"revision file for {target!r} is owned by {revision_set.owner!r}"
                )
            evaluation = revision_set.evaluation
        else:
            # no scripted revision: the member stands by their judgments
            evaluation = state.judgments[target]
        state = submit_judgments(state, target, evaluation)
        events.append(JudgmentsSubmitted(member=target, evaluation=evaluation))

    trajectory = trajectory_from_state(state)
    if trajectory.initial_cr is not None:
        print(f"initial group CR: {trajectory.initial_cr:.6f}")
    for rnd, cr, target in trajectory.rounds:
        print(f"round {rnd}: revised {target}, group CR {cr:.6f}")
    print(f"phase: {state.phase}")
    aggregate = aggregate_judgments(state.current_sets(), hierarchy)
    synthesis = synthesize_global(hierarchy, aggregate, require_grid=False)
    _warn_alternatives(hierarchy, args.warn_alternatives)
    print("group ranking:")
    for place, (aid, w) in enumerate(synthesis.ranked_alternatives(), start=1):
        print(f"  {place}. {aid}  {w:.6f}")

    if args.csv:
        write_text_atomic(args.csv, trajectory_csv(trajectory))
    if args.log:
        write_text_atomic(args.log, encode(SessionLog(tuple(events))))
    if args.trajectory:
        write_text_atomic(args.trajectory, encode(trajectory))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    config = _read_as(args.config, SimulationConfig, "simulation-config")
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.replications is not None:
        overrides["replications"] = args.replications
    if overrides:
        config = dataclasses.replace(config, **overrides)
    result = run_simulation(config)
    print(
        f"replications {config.replications}  "
        f"mean initial CR {result.mean_initial_cr:.6f}  "
        f"mean final CR {result.mean_final_cr:.6f}"
    )
    for phase, count in result.phase_counts:
        print(f"  {phase}: {count}")
    if args.csv:
        write_text_atomic(args.csv, simulation_csv(result))
    if args.summary:
        write_text_atomic(args.summary, canonical_json(simulation_summary(result)))
    return EXIT_OK


def _cmd_serve(args) -> int:  # pragma: no cover - blocks on uvicorn
    from .service import serve

    serve(args.store, args.host, args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stepwise-ahp",
        description="Group decision support: pairwise judgments, consistency "
        "diagnostics, step-wise revision sessions, simulation, HTTP service.",
    )
    parser.add_argument(
        "--json-errors",
        action="store_true",
        help="emit failures as one JSON object on stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="decode documents and print per-matrix diagnostics")
    p.add_argument("paths", nargs="+")
    p.add_argument("--method", choices=("eigenvector", "geometric-mean"), default="eigenvector")
    p.add_argument("--warn-alternatives", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("solve", help="derive weights, consistency verdicts and the ranking")
    p.add_argument("judgments", help="judgment-set document")
    p.add_argument("--hierarchy", required=True, help="hierarchy document")
    p.add_argument("--method", choices=("eigenvector", "geometric-mean"), default="eigenvector")
    p.add_argument("--warn-alternatives", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("group", help="replay a group session from judgment-set files")
    p.add_argument("judgments", nargs="+", help="one judgment-set document per member")
    p.add_argument("--hierarchy", required=True)
    p.add_argument(
        "--revise",
        action="append",
        default=[],
        metavar="MEMBER=PATH",
        help="queue a scripted revision; an unscripted target resubmits unchanged",
    )
    p.add_argument("--cr-threshold", type=float, default=0.1)
    p.add_argument("--max-rounds", type=int, default=10)
    p.add_argument("--max-revisions", type=int, default=3)
    p.add_argument("--csv", help="write the trajectory CSV here")
    p.add_argument("--log", help="write the canonical session log here")
    p.add_argument("--trajectory", help="write the trajectory document here")
    p.add_argument("--warn-alternatives", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=_cmd_group)

    p = sub.add_parser("simulate", help="run a simulation-config document")
    p.add_argument("config")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--replications", type=int, help="override the replication count")
    p.add_argument("--csv", help="write per-replication trajectories here")
    p.add_argument("--summary", help="write the JSON run summary here")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP facilitation service")
    p.add_argument("--store", default=None, help="session store directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.set_defaults(func=_cmd_serve)

    return parser


def _report_failure(e: Exception, code: int, json_errors: bool) -> int:
    if json_errors:
        body: dict = {"code": getattr(e, "code", "io"), "message": str(e)}
        if isinstance(e, ValidationError):
            body["details"] = e.details()
            if e.member:
                body["member"] = e.member
        if isinstance(e, ProtocolError) and e.missing:
            body["missing"] = list(e.missing)
        sys.stderr.write(canonical_json({"error": body}))
    else:
        sys.stderr.write(f"error: {e}\n")
        if isinstance(e, ValidationError):
            for d in e.details():
                sys.stderr.write(
                    f"  cell ({d['row']},{d['col']}) in {d['matrix'] or 'matrix'}: {d['message']}\n"
                )
    return code


def run_cli(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as e:
        return _report_failure(e, EXIT_VALIDATION, args.json_errors)
    except NumericalError as e:
        return _report_failure(e, EXIT_NUMERICAL, args.json_errors)
    except ProtocolError as e:
        return _report_failure(e, EXIT_PROTOCOL, args.json_errors)
    except OSError as e:
        return _report_failure(e, EXIT_IO, args.json_errors)


def entrypoint() -> None:  # pragma: no cover - console script shim
    sys.exit(run_cli())
