"""Headless entry points: scripted-agent simulations, log analytics,
questionnaire grading, and profile clustering.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import agents, assessment, config
from .assessment import AnswerProfile, AssessmentResult, cluster_profiles, cohort_stats, pre_post_delta
from .engine import GameContent, GameEngine
from .telemetry import EventKind, EventLog, TelemetryError, timing_report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; we reserve 2 for data errors
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="densitylab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="play a full agent session and write its log")
    sim.add_argument("--catalog", help="catalog config file (default: shipped catalog)")
    sim.add_argument("--policy", required=True, choices=agents.POLICY_NAMES)
    sim.add_argument("--script", help="script file for --policy scripted")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--out", required=True, help="log file to write")
    sim.add_argument("--participant", help="participant id (default: agent-<seed>)")

    ana = sub.add_parser("analyze", help="timing and pre/post reports over a directory of logs")
    ana.add_argument("--in", dest="in_dir", required=True, help="directory of session logs")
    ana.add_argument("--format", choices=("table", "machine"), default="table")

    grd = sub.add_parser("grade", help="grade a responses file against an item bank")
    grd.add_argument("--responses", required=True)
    grd.add_argument("--bank", help="item bank file (default: shipped bank)")

    clu = sub.add_parser("cluster", help="cluster answer profiles by similarity")
    clu.add_argument("--responses", required=True)
    clu.add_argument("--bank", help="item bank file (default: shipped bank)")
    clu.add_argument("--threshold", type=float, required=True)

    srv = sub.add_parser("serve", help="serve the web UI and the game protocol over HTTP")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--frontend", help="directory of built UI files to serve at /")
    return parser


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _load_content(catalog_path: str | None, bank_path: str | None = None) -> GameContent:
    catalog = config.load_catalog(catalog_path) if catalog_path else config.default_catalog()
    bank = config.load_question_bank(bank_path) if bank_path else config.default_question_bank()
    return GameContent(catalog=catalog, bank=bank, strings=config.default_strings())


def cmd_simulate(args) -> int:
    content = _load_content(args.catalog)
    engine = GameEngine(content)
    policy = agents.make_policy(args.policy, args.seed, args.script)
    participant = args.participant or f"agent-{args.seed}"
    session = agents.play_session(engine, participant, args.seed, policy)
    out = Path(args.out)
    _atomic_write(out, "".join(line + "\n" for line in session.log.to_lines()))
    print(f"session {session.session_id}: final score {session.score} ({len(session.log)} events)")
    print(f"log written to {out}")
    return EXIT_OK


def _session_results(log: EventLog) -> dict[str, AssessmentResult]:
    """Pre/post results straight from the item events of one log."""
    per_test: dict[str, list[dict]] = {}
    for event in log:
        if event.kind is EventKind.ITEM_ANSWERED:
            per_test.setdefault(event.payload["test"], []).append(event.payload)
    results = {}
    for test, items in per_test.items():
        correct = [bool(item["correct"]) for item in items]
        confidence = [int(item["confidence"]) for item in items]
        results[test] = AssessmentResult(
            success_rate=sum(correct) / len(correct),
            mean_confidence=sum(confidence) / len(confidence),
            per_question_correct=tuple(correct),
        )
    return results


def _fmt(value: float, decimal_sep: str = ",") -> str:
    return f"{value:.2f}".replace(".", decimal_sep)


def cmd_analyze(args) -> int:
    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        raise config.ConfigError(f"not a directory: {in_dir}")
    logs: list[EventLog] = []
    corrupt: list[str] = []
    for path in sorted(p for p in in_dir.iterdir() if p.is_file()):
        try:
            logs.append(EventLog.read(path))
        except TelemetryError as exc:
            corrupt.append(f"{path.name}: {exc}")
    if not logs:
        raise config.ConfigError(f"no valid session logs in {in_dir}")
    for entry in corrupt:
        print(f"warning: skipping corrupt log {entry}", file=sys.stderr)

    report = timing_report(logs)
    session_results = [_session_results(log) for log in logs]
    pre_results = [r["pre"] for r in session_results if "pre" in r]
    deltas = [
        pre_post_delta(r["pre"], r["post"]) for r in session_results if "pre" in r and "post" in r
    ]

    if args.format == "machine":
        payload = {
            "sessions": len(logs),
            "corrupt": corrupt,
            "timing": report.to_dict(),
            "cohort": cohort_stats(pre_results) if pre_results else None,
            "pre_post": {
                "sessions": len(deltas),
                "accuracy_delta_pct": sum(d["accuracy_delta_pct"] for d in deltas) / len(deltas)
                if deltas
                else None,
                "confidence_delta_pct": sum(d["confidence_delta_pct"] for d in deltas) / len(deltas)
                if deltas
                else None,
            },
        }
        print(json.dumps(payload, sort_keys=True, indent=2))
        return EXIT_OK

    print(f"Sessions analyzed: {len(logs)}" + (f" ({len(corrupt)} corrupt skipped)" if corrupt else ""))
    print()
    print(report.render())
    print()
    if pre_results:
        stats = cohort_stats(pre_results)
        print(
            f"Pre-test cohort: mean success {_fmt(stats['mean_success_pct'])}%, "
            f"above 50%: {_fmt(stats['share_above_50_pct'])}%"
        )
    if deltas:
        acc = sum(d["accuracy_delta_pct"] for d in deltas) / len(deltas)
        conf = sum(d["confidence_delta_pct"] for d in deltas) / len(deltas)
        print(
            f"Pre/post deltas over {len(deltas)} sessions: "
            f"accuracy {_fmt(acc)}%, confidence {_fmt(conf)}%"
        )
    return EXIT_OK


def _complete_responses(
    responses_path: str, bank_path: str | None
) -> tuple[assessment.QuestionBank, dict[str, list[assessment.Response]], list[str]]:
    bank = config.load_question_bank(bank_path) if bank_path else config.default_question_bank()
    grouped = config.load_responses(responses_path)
    if not grouped:
        raise config.ConfigError(f"no responses in {responses_path}")
    complete: dict[str, list[assessment.Response]] = {}
    excluded: list[str] = []
    for participant, responses in grouped.items():
        ids = {r.question_id for r in responses}
        if ids == set(bank.canonical_order) and len(responses) == len(bank):
            complete[participant] = responses
        else:
            excluded.append(f"{participant} ({len(responses)} of {len(bank)} answers)")
    return bank, complete, excluded


def cmd_grade(args) -> int:
    bank, complete, excluded = _complete_responses(args.responses, args.bank)
    for entry in excluded:
        print(f"warning: participant {entry} incomplete, excluded", file=sys.stderr)
    if not complete:
        raise config.ConfigError("no complete participants to grade")
    results = []
    for participant in sorted(complete):
        result = assessment.grade(complete[participant], bank)
        results.append(result)
        correct = sum(result.per_question_correct)
        print(
            f"{participant}: success {result.success_rate * 100:.2f}% ({correct}/{len(bank)}), "
            f"mean confidence {result.mean_confidence:.2f}"
        )
    stats = cohort_stats(results)
    print(
        f"cohort ({len(results)} participants): mean success {stats['mean_success_pct']:.2f}%, "
        f"above 50%: {stats['share_above_50_pct']:.2f}%"
    )
    return EXIT_OK


def cmd_cluster(args) -> int:
    if not 0.0 < args.threshold < 1.0:
        raise UsageError(f"--threshold must be in (0, 1), got {args.threshold}")
    bank, complete, excluded = _complete_responses(args.responses, args.bank)
    for entry in excluded:
        print(f"warning: participant {entry} incomplete, excluded", file=sys.stderr)
    profiles = [
        AnswerProfile.from_responses(participant, responses, bank)
        for participant, responses in sorted(complete.items())
    ]
    if len(profiles) < 2:
        raise config.ConfigError("clustering needs at least 2 complete participants")
    result = cluster_profiles(profiles, args.threshold)
    for index, cluster in enumerate(result.clusters, start=1):
        print(f"cluster {index}: {', '.join(sorted(cluster))}")
    if result.outliers:
        print(f"outliers: {', '.join(sorted(result.outliers))}")
    else:
        print("outliers: none")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve  # import here: plain CLI runs never need it

    serve(host=args.host, port=args.port, frontend_dir=args.frontend)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    handlers = {
        "simulate": cmd_simulate,
        "analyze": cmd_analyze,
        "grade": cmd_grade,
        "cluster": cmd_cluster,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (config.ConfigError, assessment.AssessmentError, TelemetryError, agents.AgentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
