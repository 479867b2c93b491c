"""Command-line surface.

Exit codes: 0 success, 1 invariant/conservation/replay failure, 2 usage or
parse errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SimConfig, config_from_payload, load_config
from .errors import ParseError, ReplayError, SimError
from .fuzz import Fuzzer
from .risk import classify_payload
from .runner import read_log, replay_log, report_from_log, run_scenario, scenario_from_events, write_log
from .scenario import load_scenario
from .units import fmt_units


def cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except FileNotFoundError:
        print(f"no such scenario: {args.scenario}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    base = load_config(args.config) if args.config else SimConfig()
    sim, report = run_scenario(scenario, seed=args.seed, base_config=base)
    out = Path(args.out) if args.out else Path(args.scenario).with_suffix(".log.jsonl")
    write_log(sim, out)
    print(report.to_text())
    print(f"log written: {out}")
    return 0 if report.ok else 1


def cmd_replay(args) -> int:
    try:
        outcome, _sim = replay_log(args.log)
    except ReplayError as exc:
        print(f"replay error: {exc}", file=sys.stderr)
        return 2
    if outcome.passed:
        print("replay: pass")
        return 0
    print(f"replay: fail at seq {outcome.divergence_seq} ({outcome.detail})")
    return 1


def cmd_report(args) -> int:
    try:
        report = report_from_log(args.log)
    except ReplayError as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return 2
    print(report.to_text())
    return 0 if report.ok else 1


def cmd_state(args) -> int:
    try:
        events = read_log(args.log)
        scenario, config = scenario_from_events(events)
        sim, _report = run_scenario(scenario, seed=scenario.seed, base_config=config)
        print(sim.contract.state_line(args.token_id))
    except (ReplayError, SimError) as exc:
        print(f"state error: {exc}", file=sys.stderr)
        return 2
    return 0


def cmd_case(args) -> int:
    try:
        events = read_log(args.log)
        scenario, config = scenario_from_events(events)
        sim, _report = run_scenario(scenario, seed=scenario.seed, base_config=config)
        case = sim.arbitration.case(args.case_id)
    except (ReplayError, SimError) as exc:
        print(f"case error: {exc}", file=sys.stderr)
        return 2
    print(f"case={case.case_id} token={case.token_id} status={case.status}"
          f" verdict={case.verdict or '-'}{' auto' if case.auto_opened else ''}")
    print(f"  reporter={case.reporter}")
    print(f"  respondent={case.respondent}")
    print(f"  deposit={fmt_units(case.deposit)}")
    for party, digest, time in case.evidence:
        print(f"  evidence t={time} {party} {digest}")
    for juror in case.jury:
        vote = case.tally.votes.get(juror, "-") if case.tally else "-"
        print(f"  juror {juror} vote={vote}")
    return 0


def cmd_explain(args) -> int:
    try:
        events = read_log(args.log)
    except ReplayError as exc:
        print(f"explain error: {exc}", file=sys.stderr)
        return 2
    genesis = next((ev for ev in events if ev.kind == "Genesis"), None)
    match = next(
        (ev for ev in events if ev.kind == "RiskFulfilled" and ev.payload["request_id"] == args.request_id),
        None,
    )
    if genesis is None or match is None:
        print(f"no fulfilled risk request {args.request_id} in {args.log}", file=sys.stderr)
        return 2
    payload = match.payload
    print(f"request={args.request_id} status={payload['status']}")
    for key, value in payload["features"].items():
        print(f"  {key}={value}")
    if payload["hits"]:
        for hit in payload["hits"]:
            print(f"  hit {hit['rule']} ({hit['severity']}): {hit['detail']}")
    else:
        print("  hits: none")
    config = config_from_payload(genesis.payload["config"])
    status, rules = classify_payload(payload["features"], config.risk)
    agrees = status == payload["status"] and rules == [h["rule"] for h in payload["hits"]]
    print(f"  offline recompute: {status} ({'agrees' if agrees else 'DIVERGES'})")
    return 0 if agrees else 1


def cmd_fuzz(args) -> int:
    fuzzer = Fuzzer(seed=args.seed, ops_per_run=args.ops_per_run)
    result = fuzzer.run(args.iters)
    print(f"fuzz: {result.ops} operations across {result.sequences} sequences")
    if result.ok:
        print("no invariant violations")
        return 0
    print(f"violation: {result.violation}")
    print("minimized reproducing scenario:")
    print(result.trace)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim", description="guarded-token protocol simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario and write its event log")
    p_run.add_argument("scenario")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--config", default=None, help="flat key=value config file")
    p_run.set_defaults(func=cmd_run)

    p_replay = sub.add_parser("replay", help="re-execute a log and verify it byte for byte")
    p_replay.add_argument("log")
    p_replay.set_defaults(func=cmd_replay)

    p_report = sub.add_parser("report", help="summarize a log; nonzero exit on conservation failure")
    p_report.add_argument("log")
    p_report.set_defaults(func=cmd_report)

    p_state = sub.add_parser("state", help="print one token's final state from a log")
    p_state.add_argument("log")
    p_state.add_argument("token_id", type=int)
    p_state.set_defaults(func=cmd_state)

    p_case = sub.add_parser("case", help="print one arbitration case record from a log")
    p_case.add_argument("log")
    p_case.add_argument("case_id", type=int)
    p_case.set_defaults(func=cmd_case)

    p_explain = sub.add_parser("explain", help="print the feature vector and hits behind a verdict")
    p_explain.add_argument("log")
    p_explain.add_argument("request_id", type=int)
    p_explain.set_defaults(func=cmd_explain)

    p_fuzz = sub.add_parser("fuzz", help="random command sequences hunting invariant violations")
    p_fuzz.add_argument("--iters", type=int, default=10000)
    p_fuzz.add_argument("--seed", type=int, default=0)
    p_fuzz.add_argument("--ops-per-run", type=int, default=400)
    p_fuzz.set_defaults(func=cmd_fuzz)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
