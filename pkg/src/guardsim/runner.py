"""Scenario execution, replay verification and reporting.

Every executed step is logged as a Step event before its effects, so a log
embeds its own command stream: replay re-executes that stream under the
genesis seed and config and demands byte-identical serialization. Step
failures are events, not aborts; attack scripts trip guards on purpose.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .arbitration import FOR_HOLDER, FOR_REPORTER
from .audit import audit_events
from .config import SimConfig, apply_override, config_from_payload
from .errors import RejectedInput, ReplayError, SimError, UnknownName
from .ledger import EventRecord, serialize_events
from .scenario import Scenario, Step, parse_scenario
from .sim import Simulation
from .access_control import UnlockAttestation
from .units import to_units


@dataclass
class RunContext:
    sim: Simulation
    names: dict[str, str] = field(default_factory=dict)
    pool: list[str] = field(default_factory=list)

    def resolve(self, name: str) -> str:
        if name in self.names:
            return self.names[name]
        if name.startswith("0x") and len(name) == 42:
            return name
        raise UnknownName(name)


@dataclass
class RunReport:
    name: str
    steps_total: int
    steps_rejected: int
    final_tokens: list[str]
    verdict_counts: dict[str, int]
    case_outcomes: list[dict]
    conservation_ok: bool
    violations: list[str]
    digest: str
    names: dict[str, str]

    def to_text(self) -> str:
        lines = [f"scenario: {self.name or '(unnamed)'}"]
        lines.append(f"steps: {self.steps_total} executed, {self.steps_rejected} rejected")
        lines.append(
            "verdicts: "
            + " ".join(f"{k}={self.verdict_counts.get(k, 0)}" for k in ("safe", "may_lost", "hacked"))
        )
        if self.case_outcomes:
            for case in self.case_outcomes:
                lines.append(
                    f"case {case['case_id']}: {case['verdict'] or 'open'}"
                    + (" (auto)" if case["auto"] else "")
                )
        else:
            lines.append("cases: none")
        lines.append("tokens:")
        lines.extend(f"  {row}" for row in self.final_tokens)
        lines.append(f"conservation: {'ok' if self.conservation_ok else 'VIOLATED'}")
        for violation in self.violations:
            lines.append(f"violation: {violation}")
        lines.append(f"log digest: {self.digest}")
        return "\n".join(lines)

    @property
    def ok(self) -> bool:
        return self.conservation_ok and not self.violations


def _parse_onoff(text: str) -> bool:
    if text.lower() in ("on", "true", "1"):
        return True
    if text.lower() in ("off", "false", "0"):
        return False
    raise RejectedInput(f"expected on/off, got {text!r}")


def execute_step(ctx: RunContext, step: Step) -> None:
    sim = ctx.sim
    verb, args = step.verb, step.args
    if verb == "ACCOUNT":
        if args[0] in ctx.names:
            raise RejectedInput(f"name already bound: {args[0]}")
        ctx.names[args[0]] = sim.ledger.create_account(to_units(args[1]))
    elif verb == "JUROR":
        address = ctx.resolve(args[0])
        if address not in ctx.pool:
            ctx.pool.append(address)
    elif verb == "ADVANCE":
        sim.ledger.advance_time(int(args[0]))
    elif verb == "FLAG":
        sim.ledger.set_explorer_flag(ctx.resolve(args[0]), _parse_onoff(args[1]) if len(args) > 1 else True)
    elif verb == "BLACKLIST":
        sim.blacklist_operator(ctx.resolve(args[0]))
    elif verb == "MODEL":
        sender = args[0] if args[0] == "*" else ctx.resolve(args[0])
        recipient = args[1] if args[1] == "*" else ctx.resolve(args[1])
        try:
            score = float(args[2])
        except ValueError:
            raise RejectedInput(f"bad model score {args[2]!r}") from None
        sim.install_model_entry(sender, recipient, score)
    elif verb == "PAY":
        sim.ledger.transfer_value(ctx.resolve(args[0]), ctx.resolve(args[1]), to_units(args[2]))
    elif verb == "MINT":
        sim.contract.mint(ctx.resolve(args[0]), int(args[1]))
    elif verb in ("TRANSFER", "SAFE_TRANSFER"):
        method = sim.contract.safe_transfer_from if verb == "SAFE_TRANSFER" else sim.contract.transfer_from
        method(ctx.resolve(args[0]), ctx.resolve(args[1]), ctx.resolve(args[2]), int(args[3]), to_units(args[4]))
    elif verb == "APPROVE":
        sim.contract.approve(ctx.resolve(args[0]), ctx.resolve(args[1]), int(args[2]))
    elif verb == "APPROVE_ALL":
        sim.contract.set_approval_for_all(ctx.resolve(args[0]), ctx.resolve(args[1]), _parse_onoff(args[2]))
    elif verb == "REGISTER_AUX":
        main, aux = ctx.resolve(args[0]), ctx.resolve(args[1])
        sim.access.register_aux(main, aux, sim.access.registration_digest(main, aux))
    elif verb == "LOCK":
        sim.access.lock(ctx.resolve(args[0]), int(args[1]))
    elif verb == "UNLOCK":
        main, token_id = ctx.resolve(args[0]), int(args[1])
        sim.access.unlock(main, token_id, sim.access.make_attestation(main, token_id))
    elif verb == "UNLOCK_BAD":
        main, token_id = ctx.resolve(args[0]), int(args[1])
        link = sim.access.links.get(main)
        aux = link.aux if link else main
        forged = UnlockAttestation(main, aux, token_id, sim.ledger.time, 0, b"\x00" * 32)
        sim.access.unlock(main, token_id, forged)
    elif verb == "REPORT":
        sim.arbitration.file_report(ctx.resolve(args[0]), int(args[1]))
    elif verb == "EVIDENCE":
        sim.arbitration.submit_evidence(int(args[1]), ctx.resolve(args[0]), " ".join(args[2:]).encode())
    elif verb == "EMPANEL":
        sim.arbitration.empanel_jury(int(args[0]), ctx.pool, sim.seed)
    elif verb == "VOTE":
        votes = {"R": FOR_REPORTER, "H": FOR_HOLDER}
        if args[2].upper() not in votes:
            raise RejectedInput(f"vote must be R or H, got {args[2]!r}")
        sim.arbitration.cast_vote(int(args[1]), ctx.resolve(args[0]), votes[args[2].upper()])
    else:  # pragma: no cover - parser rejects unknown verbs first
        raise RejectedInput(f"unhandled verb {verb}")


def run_scenario(
    scenario: Scenario,
    seed: int | None = None,
    base_config: SimConfig | None = None,
    on_step=None,
) -> tuple[Simulation, RunReport]:
    effective_seed = scenario.seed if seed is None else seed
    config = base_config or SimConfig()
    for key, value in scenario.config_overrides:
        config = apply_override(config, key, value)
    sim = Simulation(effective_seed, config, scenario.name)
    ctx = RunContext(sim)
    rejected = 0
    for index, step in enumerate(scenario.steps):
        sim.ledger.append_event("Step", {"index": index, "command": step.raw})
        before = len(sim.ledger.events)
        try:
            execute_step(ctx, step)
        except SimError as exc:
            rejected += 1
            sim.ledger.append_event("StepRejected", {"index": index, "error": exc.code, "detail": str(exc)})
        if on_step is not None:
            on_step(ctx, step, sim.ledger.events[before:])
    return sim, build_report(ctx, rejected)


def build_report(ctx: RunContext, steps_rejected: int = 0) -> RunReport:
    sim = ctx.sim
    events = sim.ledger.events
    verdict_counts: dict[str, int] = {}
    for ev in events:
        if ev.kind == "RiskFulfilled":
            verdict_counts[ev.payload["status"]] = verdict_counts.get(ev.payload["status"], 0) + 1
    outcomes = [
        {"case_id": case.case_id, "verdict": case.verdict, "auto": case.auto_opened}
        for case in sim.arbitration.cases.values()
    ]
    steps_total = sum(1 for ev in events if ev.kind == "Step")
    return RunReport(
        name=sim.name,
        steps_total=steps_total,
        steps_rejected=steps_rejected,
        final_tokens=[sim.contract.state_line(tid) for tid in sorted(sim.contract.tokens)],
        verdict_counts=verdict_counts,
        case_outcomes=outcomes,
        conservation_ok=sim.ledger.conservation_holds(),
        violations=audit_events(events),
        digest=sim.ledger.log_digest().hex(),
        names=dict(ctx.names),
    )


# -- log files -----------------------------------------------------------------


def write_log(sim: Simulation, path: str | Path) -> None:
    Path(path).write_bytes(serialize_events(sim.ledger.events))


def read_log(path: str | Path) -> list[EventRecord]:
    events: list[EventRecord] = []
    data = Path(path).read_bytes()
    for line_no, line in enumerate(data.split(b"\n"), start=1):
        if not line:
            continue
        try:
            body = json.loads(line)
            events.append(EventRecord(seq=body["seq"], time=body["time"], kind=body["kind"], payload=body["payload"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ReplayError(f"line {line_no}: not a canonical event record ({exc})") from None
    return events


def scenario_from_events(events: list[EventRecord]) -> tuple[Scenario, SimConfig]:
    """Reconstruct the command stream and effective config embedded in a log."""
    genesis = next((ev for ev in events if ev.kind == "Genesis"), None)
    if genesis is None:
        raise ReplayError("log has no genesis event")
    config = config_from_payload(genesis.payload["config"])
    commands = sorted(
        (ev.payload["index"], ev.payload["command"]) for ev in events if ev.kind == "Step"
    )
    scenario = Scenario(name=genesis.payload["name"], seed=genesis.payload["seed"])
    for _index, command in commands:
        parsed = parse_scenario(command)
        scenario.steps.extend(parsed.steps)
    return scenario, config


@dataclass(frozen=True)
class ReplayOutcome:
    passed: bool
    divergence_seq: int | None = None
    detail: str = ""


def replay_log(path: str | Path) -> tuple[ReplayOutcome, Simulation]:
    """Re-execute a log's command stream and compare serialized events byte-wise.

    The recorded file bytes are compared line by line against the regenerated
    canonical lines, so any surviving single-byte difference names its seq.
    """
    original = read_log(path)
    scenario, config = scenario_from_events(original)
    sim, _report = run_scenario(scenario, seed=scenario.seed, base_config=config)
    regenerated = [ev.to_line() for ev in sim.ledger.events]
    recorded = [line.decode("ascii", "replace") for line in Path(path).read_bytes().split(b"\n") if line]
    for index in range(max(len(recorded), len(regenerated))):
        have = recorded[index] if index < len(recorded) else None
        want = regenerated[index] if index < len(regenerated) else None
        if have != want:
            return ReplayOutcome(False, index + 1, "event diverges from deterministic re-execution"), sim
    return ReplayOutcome(True), sim


def report_from_log(path: str | Path) -> RunReport:
    """Rebuild the report by re-executing the log; audits run on the recorded events."""
    original = read_log(path)
    scenario, config = scenario_from_events(original)
    sim, report = run_scenario(scenario, seed=scenario.seed, base_config=config)
    recorded_violations = audit_events(original)
    extra = [v for v in recorded_violations if v not in report.violations]
    report.violations.extend(extra)
    if serialize_events(original) != serialize_events(sim.ledger.events):
        report.violations.append("recorded log diverges from deterministic re-execution")
    return report
