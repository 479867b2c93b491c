"""Randomized scenario fuzzing.

Generates seeded random command sequences against fresh simulations, checking
the contract safety properties after every step and auditing the whole event
stream after every sequence. Sequences share nothing, so total coverage is
just the sum of many small runs. A failing sequence is greedily minimized by
dropping commands while the violation persists; the surviving trace is a
valid scenario script that reproduces the bug.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .audit import audit_events
from .errors import SimError
from .runner import RunContext, execute_step
from .scenario import parse_scenario
from .sim import Simulation

_PRICES = ("0", "1", "2", "3", "4", "6", "8", "10", "12")
_MODEL_SCORES = ("0.0", "0.3", "0.65", "0.95")


def _sequence_seed(seed: int, index: int) -> int:
    material = f"fuzz|{seed}|{index}".encode("ascii")
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


@dataclass
class FuzzResult:
    ops: int
    sequences: int
    transfers_checked: int = 0
    violation: str | None = None
    trace: str | None = None

    @property
    def ok(self) -> bool:
        return self.violation is None


class SequenceState:
    """Bookkeeping the adaptive generator needs between steps."""

    def __init__(self, users: list[str], jurors: list[str]):
        self.users = users
        self.jurors = jurors
        self.aux_of = {u: f"x{u}" for u in users}
        self.tokens: list[int] = []
        self.next_token = 1


def _header_lines(state: SequenceState) -> list[str]:
    lines = [f"ACCOUNT {u} 10" for u in state.users]
    lines += [f"ACCOUNT {state.aux_of[u]} 0" for u in state.users]
    lines += [f"ACCOUNT {j} 5" for j in state.jurors]
    lines += [f"JUROR {j}" for j in state.jurors]
    lines += [f"REGISTER_AUX {u} {state.aux_of[u]}" for u in state.users]
    lines.append("ADVANCE 86400")
    return lines


class Fuzzer:
    def __init__(self, seed: int = 0, ops_per_run: int = 400, users: int = 6, jurors: int = 6, max_tokens: int = 24):
        self.seed = seed
        self.ops_per_run = ops_per_run
        self.user_names = [f"u{i}" for i in range(users)]
        self.juror_names = [f"j{i}" for i in range(jurors)]
        self.max_tokens = max_tokens

    def run(self, total_ops: int) -> FuzzResult:
        done = 0
        sequences = 0
        transfers = 0
        while done < total_ops:
            seq_seed = _sequence_seed(self.seed, sequences)
            ops = min(self.ops_per_run, total_ops - done)
            lines, violation, sim = self._generate_sequence(seq_seed, ops)
            done += ops
            sequences += 1
            transfers += sum(1 for ev in sim.ledger.events if ev.kind in ("Transfer", "SafeTransfer"))
            if violation is not None:
                minimized = self._minimize(seq_seed, lines, violation)
                return FuzzResult(done, sequences, transfers, violation, "\n".join(minimized) + "\n")
        return FuzzResult(done, sequences, transfers)

    # -- one generated sequence -------------------------------------------

    def _generate_sequence(self, seq_seed: int, ops: int) -> tuple[list[str], str | None, Simulation]:
        rng = random.Random(seq_seed)
        state = SequenceState(self.user_names, self.juror_names)
        lines = _header_lines(state)
        sim, ctx, violation = self._execute(seq_seed, lines)
        if violation is None:
            for _ in range(ops):
                command = self._next_command(rng, state, sim, ctx)
                lines.append(command)
                violation = self._execute_one(sim, ctx, command, len(lines) - 1)
                if violation is not None:
                    break
        if violation is None:
            violation = self._final_audit(sim)
        return lines, violation, sim

    def _execute(self, seq_seed: int, lines: list[str]) -> tuple[Simulation, RunContext, str | None]:
        sim = Simulation(seq_seed, name=f"fuzz-{seq_seed}")
        ctx = RunContext(sim)
        for index, command in enumerate(lines):
            violation = self._execute_one(sim, ctx, command, index)
            if violation is not None:
                return sim, ctx, violation
        return sim, ctx, None

    def _execute_one(self, sim: Simulation, ctx: RunContext, command: str, index: int) -> str | None:
        step = parse_scenario(command).steps[0]
        sim.ledger.append_event("Step", {"index": index, "command": step.raw})
        before = len(sim.ledger.events)
        try:
            execute_step(ctx, step)
        except SimError as exc:
            sim.ledger.append_event("StepRejected", {"index": index, "error": exc.code, "detail": str(exc)})
        for ev in sim.ledger.events[before:]:
            if ev.kind in ("Transfer", "SafeTransfer"):
                if ev.payload["guard_state"] != "OK" or ev.payload["guard_frozen"]:
                    return f"step {index}: transfer completed despite guard state {ev.payload['guard_state']}"
        return None

    def _final_audit(self, sim: Simulation) -> str | None:
        problems = audit_events(sim.ledger.events)
        if not sim.ledger.conservation_holds():
            problems.append("live conservation check failed")
        return problems[0] if problems else None

    def _replay_violation(self, seq_seed: int, lines: list[str]) -> str | None:
        sim, _ctx, violation = self._execute(seq_seed, lines)
        return violation if violation is not None else self._final_audit(sim)

    def _minimize(self, seq_seed: int, lines: list[str], violation: str) -> list[str]:
        header_len = len(_header_lines(SequenceState(self.user_names, self.juror_names)))
        kept = list(lines)
        changed = True
        while changed:
            changed = False
            index = header_len
            while index < len(kept):
                candidate = kept[:index] + kept[index + 1 :]
                if self._replay_violation(seq_seed, candidate) is not None:
                    kept = candidate
                    changed = True
                else:
                    index += 1
        return kept

    # -- adaptive command generation ----------------------------------------

    def _next_command(self, rng: random.Random, state: SequenceState, sim: Simulation, ctx: RunContext) -> str:
        for _ in range(8):
            command = self._try_command(rng, state, sim, ctx)
            if command is not None:
                return command
        return f"ADVANCE {rng.randint(1, 600)}"

    def _try_command(self, rng: random.Random, state: SequenceState, sim: Simulation, ctx: RunContext):
        rev = {addr: name for name, addr in ctx.names.items()}
        users = state.users
        pick = rng.random()

        def owner_name(token_id: int) -> str | None:
            return rev.get(sim.contract.token(token_id).owner)

        if pick < 0.08:
            return f"ADVANCE {rng.choice((1, 7, 60, 600, 3600, 7201, 86401))}"
        if pick < 0.16:
            if len(state.tokens) >= self.max_tokens:
                return None
            token_id = state.next_token
            state.next_token += 1
            state.tokens.append(token_id)
            return f"MINT {rng.choice(users)} {token_id}"
        if pick < 0.44:
            if not state.tokens:
                return None
            token_id = rng.choice(state.tokens)
            owner = owner_name(token_id)
            caller = owner if owner and rng.random() < 0.8 else rng.choice(users)
            source = owner if owner and rng.random() < 0.9 else rng.choice(users)
            if caller is None or source is None:
                return None
            verb = "SAFE_TRANSFER" if rng.random() < 0.2 else "TRANSFER"
            return f"{verb} {caller} {source} {rng.choice(users)} {token_id} {rng.choice(_PRICES)}"
        if pick < 0.52:
            if not state.tokens:
                return None
            token_id = rng.choice(state.tokens)
            actor = owner_name(token_id) if rng.random() < 0.8 else rng.choice(users)
            if actor is None:
                return None
            return f"LOCK {actor} {token_id}"
        if pick < 0.62:
            if not state.tokens:
                return None
            token_id = rng.choice(state.tokens)
            actor = owner_name(token_id) if rng.random() < 0.85 else rng.choice(users)
            if actor is None:
                return None
            verb = "UNLOCK_BAD" if rng.random() < 0.15 else "UNLOCK"
            return f"{verb} {actor} {token_id}"
        if pick < 0.67:
            if not state.tokens:
                return None
            token_id = rng.choice(state.tokens)
            actor = owner_name(token_id) or rng.choice(users)
            return f"APPROVE {actor} {rng.choice(users)} {token_id}"
        if pick < 0.71:
            onoff = "on" if rng.random() < 0.7 else "off"
            return f"APPROVE_ALL {rng.choice(users)} {rng.choice(users)} {onoff}"
        if pick < 0.75:
            onoff = "on" if rng.random() < 0.6 else "off"
            return f"FLAG {rng.choice(users)} {onoff}"
        if pick < 0.77:
            return f"BLACKLIST {rng.choice(users)}"
        if pick < 0.79:
            sender = rng.choice(users + ["*"])
            recipient = rng.choice(users + ["*"])
            return f"MODEL {sender} {recipient} {rng.choice(_MODEL_SCORES)}"
        if pick < 0.83:
            return f"PAY {rng.choice(users)} {rng.choice(users)} {rng.choice(('0.1', '0.5', '1'))}"
        if pick < 0.88:
            if not state.tokens:
                return None
            return f"REPORT {rng.choice(users)} {rng.choice(state.tokens)}"
        open_cases = [c for c in sim.arbitration.cases.values() if c.status == "open"]
        voting_cases = [c for c in sim.arbitration.cases.values() if c.status == "voting"]
        if pick < 0.90:
            if not open_cases:
                return None
            case = rng.choice(open_cases)
            party = rev.get(case.reporter)
            if party is None:
                return None
            return f"EVIDENCE {party} {case.case_id} blob{rng.randint(0, 999)}"
        if pick < 0.93:
            if not open_cases:
                return None
            return f"EMPANEL {rng.choice(open_cases).case_id}"
        if voting_cases:
            case = rng.choice(voting_cases)
            pending = [rev[j] for j in case.jury if j not in case.tally.votes and j in rev]
            if not pending:
                return None
            return f"VOTE {rng.choice(pending)} {case.case_id} {rng.choice('RH')}"
        return None
