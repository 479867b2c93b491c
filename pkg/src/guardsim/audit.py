"""Event-log audits.

These checks work purely on the serialized event stream, independently of the
live objects that produced it, so they double as tamper detection: every
value-moving event records its post balances, and the audit refolds the whole
history and cross-checks each recorded balance and the final conservation
identity.
"""

from __future__ import annotations

from .ledger import EventRecord
from .units import to_units

_OWNERSHIP_KINDS = {"Minted", "Transfer", "SafeTransfer", "Reclaimed", "Returned"}
_DISPATCHED_KINDS = {
    "Locked": "lock",
    "Unlocked": "unlock",
    "Frozen": "freeze",
    "Unfrozen": "unfreeze",
    "Reclaimed": "reclaim",
    "Returned": "return",
}


def audit_events(events: list[EventRecord]) -> list[str]:
    """Return every invariant violation found in the stream (empty means clean)."""
    violations: list[str] = []
    balances: dict[str, int] = {}
    minted = 0
    request_ids: list[int] = []
    fulfilled: dict[int, int] = {}
    token_state: dict[int, str] = {}
    token_owner: dict[int, str] = {}
    honor_count = 0
    reward_minted_total = 0
    juror_reward_each: int | None = None

    def check_balance(seq: int, addr: str, recorded: str) -> None:
        if balances.get(addr, 0) != to_units(recorded):
            violations.append(f"seq {seq}: recorded balance for {addr} diverges from refolded history")

    previous: EventRecord | None = None
    for ev in events:
        p = ev.payload
        if ev.kind == "AccountCreated":
            amount = to_units(p["balance"])
            balances[p["address"]] = amount
            minted += amount
        elif ev.kind == "ValueTransferred":
            amount = to_units(p["amount"])
            balances[p["from"]] = balances.get(p["from"], 0) - amount
            balances[p["to"]] = balances.get(p["to"], 0) + amount
            check_balance(ev.seq, p["from"], p["from_balance"])
            check_balance(ev.seq, p["to"], p["to_balance"])
            if balances[p["from"]] < 0:
                violations.append(f"seq {ev.seq}: balance of {p['from']} went negative")
        elif ev.kind == "ValueMinted":
            amount = to_units(p["amount"])
            balances[p["to"]] = balances.get(p["to"], 0) + amount
            minted += amount
            check_balance(ev.seq, p["to"], p["to_balance"])
            if p["reason"] == "juror_reward":
                reward_minted_total += amount
        elif ev.kind == "RiskRequested":
            request_ids.append(p["request_id"])
        elif ev.kind == "RiskFulfilled":
            fulfilled[p["request_id"]] = fulfilled.get(p["request_id"], 0) + 1
        elif ev.kind == "HonorAwarded":
            honor_count += 1
            if juror_reward_each is None:
                juror_reward_each = to_units(p["reward"])
        elif ev.kind == "CaseClosed":
            if p["verdict"] == "FOR_REPORTER" and p["tally_reporter"] < p["quorum"]:
                violations.append(f"seq {ev.seq}: FOR_REPORTER verdict with only {p['tally_reporter']} votes")
            if p["verdict"] == "FOR_HOLDER" and not p["auto"]:
                net = to_units(p["refund"]) - to_units(p["deposit"]) - to_units(p["gas_charged"])
                if net >= 0:
                    violations.append(f"seq {ev.seq}: FOR_HOLDER closure did not cost the reporter anything")

        # token state machine checks
        if ev.kind in _OWNERSHIP_KINDS:
            token_id = p["token_id"]
            if ev.kind == "Minted":
                token_state[token_id] = "OK"
                token_owner[token_id] = p["to"]
            elif ev.kind in ("Transfer", "SafeTransfer"):
                if p["guard_state"] != "OK":
                    violations.append(f"seq {ev.seq}: transfer completed on {p['guard_state']} token {token_id}")
                if p.get("guard_frozen"):
                    violations.append(f"seq {ev.seq}: transfer completed on frozen token {token_id}")
                if token_state.get(token_id) == "RECLAIMED":
                    violations.append(f"seq {ev.seq}: reclaimed token {token_id} moved outside a verdict return")
                if p["new_state"] != "LOCKED":
                    violations.append(f"seq {ev.seq}: received token {token_id} not locked on receipt")
                token_state[token_id] = p["new_state"]
                token_owner[token_id] = p["new_owner"]
            elif ev.kind == "Reclaimed":
                token_state[token_id] = "RECLAIMED"
            elif ev.kind == "Returned":
                if token_state.get(token_id) != "RECLAIMED":
                    violations.append(f"seq {ev.seq}: verdict return on token {token_id} that was not reclaimed")
                if p["new_state"] != "LOCKED":
                    violations.append(f"seq {ev.seq}: returned token {token_id} not locked on receipt")
                token_state[token_id] = p["new_state"]
                token_owner[token_id] = p["to"]

        action = _DISPATCHED_KINDS.get(ev.kind)
        if action is not None:
            ok = (
                previous is not None
                and previous.kind == "OracleDispatch"
                and previous.payload.get("action") == action
                and previous.payload.get("token_id") == ev.payload.get("token_id")
            )
            if not ok:
                violations.append(f"seq {ev.seq}: {ev.kind} event without an immediately preceding dispatch")
        previous = ev

    if sum(balances.values()) != minted:
        violations.append("conservation: account balances do not equal total minted value")
    if sorted(fulfilled) != request_ids or any(n != 1 for n in fulfilled.values()):
        violations.append("request/fulfill pairing broken")
    if request_ids != list(range(1, len(request_ids) + 1)):
        violations.append("request ids are not gap-free")
    if juror_reward_each is not None and reward_minted_total != honor_count * juror_reward_each:
        violations.append("minted juror rewards do not match honor awards")
    return violations
