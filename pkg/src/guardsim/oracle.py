"""Oracle bridge: the request/fulfill seam between the token contract and
everything off-contract, and the only component allowed to drive token state
transitions.

The bridge fulfills each request synchronously within the same ledger step,
but still logs the RiskRequested / RiskFulfilled pair so the on-chain message
trace survives in the event log.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidRequest, NotOracle
from .ledger import Ledger
from .risk import HACKED, MAY_LOST, RiskEngine, RiskVerdict, TransferIntent
from .units import fmt_units

_ALLOWED_DISPATCH = {
    "dac": {"lock", "unlock"},
    "drm": {"reclaim", "freeze"},
    "das": {"return", "reclaim", "freeze", "unfreeze"},
}


@dataclass
class RiskRequest:
    request_id: int
    intent: TransferIntent
    created_at: int
    status: str = "pending"  # pending | fulfilled


class OracleBridge:
    def __init__(self, ledger: Ledger, contract, engine: RiskEngine, view_factory):
        self.ledger = ledger
        self.contract = contract
        self.engine = engine
        self._view_factory = view_factory
        self._arbitration = None
        self.requests: dict[int, RiskRequest] = {}
        self._next_request_id = 1

    def attach_arbitration(self, arbitration) -> None:
        self._arbitration = arbitration

    def request_risk_check(self, intent: TransferIntent) -> tuple[int, RiskVerdict]:
        request_id = self._next_request_id
        self._next_request_id += 1
        self.requests[request_id] = RiskRequest(request_id, intent, self.ledger.time)
        self.ledger.append_event(
            "RiskRequested",
            {
                "request_id": request_id,
                "caller": intent.caller,
                "from": intent.from_addr,
                "to": intent.to_addr,
                "token_id": intent.token_id,
                "price": fmt_units(intent.price),
                "time": intent.time,
            },
        )
        verdict = self.engine.evaluate(intent, self._view_factory())
        self.fulfill(request_id, verdict)
        return request_id, verdict

    def fulfill(self, request_id: int, verdict: RiskVerdict) -> None:
        request = self.requests.get(request_id)
        if request is None or request.status != "pending":
            raise InvalidRequest(str(request_id))
        request.status = "fulfilled"
        self.ledger.append_event(
            "RiskFulfilled",
            {
                "request_id": request_id,
                "status": verdict.status,
                "hits": [hit.to_payload() for hit in verdict.hits],
                "features": verdict.features.to_payload(),
            },
        )
        intent = request.intent
        if verdict.status == MAY_LOST:
            self.contract.mark_abnormal(intent.token_id, by=self)
            until = self.ledger.time + self.contract.freeze_ticks
            self.privileged_dispatch("freeze", origin="drm", token_id=intent.token_id, until=until)
        elif verdict.status == HACKED:
            self.contract.mark_abnormal(intent.token_id, by=self)
            self.privileged_dispatch("reclaim", origin="drm", token_id=intent.token_id)
            if self._arbitration is not None:
                self._arbitration.open_auto_case(intent.token_id, reporter=intent.from_addr)

    def privileged_dispatch(self, action: str, *, origin: str, token_id: int, **kwargs) -> None:
        """Route one protected contract call; any other origin is rejected."""
        if origin not in _ALLOWED_DISPATCH or action not in _ALLOWED_DISPATCH[origin]:
            raise NotOracle(f"{origin!r} may not dispatch {action!r}")
        payload = {"action": action, "origin": origin, "token_id": token_id}
        for key, value in kwargs.items():
            payload[key] = value
        self.ledger.append_event("OracleDispatch", payload)
        if action == "lock":
            self.contract.oracle_lock(token_id, by=self)
        elif action == "unlock":
            self.contract.oracle_unlock(token_id, by=self)
        elif action == "freeze":
            self.contract.oracle_freeze(token_id, kwargs["until"], by=self)
        elif action == "unfreeze":
            self.contract.oracle_unfreeze(token_id, by=self)
        elif action == "reclaim":
            self.contract.oracle_reclaim(token_id, by=self)
        elif action == "return":
            self.contract.verdict_return(token_id, kwargs["to"], by=self)
