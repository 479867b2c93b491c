"""Supervised token contract: ownership, approvals and the OK/LOCKED/RECLAIMED machine.

State rules enforced here:
  - OK is the only state that can transfer or approve, and only when any
    freeze deadline has passed (expiry is inclusive: now >= frozen_until).
  - Every received transfer lands LOCKED; mint is not a receipt and lands OK.
  - LOCKED/RECLAIMED transitions happen only through the oracle bridge.
  - RECLAIMED tokens belong to the treasury and leave that state only through
    a verdict return.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    AlreadyMinted,
    AlreadyReclaimed,
    GuardRejected,
    InvalidTokenState,
    NotInArbitration,
    NotLocked,
    NotOracle,
    NotOwner,
    PhishingOperatorBlocked,
    ReclaimedImmutable,
    RejectedInput,
    UnknownToken,
)
from .ledger import Address, Ledger
from .risk import RiskVerdict, SAFE, TransferIntent
from .units import fmt_units


class TokenState(str, Enum):
    OK = "OK"
    LOCKED = "LOCKED"
    RECLAIMED = "RECLAIMED"


@dataclass(frozen=True)
class ProvenanceEntry:
    from_addr: Address
    to_addr: Address
    price: int
    time: int


@dataclass
class TokenRecord:
    token_id: int
    owner: Address
    state: TokenState = TokenState.OK
    approved: Address | None = None
    frozen_until: int | None = None
    provenance: list[ProvenanceEntry] = field(default_factory=list)
    abnormal_times: list[int] = field(default_factory=list)
    last_sale_price: int | None = None
    pre_reclaim_owner: Address | None = None


@dataclass(frozen=True)
class GuardResult:
    ok: bool
    reason: str | None = None


@dataclass(frozen=True)
class TransferOutcome:
    request_id: int
    verdict: RiskVerdict

    @property
    def status(self) -> str:
        return self.verdict.status


class TokenContract:
    def __init__(self, ledger: Ledger, treasury: Address, freeze_ticks: int):
        self.ledger = ledger
        self.treasury = treasury
        self.freeze_ticks = freeze_ticks
        self.tokens: dict[int, TokenRecord] = {}
        self.operator_approvals: dict[tuple[Address, Address], bool] = {}
        self._bridge = None
        # sim wiring installs the phishing screen (explorer flag + engine blacklist)
        self._operator_screen = lambda _addr: False

    def bind_bridge(self, bridge) -> None:
        self._bridge = bridge

    def set_operator_screen(self, screen) -> None:
        self._operator_screen = screen

    # -- reads ---------------------------------------------------------------

    def token(self, token_id: int) -> TokenRecord:
        try:
            return self.tokens[token_id]
        except KeyError:
            raise UnknownToken(str(token_id)) from None

    def is_operator(self, owner: Address, operator: Address) -> bool:
        return self.operator_approvals.get((owner, operator), False)

    def transfer_guard(self, token_id: int, caller: Address) -> GuardResult:
        """Pure legality check; never mutates anything."""
        token = self.token(token_id)
        if token.state is TokenState.LOCKED:
            return GuardResult(False, "Locked")
        if token.state is TokenState.RECLAIMED:
            return GuardResult(False, "Reclaimed")
        if token.frozen_until is not None and self.ledger.time < token.frozen_until:
            return GuardResult(False, "Frozen")
        authorized = (
            caller == token.owner
            or caller == token.approved
            or self.is_operator(token.owner, caller)
        )
        if not authorized:
            return GuardResult(False, "NotAuthorized")
        return GuardResult(True)

    def state_line(self, token_id: int) -> str:
        token = self.token(token_id)
        frozen = "-" if token.frozen_until is None else str(token.frozen_until)
        return f"token={token.token_id} owner={token.owner} state={token.state.value} frozen_until={frozen}"

    # -- user entry points -----------------------------------------------------

    def mint(self, to_addr: Address, token_id: int) -> None:
        if token_id <= 0:
            raise RejectedInput("token id must be positive")
        if token_id in self.tokens:
            raise AlreadyMinted(str(token_id))
        self.ledger.account(to_addr)
        self.tokens[token_id] = TokenRecord(token_id=token_id, owner=to_addr)
        self.ledger.append_event("Minted", {"token_id": token_id, "to": to_addr})

    def approve(self, caller: Address, to_addr: Address, token_id: int) -> None:
        guard = self.transfer_guard(token_id, caller)
        if not guard.ok:
            raise GuardRejected(guard.reason)
        self.ledger.account(to_addr)
        token = self.token(token_id)
        token.approved = to_addr
        self.ledger.append_event("Approval", {"token_id": token_id, "owner": token.owner, "approved": to_addr})

    def set_approval_for_all(self, caller: Address, operator: Address, approved: bool) -> None:
        self.ledger.account(caller)
        self.ledger.account(operator)
        if approved and self._operator_screen(operator):
            self.ledger.append_event(
                "SupervisionBlocked", {"owner": caller, "operator": operator, "reason": "PhishingOperatorBlocked"}
            )
            raise PhishingOperatorBlocked(operator)
        self.operator_approvals[(caller, operator)] = approved
        self.ledger.append_event("ApprovalForAll", {"owner": caller, "operator": operator, "approved": approved})

    def transfer_from(
        self, caller: Address, from_addr: Address, to_addr: Address, token_id: int, price: int, *, safe_variant: bool = False
    ) -> TransferOutcome:
        """Propose a transfer; the synchronous risk verdict decides what happens.

        safe -> ownership moves and the token arrives LOCKED; may_lost -> the
        token stays put and is frozen; hacked -> the token is reclaimed to the
        treasury and a theft case opens.
        """
        if price < 0:
            raise RejectedInput("price must be >= 0")
        token = self.token(token_id)
        guard_state = token.state
        guard_frozen = token.frozen_until is not None and self.ledger.time < token.frozen_until
        guard = self.transfer_guard(token_id, caller)
        if not guard.ok:
            raise GuardRejected(guard.reason)
        if token.owner != from_addr:
            raise NotOwner(from_addr)
        self.ledger.account(to_addr)
        intent = TransferIntent(caller, from_addr, to_addr, token_id, price, self.ledger.time)
        request_id, verdict = self._bridge.request_risk_check(intent)
        if verdict.status == SAFE:
            token.owner = to_addr
            token.state = TokenState.LOCKED
            token.approved = None
            token.frozen_until = None
            entry = ProvenanceEntry(from_addr, to_addr, price, self.ledger.time)
            token.provenance.append(entry)
            if price > 0:
                token.last_sale_price = price
            self.ledger.append_event(
                "SafeTransfer" if safe_variant else "Transfer",
                {
                    "token_id": token_id,
                    "from": from_addr,
                    "to": to_addr,
                    "price": fmt_units(price),
                    "caller": caller,
                    "request_id": request_id,
                    "guard_state": guard_state.value,
                    "guard_frozen": guard_frozen,
                    "new_state": token.state.value,
                    "new_owner": token.owner,
                },
            )
        return TransferOutcome(request_id, verdict)

    def safe_transfer_from(self, caller: Address, from_addr: Address, to_addr: Address, token_id: int, price: int) -> TransferOutcome:
        # no receiver-contract callback exists here; distinct event kind only
        return self.transfer_from(caller, from_addr, to_addr, token_id, price, safe_variant=True)

    # -- bridge-only entry points ---------------------------------------------

    def _require_bridge(self, by) -> None:
        if by is None or by is not self._bridge:
            raise NotOracle("token state transitions require the oracle bridge")

    def oracle_lock(self, token_id: int, *, by=None) -> None:
        self._require_bridge(by)
        token = self.token(token_id)
        if token.state is TokenState.RECLAIMED:
            raise ReclaimedImmutable(str(token_id))
        previous = token.state
        token.state = TokenState.LOCKED
        token.frozen_until = None
        self.ledger.append_event("Locked", {"token_id": token_id, "previous_state": previous.value})

    def oracle_unlock(self, token_id: int, *, by=None) -> None:
        self._require_bridge(by)
        token = self.token(token_id)
        if token.state is TokenState.RECLAIMED:
            raise ReclaimedImmutable(str(token_id))
        if token.state is not TokenState.LOCKED:
            raise NotLocked(str(token_id))
        token.state = TokenState.OK
        self.ledger.append_event("Unlocked", {"token_id": token_id})

    def oracle_freeze(self, token_id: int, until: int, *, by=None) -> None:
        self._require_bridge(by)
        token = self.token(token_id)
        if token.state is not TokenState.OK:
            raise InvalidTokenState("freeze applies to OK tokens only")
        token.frozen_until = until
        self.ledger.append_event("Frozen", {"token_id": token_id, "until": until})

    def oracle_unfreeze(self, token_id: int, *, by=None) -> None:
        self._require_bridge(by)
        token = self.token(token_id)
        token.frozen_until = None
        self.ledger.append_event("Unfrozen", {"token_id": token_id})

    def oracle_reclaim(self, token_id: int, *, by=None) -> None:
        self._require_bridge(by)
        token = self.token(token_id)
        if token.state is TokenState.RECLAIMED:
            raise AlreadyReclaimed(str(token_id))
        token.pre_reclaim_owner = token.owner
        token.owner = self.treasury
        token.state = TokenState.RECLAIMED
        token.approved = None
        token.frozen_until = None
        self.ledger.append_event("Reclaimed", {"token_id": token_id, "prior_owner": token.pre_reclaim_owner})

    def verdict_return(self, token_id: int, to_addr: Address, *, by=None) -> None:
        self._require_bridge(by)
        token = self.token(token_id)
        if token.state is not TokenState.RECLAIMED:
            raise NotInArbitration(str(token_id))
        self.ledger.account(to_addr)
        token.owner = to_addr
        token.state = TokenState.LOCKED
        token.approved = None
        token.frozen_until = None
        self.ledger.append_event(
            "Returned", {"token_id": token_id, "to": to_addr, "new_state": token.state.value}
        )

    def mark_abnormal(self, token_id: int, *, by=None) -> None:
        self._require_bridge(by)
        self.token(token_id).abnormal_times.append(self.ledger.time)
