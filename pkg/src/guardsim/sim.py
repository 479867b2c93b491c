"""Simulation assembly: wires the ledger, token contract, oracle bridge, risk
engine, access control and arbitration into one deterministic instance.

Genesis creates three protocol accounts (treasury, fee sink, deposit escrow)
and logs the effective configuration, the seed and the scenario name, making
every log self-describing for replay.
"""

from __future__ import annotations

from typing import Iterator

from .access_control import AccessControl
from .arbitration import ArbitrationSystem
from .config import SimConfig, config_payload
from .ledger import Account, Address, Ledger
from .oracle import OracleBridge
from .risk import RiskEngine, TableScorer
from .token import TokenContract, TokenRecord


class SimView:
    """Read-only snapshot surface over live simulation state.

    Handed to the risk engine synchronously on the single mutation thread, so
    borrowing the live structures is safe; nothing here mutates.
    """

    def __init__(self, sim: "Simulation"):
        self._sim = sim

    @property
    def now(self) -> int:
        return self._sim.ledger.time

    def token(self, token_id: int) -> TokenRecord:
        return self._sim.contract.token(token_id)

    def tokens(self) -> Iterator[TokenRecord]:
        return iter(self._sim.contract.tokens.values())

    def account(self, address: Address) -> Account:
        return self._sim.ledger.account(address)

    def tokens_owned_by(self, address: Address) -> list[TokenRecord]:
        return [t for t in self._sim.contract.tokens.values() if t.owner == address]


class Simulation:
    def __init__(self, seed: int = 0, config: SimConfig | None = None, name: str = ""):
        self.seed = seed
        self.config = config or SimConfig()
        self.name = name
        self.ledger = Ledger(seed)
        self.treasury = self.ledger.create_account(0)
        self.fee_sink = self.ledger.create_account(0)
        self.escrow = self.ledger.create_account(0)

        self.scorer = TableScorer()
        self.engine = RiskEngine(self.config.risk, scorer=self.scorer)
        self.contract = TokenContract(self.ledger, self.treasury, self.config.freeze_ticks)
        self.bridge = OracleBridge(self.ledger, self.contract, self.engine, self.view)
        self.contract.bind_bridge(self.bridge)
        self.contract.set_operator_screen(self._operator_blocked)
        self.access = AccessControl(self.ledger, self.contract, self.bridge, seed)
        self.arbitration = ArbitrationSystem(
            self.ledger,
            self.contract,
            self.bridge,
            self.config.jury,
            self.config.freeze_ticks,
            self.escrow,
            self.fee_sink,
            self.view,
        )
        self.bridge.attach_arbitration(self.arbitration)

        self.ledger.append_event(
            "Genesis",
            {
                "name": name,
                "seed": seed,
                "config": config_payload(self.config),
                "treasury": self.treasury,
                "fee_sink": self.fee_sink,
                "escrow": self.escrow,
            },
        )

    def view(self) -> SimView:
        return SimView(self)

    def _operator_blocked(self, operator: Address) -> bool:
        if self.engine.is_phishing_operator(operator):
            return True
        account = self.ledger.accounts.get(operator)
        return bool(account and account.explorer_flagged)

    def install_model_entry(self, sender: str, recipient: str, score: float) -> None:
        self.scorer.set_entry(sender, recipient, score)
        self.ledger.append_event(
            "ModelTableSet", {"sender": sender, "recipient": recipient, "score": repr(score)}
        )

    def blacklist_operator(self, operator: Address) -> None:
        self.engine.blacklist_operator(operator)
        self.ledger.append_event("PhishingListed", {"operator": operator})
