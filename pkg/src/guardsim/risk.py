"""Rule-based risk engine for proposed token transfers.

Every proposed transfer is reduced to a deterministic feature vector drawn
from the chain snapshot, run through five rule filters plus a pluggable
scoring model, and mapped to one of three verdicts: safe, may_lost, hacked.

The whole pipeline is a pure function of (intent, snapshot, config), and the
feature vector is logged with each verdict so that any verdict in any log can
be recomputed offline, bit for bit, via `classify_payload`.

Rule table:
    R1_UNDERPRICED   weak    declared price below beta * collection floor
    R2_HIGH_TURNOVER weak    token changed hands too often inside the window
    R3_LOW_CREDIT    weak    recipient credit score under the threshold
    R4_FLAGGED_PARTY strong  sender or recipient carries an explorer flag
    R5_PRIOR_ABNORMAL weak   token drew an abnormal verdict inside the window

Verdict mapping: any strong hit or model score >= p_hacked -> hacked;
otherwise any weak hit or model score >= p_suspect -> may_lost; else safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Protocol

from .config import RiskConfig
from .ledger import Address
from .units import UNIT, fmt_fraction, fmt_units, parse_fraction

SAFE = "safe"
MAY_LOST = "may_lost"
HACKED = "hacked"

R1_UNDERPRICED = "R1_UNDERPRICED"
R2_HIGH_TURNOVER = "R2_HIGH_TURNOVER"
R3_LOW_CREDIT = "R3_LOW_CREDIT"
R4_FLAGGED_PARTY = "R4_FLAGGED_PARTY"
R5_PRIOR_ABNORMAL = "R5_PRIOR_ABNORMAL"

WEAK = "weak"
STRONG = "strong"

RULE_SEVERITY = {
    R1_UNDERPRICED: WEAK,
    R2_HIGH_TURNOVER: WEAK,
    R3_LOW_CREDIT: WEAK,
    R4_FLAGGED_PARTY: STRONG,
    R5_PRIOR_ABNORMAL: WEAK,
}


@dataclass(frozen=True)
class TransferIntent:
    """Immutable snapshot of one proposed transfer awaiting evaluation."""

    caller: Address
    from_addr: Address
    to_addr: Address
    token_id: int
    price: int  # sub-units; 0 means gift
    time: int


@dataclass(frozen=True)
class RuleHit:
    rule_id: str
    severity: str
    detail: str

    def to_payload(self) -> dict:
        return {"rule": self.rule_id, "severity": self.severity, "detail": self.detail}


@dataclass
class FeatureVector:
    """Everything the verdict depends on, in offline-recomputable form."""

    sender: Address
    recipient: Address
    price: int
    floor: int | None
    price_ratio: Fraction | None  # None when price is 0 or no floor exists
    turnover_count: int
    sender_credit: float
    recipient_credit: float
    sender_flagged: bool
    recipient_flagged: bool
    token_state: str
    prior_abnormal: bool
    model_score: float = 0.0

    def to_payload(self) -> dict:
        return {
            "sender": self.sender,
            "recipient": self.recipient,
            "price": fmt_units(self.price),
            "floor": None if self.floor is None else fmt_units(self.floor),
            "price_ratio": None if self.price_ratio is None else fmt_fraction(self.price_ratio),
            "turnover_count": self.turnover_count,
            "sender_credit": repr(self.sender_credit),
            "recipient_credit": repr(self.recipient_credit),
            "sender_flagged": self.sender_flagged,
            "recipient_flagged": self.recipient_flagged,
            "token_state": self.token_state,
            "prior_abnormal": self.prior_abnormal,
            "model_score": repr(self.model_score),
        }


@dataclass(frozen=True)
class RiskVerdict:
    status: str
    hits: tuple[RuleHit, ...]
    features: FeatureVector


class ChainView(Protocol):
    """Read-only snapshot surface the feature extractor consumes."""

    @property
    def now(self) -> int: ...

    def token(self, token_id: int): ...

    def tokens(self) -> Iterable: ...

    def account(self, address: Address): ...

    def tokens_owned_by(self, address: Address) -> Iterable: ...


# -- feature extraction ------------------------------------------------------


def collection_floor(view: ChainView) -> int | None:
    """Lowest nonzero last-sale price across the collection, or None if nothing sold."""
    floor: int | None = None
    for token in view.tokens():
        last_sale = token.last_sale_price
        if last_sale and (floor is None or last_sale < floor):
            floor = last_sale
    return floor


def credit_score(address: Address, view: ChainView, config: RiskConfig) -> float:
    """Wealth-and-age credit heuristic with a heavy penalty for flagged accounts.

    score = w_portfolio * log2(1 + portfolio value)
          + w_age * log2(1 + account age in ticks)
          - w_flag * 100 if explorer-flagged
    """
    account = view.account(address)
    portfolio_units = sum(token.last_sale_price or 0 for token in view.tokens_owned_by(address))
    age = view.now - account.created_at
    score = config.credit_w_portfolio * math.log2(1 + portfolio_units / UNIT)
    score += config.credit_w_age * math.log2(1 + age)
    if account.explorer_flagged:
        score -= config.credit_w_flag * 100.0
    return score


def extract_features(intent: TransferIntent, view: ChainView, config: RiskConfig) -> FeatureVector:
    token = view.token(intent.token_id)
    floor = collection_floor(view)
    ratio = Fraction(intent.price, floor) if intent.price > 0 and floor else None
    window = config.window_ticks
    turnover = 0
    for entry in reversed(token.provenance):
        if view.now - entry.time >= window:
            break
        turnover += 1
    prior_abnormal = any(view.now - t < window for t in reversed(token.abnormal_times))
    sender_acct = view.account(intent.from_addr)
    recipient_acct = view.account(intent.to_addr)
    return FeatureVector(
        sender=intent.from_addr,
        recipient=intent.to_addr,
        price=intent.price,
        floor=floor,
        price_ratio=ratio,
        turnover_count=turnover,
        sender_credit=credit_score(intent.from_addr, view, config),
        recipient_credit=credit_score(intent.to_addr, view, config),
        sender_flagged=sender_acct.explorer_flagged,
        recipient_flagged=recipient_acct.explorer_flagged,
        token_state=str(token.state.value),
        prior_abnormal=prior_abnormal,
    )


# -- rules and verdict mapping -------------------------------------------------


def rule_hits(features: FeatureVector, config: RiskConfig) -> tuple[RuleHit, ...]:
    hits: list[RuleHit] = []
    if features.price_ratio is not None and features.price_ratio < config.beta_underprice:
        hits.append(RuleHit(R1_UNDERPRICED, WEAK, f"price ratio {fmt_fraction(features.price_ratio)}"))
    if features.turnover_count >= config.turnover_threshold:
        hits.append(RuleHit(R2_HIGH_TURNOVER, WEAK, f"{features.turnover_count} transfers in window"))
    if features.recipient_credit < config.credit_threshold:
        hits.append(RuleHit(R3_LOW_CREDIT, WEAK, f"recipient credit {features.recipient_credit:.2f}"))
    if features.sender_flagged or features.recipient_flagged:
        side = "sender" if features.sender_flagged else "recipient"
        hits.append(RuleHit(R4_FLAGGED_PARTY, STRONG, f"{side} explorer-flagged"))
    if features.prior_abnormal:
        hits.append(RuleHit(R5_PRIOR_ABNORMAL, WEAK, "abnormal verdict in window"))
    return tuple(hits)


def classify(hits: Iterable[RuleHit], model_score: float, config: RiskConfig) -> str:
    hits = tuple(hits)
    if any(h.severity == STRONG for h in hits) or model_score >= config.p_hacked:
        return HACKED
    if hits or model_score >= config.p_suspect:
        return MAY_LOST
    return SAFE


def classify_payload(features_payload: dict, config: RiskConfig) -> tuple[str, list[str]]:
    """Recompute (status, rule ids) from a logged feature payload; exact."""
    ratio_text = features_payload["price_ratio"]
    features = FeatureVector(
        sender=features_payload["sender"],
        recipient=features_payload["recipient"],
        price=0,
        floor=None,
        price_ratio=None if ratio_text is None else parse_fraction(ratio_text),
        turnover_count=int(features_payload["turnover_count"]),
        sender_credit=float(features_payload["sender_credit"]),
        recipient_credit=float(features_payload["recipient_credit"]),
        sender_flagged=bool(features_payload["sender_flagged"]),
        recipient_flagged=bool(features_payload["recipient_flagged"]),
        token_state=features_payload["token_state"],
        prior_abnormal=bool(features_payload["prior_abnormal"]),
        model_score=float(features_payload["model_score"]),
    )
    hits = rule_hits(features, config)
    return classify(hits, features.model_score, config), [h.rule_id for h in hits]


# -- scoring model -------------------------------------------------------------

Scorer = Callable[[FeatureVector], float]


def zero_scorer(_features: FeatureVector) -> float:
    """Default stand-in for the learned model: scores everything 0."""
    return 0.0


@dataclass
class TableScorer:
    """Deterministic scenario scorer keyed by (sender, recipient); '*' wildcards."""

    entries: dict[tuple[str, str], float] = field(default_factory=dict)

    def set_entry(self, sender: str, recipient: str, score: float) -> None:
        self.entries[(sender, recipient)] = score

    def __call__(self, features: FeatureVector) -> float:
        for key in (
            (features.sender, features.recipient),
            (features.sender, "*"),
            ("*", features.recipient),
            ("*", "*"),
        ):
            if key in self.entries:
                return self.entries[key]
        return 0.0


class RiskEngine:
    """Bundles config, the pluggable scorer and the phishing-operator list."""

    def __init__(self, config: RiskConfig, scorer: Scorer | None = None):
        self.config = config
        self.scorer: Scorer = scorer or zero_scorer
        self._phishing_operators: set[Address] = set()

    def evaluate(self, intent: TransferIntent, view: ChainView) -> RiskVerdict:
        features = extract_features(intent, view, self.config)
        features.model_score = self.scorer(features)
        hits = rule_hits(features, self.config)
        return RiskVerdict(classify(hits, features.model_score, self.config), hits, features)

    def blacklist_operator(self, address: Address) -> None:
        self._phishing_operators.add(address)

    def is_phishing_operator(self, address: Address) -> bool:
        return address in self._phishing_operators
