"""Main/auxiliary wallet linkage and the owner-facing lock/unlock flow.

Wallet signatures are simulated as keyed digests: each address owns a secret
derived from the run seed, and the auxiliary wallet's key signs both link
registrations and unlock attestations. Attestations are single-use, so a
captured one cannot be replayed.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

from .errors import (
    NoAuxRegistered,
    NotLocked,
    NotOwner,
    ReclaimedImmutable,
    SelfLink,
    SignatureInvalid,
)
from .ledger import Address, Ledger
from .token import TokenContract, TokenState

_KEY_DOMAIN = b"guardsim/wallet-key/v1"


def wallet_secret(seed: int, address: Address) -> bytes:
    return hashlib.sha256(_KEY_DOMAIN + seed.to_bytes(8, "big") + address.encode("ascii")).digest()


@dataclass(frozen=True)
class WalletLink:
    main: Address
    aux: Address
    nonce: int
    digest: bytes


@dataclass(frozen=True)
class UnlockAttestation:
    main: Address
    aux: Address
    token_id: int
    time: int
    nonce: int  # distinguishes attestations forged within the same tick
    digest: bytes


class AccessControl:
    def __init__(self, ledger: Ledger, contract: TokenContract, bridge, seed: int):
        self.ledger = ledger
        self.contract = contract
        self.bridge = bridge
        self.seed = seed
        self.links: dict[Address, WalletLink] = {}
        self._nonces: dict[Address, int] = {}
        self._attestation_nonces: dict[Address, int] = {}
        self._consumed: set[bytes] = set()

    # -- simulated signing -------------------------------------------------

    def registration_digest(self, main: Address, aux: Address, nonce: int | None = None) -> bytes:
        """Digest the aux wallet produces to prove it joins ``main``."""
        if nonce is None:
            nonce = self._nonces.get(main, 0)
        message = f"register|{main}|{aux}|{nonce}".encode("ascii")
        return hmac.new(wallet_secret(self.seed, aux), message, hashlib.sha256).digest()

    def attestation_digest(self, main: Address, aux: Address, token_id: int, time: int, nonce: int) -> bytes:
        message = f"unlock|{main}|{aux}|{token_id}|{time}|{nonce}".encode("ascii")
        return hmac.new(wallet_secret(self.seed, aux), message, hashlib.sha256).digest()

    def make_attestation(self, main: Address, token_id: int) -> UnlockAttestation:
        """Forge a valid single-use attestation for the active link (harness helper)."""
        link = self.links.get(main)
        if link is None:
            raise NoAuxRegistered(main)
        now = self.ledger.time
        nonce = self._attestation_nonces.get(main, 0)
        self._attestation_nonces[main] = nonce + 1
        digest = self.attestation_digest(main, link.aux, token_id, now, nonce)
        return UnlockAttestation(main, link.aux, token_id, now, nonce, digest)

    # -- operations ------------------------------------------------------------

    def register_aux(self, main: Address, aux: Address, digest: bytes) -> None:
        if main == aux:
            raise SelfLink(main)
        self.ledger.account(main)
        self.ledger.account(aux)
        nonce = self._nonces.get(main, 0)
        expected = self.registration_digest(main, aux, nonce)
        if not hmac.compare_digest(digest, expected):
            raise SignatureInvalid("registration digest mismatch")
        self.links[main] = WalletLink(main, aux, nonce, digest)
        self._nonces[main] = nonce + 1
        self.ledger.append_event("AuxRegistered", {"main": main, "aux": aux, "nonce": nonce})

    def lock(self, owner: Address, token_id: int) -> None:
        token = self.contract.token(token_id)
        if token.owner != owner:
            raise NotOwner(owner)
        # double lock is an idempotent no-op; the event is still recorded
        self.bridge.privileged_dispatch("lock", origin="dac", token_id=token_id)

    def unlock(self, main: Address, token_id: int, attestation: UnlockAttestation) -> None:
        token = self.contract.token(token_id)
        if token.state is TokenState.RECLAIMED:
            raise ReclaimedImmutable(str(token_id))
        if token.owner != main:
            raise NotOwner(main)
        if token.state is not TokenState.LOCKED:
            raise NotLocked(str(token_id))
        link = self.links.get(main)
        if link is None:
            raise NoAuxRegistered(main)
        valid = (
            attestation.main == main
            and attestation.aux == link.aux
            and attestation.token_id == token_id
            and attestation.digest not in self._consumed
            and hmac.compare_digest(
                attestation.digest,
                self.attestation_digest(main, link.aux, token_id, attestation.time, attestation.nonce),
            )
        )
        if not valid:
            raise SignatureInvalid("unlock attestation rejected")
        self._consumed.add(attestation.digest)
        # the owner accepts transfer risk by unlocking; record that consent
        self.ledger.append_event("UnlockConfirmed", {"main": main, "aux": link.aux, "token_id": token_id})
        self.bridge.privileged_dispatch("unlock", origin="dac", token_id=token_id)
