"""Session state machines for the authenticated ephemeral key agreement.

One client session tracks: advertisement seen, association, Message 1
verification, Message 2 emission. One AP session tracks the mirror image.
Both end in PskAgreed with a fresh 32-octet PSK, or Aborted.

Authentication binds each signature to the session by default: the signed
payload covers a role tag, both MAC addresses, the negotiated group and an
8-octet session nonce along with the ephemeral public key. strict_frames
mode drops the nonce trailer and signs the raw public key only, matching
the minimal message layout at the cost of the cross-session replay check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import negotiation
from .crypto import (
    EcdhKeyPair,
    EcdsaKeyPair,
    EcGroup,
    Point,
    SeededRng,
    SharedPsk,
    ecdh_agree,
    ecdh_generate,
    ecdsa_generate,
    ecdsa_sign,
    ecdsa_verify,
    octets_to_point,
    point_to_octets,
    registry_lookup,
    strongest_group_id,
)
from .frames import SESSION_NONCE_OCTETS, SoapIe, SoapMessage

TAG_MESSAGE1 = b"\x01"
TAG_MESSAGE2 = b"\x02"


class Role(Enum):
    CLIENT = "client"
    AP = "ap"


class Phase(Enum):
    IDLE = "idle"
    ADVERTISEMENT_SEEN = "advertisement-seen"
    AWAIT_MSG1 = "await-msg1"
    AWAIT_MSG2 = "await-msg2"
    PSK_AGREED = "psk-agreed"
    ABORTED = "aborted"


TERMINAL_PHASES = frozenset({Phase.PSK_AGREED, Phase.ABORTED})


@dataclass
class StationIdentity:
    """Long-lived station identity: MAC, supported groups, signing key.

    The signing key lives on the curve of the strongest supported group;
    the key-size octet in the advertisement tells peers which curve that is.
    """

    mac: bytes
    role: Role
    group_ids: tuple[int, ...]
    ecdsa: EcdsaKeyPair


def make_identity(mac: bytes, role: Role, group_ids, rng: SeededRng) -> StationIdentity:
    ids = tuple(sorted(set(group_ids)))
    strongest = strongest_group_id(ids)
    if strongest is None:
        raise ValueError("identity requires at least one registered group")
    group = registry_lookup(strongest)
    return StationIdentity(bytes(mac), role, ids, ecdsa_generate(group, rng))


def signed_payload(
    tag: bytes,
    sender_mac: bytes,
    receiver_mac: bytes,
    group_id: int,
    session_nonce: bytes,
    ecdh_public: bytes,
) -> bytes:
    return tag + sender_mac + receiver_mac + bytes([group_id]) + session_nonce + ecdh_public


@dataclass
class _SessionCore:
    identity: StationIdentity
    rng: SeededRng
    strict_frames: bool = False
    phase: Phase = Phase.IDLE
    abort_reason: str | None = None
    group: EcGroup | None = None
    peer_mac: bytes | None = None
    peer_signer_group: EcGroup | None = None
    peer_signer_point: Point | None = None
    psk: SharedPsk | None = None
    _ephemeral: EcdhKeyPair | None = field(default=None, repr=False)

    def abort(self, reason: str) -> None:
        self.phase = Phase.ABORTED
        self.abort_reason = reason
        self._drop_ephemeral()

    def _drop_ephemeral(self) -> None:
        # The private scalar is never serialized; dropping the reference is
        # the zeroization this model supports.
        self._ephemeral = None

    def _verify_peer(self, tag: bytes, sender: bytes, receiver: bytes,
                     nonce: bytes, msg: SoapMessage) -> bool:
        assert self.group is not None and self.peer_signer_group is not None
        if self.strict_frames:
            payload = msg.ecdh_public
        else:
            payload = signed_payload(
                tag, sender, receiver, self.group.group_id, nonce, msg.ecdh_public
            )
        return ecdsa_verify(
            self.peer_signer_group, self.peer_signer_point, payload, msg.signature
        )

    def _sign_own(self, tag: bytes, receiver: bytes, nonce: bytes,
                  ecdh_public: bytes) -> bytes:
        assert self.group is not None
        if self.strict_frames:
            payload = ecdh_public
        else:
            payload = signed_payload(
                tag, self.identity.mac, receiver, self.group.group_id, nonce, ecdh_public
            )
        return ecdsa_sign(self.identity.ecdsa, payload)


class ClientSession(_SessionCore):
    """Client half: latch an advertisement, answer Message 1 with Message 2."""

    def __init__(
        self,
        identity: StationIdentity,
        rng: SeededRng,
        *,
        strict_frames: bool = False,
        pinned_ap_key: tuple[int, Point] | None = None,
        seen_nonces: set | None = None,
    ):
        super().__init__(identity, rng, strict_frames)
        self.pinned_ap_key = pinned_ap_key
        self.seen_nonces = seen_nonces if seen_nonces is not None else set()
        self.outcome: negotiation.NegotiationOutcome | None = None
        self.session_nonce: bytes | None = None

    def on_advertisement(self, ie: SoapIe, ap_mac: bytes):
        """Returns (response element or None, event)."""
        if self.phase is not Phase.IDLE:
            return None, "phase"
        try:
            signer_group, signer_point = negotiation.resolve_signer(ie)
        except ValueError:
            return None, "bad-signer"
        if self.pinned_ap_key is not None:
            pinned_gid, pinned_point = self.pinned_ap_key
            if signer_group.group_id != pinned_gid or signer_point != pinned_point:
                return None, "pinned-mismatch"
        outcome = negotiation.select_group(ie.group_ids, self.identity.group_ids)
        self.outcome = outcome
        if not outcome.is_soap:
            return None, "fallback"
        self.group = registry_lookup(outcome.selected_group_id)
        self.peer_mac = bytes(ap_mac)
        self.peer_signer_group = signer_group
        self.peer_signer_point = signer_point
        self.phase = Phase.ADVERTISEMENT_SEEN
        return negotiation.response_ie(self.identity.ecdsa, self.group.group_id), "respond"

    def mark_associated(self) -> None:
        if self.phase is Phase.ADVERTISEMENT_SEEN:
            self.phase = Phase.AWAIT_MSG1

    def on_message1(self, msg: SoapMessage, src_mac: bytes):
        """Returns (Message 2 or None, event)."""
        if self.phase is not Phase.AWAIT_MSG1:
            return None, "duplicate" if self.phase is Phase.PSK_AGREED else "phase"
        if src_mac != self.peer_mac:
            return None, "phase"
        if self.strict_frames:
            nonce = b""
        else:
            if msg.session_nonce is None or len(msg.session_nonce) != SESSION_NONCE_OCTETS:
                return None, "malformed"
            if msg.session_nonce in self.seen_nonces:
                return None, "replay"
            nonce = msg.session_nonce
        if not self._verify_peer(TAG_MESSAGE1, src_mac, self.identity.mac, nonce, msg):
            return None, "signature"
        try:
            peer_public = octets_to_point(self.group, msg.ecdh_public)
        except ValueError:
            return None, "point"
        if not self.strict_frames:
            self.seen_nonces.add(nonce)
            self.session_nonce = nonce
        self._ephemeral = ecdh_generate(self.group, self.rng)
        own_public = point_to_octets(self.group, self._ephemeral.public_point)
        self.psk = ecdh_agree(self._ephemeral, peer_public)
        signature = self._sign_own(TAG_MESSAGE2, self.peer_mac, nonce, own_public)
        self._drop_ephemeral()
        self.phase = Phase.PSK_AGREED
        reply = SoapMessage(
            own_public, signature, None if self.strict_frames else nonce
        )
        return reply, "agreed"


class ApSession(_SessionCore):
    """AP half: accept the client's element, send Message 1, verify Message 2."""

    def __init__(
        self,
        identity: StationIdentity,
        rng: SeededRng,
        client_mac: bytes,
        *,
        strict_frames: bool = False,
    ):
        super().__init__(identity, rng, strict_frames)
        self.peer_mac = bytes(client_mac)
        self.session_nonce: bytes | None = None
        self.claimed_group_id: int | None = None
        self._own_public: bytes | None = None

    def on_response_element(self, ie: SoapIe) -> str:
        if self.phase is not Phase.IDLE:
            return "phase"
        if ie.group_count != 1:
            return "malformed"
        try:
            signer_group, signer_point = negotiation.resolve_signer(ie)
        except ValueError:
            return "bad-signer"
        self.claimed_group_id = ie.group_ids[0]
        self.peer_signer_group = signer_group
        self.peer_signer_point = signer_point
        return "ok"

    def build_message1(self) -> SoapMessage | None:
        """Sign and emit the AP's ephemeral key; None when the session aborts."""
        if self.phase is not Phase.IDLE or self.claimed_group_id is None:
            return None
        if self.claimed_group_id not in self.identity.group_ids:
            self.abort("group-not-offered")
            return None
        self.group = registry_lookup(self.claimed_group_id)
        nonce = b"" if self.strict_frames else self.rng.randbytes(SESSION_NONCE_OCTETS)
        self.session_nonce = nonce or None
        self._ephemeral = ecdh_generate(self.group, self.rng)
        self._own_public = point_to_octets(self.group, self._ephemeral.public_point)
        signature = self._sign_own(TAG_MESSAGE1, self.peer_mac, nonce, self._own_public)
        self.phase = Phase.AWAIT_MSG2
        return SoapMessage(self._own_public, signature, self.session_nonce)

    def retransmit_message1(self) -> SoapMessage | None:
        """Identical bytes to the first transmission; same nonce, same keys."""
        if self.phase is not Phase.AWAIT_MSG2 or self._ephemeral is None:
            return None
        nonce = self.session_nonce or b""
        signature = self._sign_own(TAG_MESSAGE1, self.peer_mac, nonce, self._own_public)
        return SoapMessage(self._own_public, signature, self.session_nonce)

    def on_message2(self, msg: SoapMessage, src_mac: bytes) -> str:
        if self.phase is Phase.PSK_AGREED:
            return "duplicate"
        if self.phase is not Phase.AWAIT_MSG2 or src_mac != self.peer_mac:
            return "phase"
        nonce = b""
        if not self.strict_frames:
            if msg.session_nonce != self.session_nonce:
                # A replayed or cross-session message carries the wrong echo;
                # the signature check would fail regardless.
                return "replay"
            nonce = msg.session_nonce
        if not self._verify_peer(TAG_MESSAGE2, src_mac, self.identity.mac, nonce, msg):
            return "signature"
        try:
            peer_public = octets_to_point(self.group, msg.ecdh_public)
        except ValueError:
            return "point"
        self.psk = ecdh_agree(self._ephemeral, peer_public)
        self._drop_ephemeral()
        self._own_public = None
        self.phase = Phase.PSK_AGREED
        return "agreed"
