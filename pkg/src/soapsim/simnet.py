"""Deterministic discrete-event radio: stations, an optional adversary, and
a tick loop that delivers every transmitted frame one tick later.

Determinism contract: all randomness flows from one run seed through
namespaced SeededRng children, station identity keys flow from a separate
identity seed, entities are processed in a fixed order each tick (adversary
first, then stations in script order), and in-flight frames are delivered
in transmission order. Two runs with the same script and seeds produce
byte-identical transcripts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import negotiation
from .crypto import SeededRng, ecdsa_generate, ecdsa_sign, ecdsa_verify
from .fourway import (
    Authenticator,
    FourwayState,
    Supplicant,
)
from .frames import (
    BROADCAST_MAC,
    ELEMENT_ID_SSID,
    DataFrame,
    FrameSubtype,
    MalformedFrameError,
    ManagementFrame,
    SoapMessage,
    classify_eapol,
    encode_data_frame,
    encode_eapol_key_frame,
    encode_management_frame,
    encode_soap_message,
    find_element,
    management_signing_input,
    parse_data_frame,
    parse_eapol_key_frame,
    parse_management_frame,
    parse_soap_message,
    soap_ie_element,
    soap_ie_from_frame,
)
from .handshake import (
    ApSession,
    ClientSession,
    Phase,
    Role,
    make_identity,
)

RETRY_TIMEOUT_TICKS = 100
MAX_RETRANSMISSIONS = 3
CLIENT_AWAIT_TIMEOUT_TICKS = 450
DEFAULT_MAX_TICKS = 3000
ELEMENT_ID_DEBUG_LEAK = 221


def parse_mac(text: str) -> bytes:
    parts = text.split(":")
    if len(parts) != 6:
        raise ValueError(f"bad mac {text!r}")
    return bytes(int(p, 16) for p in parts)


def format_mac(mac: bytes) -> str:
    return ":".join(f"{b:02x}" for b in mac)


@dataclass
class Mitigations:
    blacklist_threshold: int | None = None
    sign_management_frames: bool = False


@dataclass
class StationConfig:
    station_id: str
    role: str  # "client" | "ap"
    mac: str
    ssid: str = "simnet"
    groups: tuple = (26,)
    soap_aware: bool = True
    legacy_psk: str | None = None  # hex, 32 octets
    force_legacy: bool = False
    pin_ap: str | None = None  # station id whose signing key the client pins
    beacon_period: int = 100
    beacon_offset: int = 0
    debug_leak_psk: bool = False
    # Advertise a key the station cannot sign under (wrong-key injection).
    advertise_bogus_key: bool = False


@dataclass
class AdversaryConfig:
    capabilities: tuple = ()
    mac: str = "02:00:00:00:00:ee"
    ssid: str | None = None  # masquerade / inject target network
    groups: tuple = (26,)
    beacon_period: int = 25
    beacon_offset: int = 0
    advertise_bogus_key: bool = False
    replay_at: int | None = None
    disassoc_at: int | None = None
    target_ap: str | None = None
    target_client: str | None = None


@dataclass
class ScheduleAction:
    tick: int
    station: str
    action: str  # "reset"


@dataclass
class ScenarioScript:
    name: str
    stations: list
    adversary: AdversaryConfig | None = None
    mitigations: Mitigations = field(default_factory=Mitigations)
    schedule: list = field(default_factory=list)
    expectations: list = field(default_factory=list)
    max_ticks: int = DEFAULT_MAX_TICKS
    identity_seed: int = 0
    strict_frames: bool = False


@dataclass
class Transmission:
    origin: str  # station id or "adversary"
    kind: str  # "beacon" | "assoc-request" | "disassoc" | "agreement" | "eapol-key"
    wire: bytes

    @property
    def src_mac(self) -> bytes:
        return bytes(self.wire[10:16])

    @property
    def dst_mac(self) -> bytes:
        return bytes(self.wire[4:10])


class Transcript:
    """Append-only run record with a deterministic JSON rendering."""

    def __init__(self, scenario: str, seed: int):
        self.scenario = scenario
        self.seed = seed
        self.records: list[dict] = []
        self.summaries: dict = {}
        self.secrets: dict = {}

    def tx(self, tick: int, t: Transmission) -> None:
        self.records.append(
            {
                "tick": tick,
                "event": "tx",
                "origin": t.origin,
                "frame": t.kind,
                "src": format_mac(t.src_mac),
                "dst": format_mac(t.dst_mac),
                "size": len(t.wire),
                "hex": t.wire.hex(),
            }
        )

    def note(self, tick: int, event: str, station: str, **detail) -> None:
        record = {"tick": tick, "event": event, "station": station}
        record.update(detail)
        self.records.append(record)

    def transition(self, tick: int, station: str, scope: str, new: str, **detail):
        self.note(tick, "transition", station, scope=scope, to=new, **detail)

    def to_json(self) -> str:
        return json.dumps(
            {
                "scenario": self.scenario,
                "seed": self.seed,
                "records": self.records,
                "summaries": self.summaries,
                "secrets": self.secrets,
            },
            sort_keys=True,
            indent=2,
        )


# ---------------------------------------------------------------------------
# Stations
# ---------------------------------------------------------------------------


class Station:
    """One radio endpoint. Client and AP behavior in a single class keyed on
    role, since they share admission control and mitigation bookkeeping."""

    def __init__(
        self,
        cfg: StationConfig,
        identity,
        rng: SeededRng,
        mitigations: Mitigations,
        transcript: Transcript,
        strict_frames: bool,
    ):
        self.cfg = cfg
        self.identity = identity
        self.rng = rng
        self.mitigations = mitigations
        self.transcript = transcript
        self.strict_frames = strict_frames
        self.mac = identity.mac
        self.state = "scanning" if cfg.role == "client" else "ready"
        self.session_counter = 0
        self.psk_history: list[bytes] = []
        self.kck_history: list[bytes] = []
        self.fail_counts: dict[bytes, int] = {}
        self.blocked: set[bytes] = set()
        self.known_keys: dict[bytes, tuple] = {}  # mac -> (group, point)
        self.seen_nonces: set = set()
        self.pinned_ap_key = None  # filled by the simulation when pin_ap is set
        # Client side
        self.session: ClientSession | None = None
        self.supplicant: Supplicant | None = None
        self.ap_mac: bytes | None = None
        self.await_since: int | None = None
        self.fallback_recorded = False
        self.mode: str | None = None  # "soap" | "legacy" once latched
        # AP side: client mac -> session entry
        self.entries: dict[bytes, dict] = {}
        self.decoy_ecdsa = (
            ecdsa_generate(identity.ecdsa.group, rng.child("decoy"))
            if cfg.advertise_bogus_key
            else None
        )

    # -- common helpers ----------------------------------------------------

    def _out_mgmt(self, frame: ManagementFrame, kind: str) -> Transmission:
        if self.mitigations.sign_management_frames:
            frame.signature = ecdsa_sign(
                self.identity.ecdsa, management_signing_input(frame)
            )
        return Transmission(self.cfg.station_id, kind, encode_management_frame(frame))

    def _out_eapol(self, dst: bytes, packet: bytes, kind: str) -> Transmission:
        frame = DataFrame(self.mac, dst, packet, from_ds=self.cfg.role == "ap")
        return Transmission(self.cfg.station_id, kind, encode_data_frame(frame))

    def _sig_failure(self, tick: int, mac: bytes, context: str) -> None:
        self.transcript.note(
            tick, "discard", self.cfg.station_id,
            reason="signature", context=context, src=format_mac(mac),
        )
        threshold = self.mitigations.blacklist_threshold
        if threshold is None:
            return
        count = self.fail_counts.get(mac, 0) + 1
        self.fail_counts[mac] = count
        if count >= threshold and mac not in self.blocked:
            self.blocked.add(mac)
            self.transcript.note(
                tick, "blacklisted", self.cfg.station_id, src=format_mac(mac)
            )
            if self.session is not None and self.session.peer_mac == mac:
                self._client_restart(tick, "blacklisted")

    def _sig_success(self, mac: bytes) -> None:
        self.fail_counts[mac] = 0

    def _admit(self, tick: int, frame_bytes: bytes) -> bool:
        src = bytes(frame_bytes[10:16])
        if src in self.blocked:
            self.transcript.note(
                tick, "blocked", self.cfg.station_id, src=format_mac(src)
            )
            return False
        return True

    def _mgmt_signature_ok(self, tick: int, frame: ManagementFrame) -> bool:
        """Admission check for management frames under the signing mitigation."""
        if not self.mitigations.sign_management_frames:
            return True
        known = self.known_keys.get(frame.src_mac)
        if known is not None:
            group, point = known
            if frame.signature is None or not ecdsa_verify(
                group, point, management_signing_input(frame), frame.signature
            ):
                self._sig_failure(tick, frame.src_mac, "mgmt")
                return False
            self._sig_success(frame.src_mac)
            return True
        if frame.signature is not None:
            # No provisioned key: check self-consistency against the key the
            # frame itself advertises, when it advertises one.
            ie = soap_ie_from_frame(frame)
            if ie is not None:
                try:
                    group, point = negotiation.resolve_signer(ie)
                except ValueError:
                    return False
                if not ecdsa_verify(
                    group, point, management_signing_input(frame), frame.signature
                ):
                    self._sig_failure(tick, frame.src_mac, "mgmt")
                    return False
        return True

    # -- tick driver -------------------------------------------------------

    def on_tick(self, tick: int) -> list[Transmission]:
        out: list[Transmission] = []
        if self.cfg.role == "ap":
            period = max(1, self.cfg.beacon_period)
            if tick >= self.cfg.beacon_offset and (
                (tick - self.cfg.beacon_offset) % period == 0
            ):
                out.append(self._beacon())
            out.extend(self._ap_check_timers(tick))
        else:
            self._client_check_timers(tick)
        return out

    def _beacon(self) -> Transmission:
        elements = [(ELEMENT_ID_SSID, self.cfg.ssid.encode())]
        if self.cfg.soap_aware:
            advertised_key = self.decoy_ecdsa or self.identity.ecdsa
            elements.append(
                soap_ie_element(
                    negotiation.advertisement_ie(advertised_key, self.identity.group_ids)
                )
            )
        if self.cfg.debug_leak_psk and self.psk_history:
            elements.append((ELEMENT_ID_DEBUG_LEAK, self.psk_history[-1]))
        frame = ManagementFrame(
            FrameSubtype.BEACON, self.mac, BROADCAST_MAC, tuple(elements)
        )
        return self._out_mgmt(frame, "beacon")

    # -- frame dispatch ----------------------------------------------------

    def on_frame(self, tick: int, wire: bytes) -> list[Transmission]:
        if not self._admit(tick, wire):
            return []
        if wire[0] & 0x0C == 0x08:
            return self._on_data(tick, wire)
        try:
            frame = parse_management_frame(wire)
        except MalformedFrameError as exc:
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason="malformed", detail=str(exc)
            )
            return []
        if frame.dst_mac not in (self.mac, BROADCAST_MAC):
            return []
        if not self._mgmt_signature_ok(tick, frame):
            return []
        if self.cfg.role == "client":
            return self._client_on_mgmt(tick, frame)
        return self._ap_on_mgmt(tick, frame)

    def _on_data(self, tick: int, wire: bytes) -> list[Transmission]:
        try:
            frame = parse_data_frame(wire)
        except MalformedFrameError as exc:
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason="malformed", detail=str(exc)
            )
            return []
        if frame.dst_mac != self.mac:
            return []
        kind = classify_eapol(frame.payload)
        if self.cfg.role == "client":
            if kind == "agreement":
                return self._client_on_agreement(tick, frame)
            if kind == "key":
                return self._client_on_eapol_key(tick, frame)
        else:
            if kind == "agreement":
                return self._ap_on_agreement(tick, frame)
            if kind == "key":
                return self._ap_on_eapol_key(tick, frame)
        self.transcript.note(
            tick, "discard", self.cfg.station_id, reason="unknown-eapol"
        )
        return []

    # -- client ------------------------------------------------------------

    def _client_restart(self, tick: int, reason: str) -> None:
        if self.session is not None and self.session.phase is not Phase.ABORTED:
            self.session.abort(reason)
        self.session = None
        self.supplicant = None
        self.ap_mac = None
        self.await_since = None
        self.mode = None
        self.state = "scanning"
        self.transcript.transition(
            tick, self.cfg.station_id, "station", "scanning", reason=reason
        )

    def _client_check_timers(self, tick: int) -> None:
        if self.state in ("soap", "fourway") and self.await_since is not None:
            if tick - self.await_since > CLIENT_AWAIT_TIMEOUT_TICKS:
                self._client_restart(tick, "timeout")

    def _client_on_mgmt(self, tick: int, frame: ManagementFrame) -> list[Transmission]:
        if frame.subtype is FrameSubtype.DISASSOC:
            if self.ap_mac == frame.src_mac and self.state in ("fourway", "established"):
                self.state = "halted"
                self.session = None
                self.supplicant = None
                self.transcript.transition(
                    tick, self.cfg.station_id, "station", "halted", reason="disassociated"
                )
            return []
        if frame.subtype not in (FrameSubtype.BEACON, FrameSubtype.PROBE_RESPONSE):
            return []
        if self.state != "scanning":
            return []
        ssid = find_element(frame, ELEMENT_ID_SSID)
        if ssid is None or ssid.decode(errors="replace") != self.cfg.ssid:
            return []
        ie = soap_ie_from_frame(frame) if self.cfg.soap_aware else None
        if ie is not None and not self.cfg.force_legacy:
            return self._client_latch_soap(tick, frame, ie)
        return self._client_latch_legacy(tick, frame)

    def _client_latch_soap(self, tick, frame, ie) -> list[Transmission]:
        self.session_counter += 1
        session = ClientSession(
            self.identity,
            self.rng.child(f"session{self.session_counter}"),
            strict_frames=self.strict_frames,
            pinned_ap_key=self.pinned_ap_key,
            seen_nonces=self.seen_nonces,
        )
        response, event = session.on_advertisement(ie, frame.src_mac)
        if event == "fallback":
            self.fallback_recorded = True
            self.transcript.note(
                tick, "negotiation", self.cfg.station_id, outcome="wpa-psk-fallback"
            )
            return self._client_latch_legacy(tick, frame)
        if event != "respond":
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason=event,
                src=format_mac(frame.src_mac),
            )
            return []
        self.session = session
        self.ap_mac = frame.src_mac
        self.state = "soap"
        self.mode = "soap"
        self.await_since = tick
        self.transcript.note(
            tick, "negotiation", self.cfg.station_id,
            outcome=f"group-{session.group.group_id}",
        )
        self.known_keys[frame.src_mac] = (
            session.peer_signer_group, session.peer_signer_point
        )
        session.mark_associated()
        assoc = ManagementFrame(
            FrameSubtype.ASSOC_REQUEST,
            self.mac,
            frame.src_mac,
            ((ELEMENT_ID_SSID, self.cfg.ssid.encode()), soap_ie_element(response)),
        )
        self.transcript.transition(tick, self.cfg.station_id, "station", "soap")
        return [self._out_mgmt(assoc, "assoc-request")]

    def _client_latch_legacy(self, tick, frame) -> list[Transmission]:
        if self.cfg.legacy_psk is None:
            self.transcript.note(
                tick, "note", self.cfg.station_id, detail="no legacy psk configured"
            )
            return []
        if not self.cfg.soap_aware or self.cfg.force_legacy:
            self.fallback_recorded = self.fallback_recorded or self.cfg.force_legacy
        self.ap_mac = frame.src_mac
        self.state = "fourway"
        self.mode = "legacy"
        self.await_since = tick
        assoc = ManagementFrame(
            FrameSubtype.ASSOC_REQUEST,
            self.mac,
            frame.src_mac,
            ((ELEMENT_ID_SSID, self.cfg.ssid.encode()),),
        )
        self.transcript.transition(
            tick, self.cfg.station_id, "station", "fourway", mode="legacy"
        )
        return [self._out_mgmt(assoc, "assoc-request")]

    def _client_on_agreement(self, tick, frame: DataFrame) -> list[Transmission]:
        if self.session is None or self.state != "soap":
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason="phase",
                src=format_mac(frame.src_mac),
            )
            return []
        try:
            msg = parse_soap_message(
                frame.payload,
                key_octets=self.session.group.key_size_octets,
                signature_octets=self.session.peer_signer_group.key_size_octets,
            )
        except MalformedFrameError as exc:
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason="malformed", detail=str(exc)
            )
            return []
        reply, event = self.session.on_message1(msg, frame.src_mac)
        if event == "signature":
            self._sig_failure(tick, frame.src_mac, "agreement-msg1")
            return []
        if event != "agreed":
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason=event,
                src=format_mac(frame.src_mac),
            )
            return []
        self._sig_success(frame.src_mac)
        psk = self.session.psk
        self.psk_history.append(bytes(psk))
        self.transcript.transition(
            tick, self.cfg.station_id, "soap", "psk-agreed",
            session=self.session_counter,
        )
        self.supplicant = Supplicant(
            psk, frame.src_mac, self.mac, self.rng.child(f"supp{self.session_counter}")
        )
        self.state = "fourway"
        self.await_since = tick
        self.transcript.transition(tick, self.cfg.station_id, "station", "fourway")
        return [self._out_eapol(frame.src_mac, encode_soap_message(reply), "agreement")]

    def _client_on_eapol_key(self, tick, frame: DataFrame) -> list[Transmission]:
        if (
            self.supplicant is None
            and self.mode == "legacy"
            and self.state == "fourway"
            and frame.src_mac == self.ap_mac
            and self.cfg.legacy_psk is not None
        ):
            self.session_counter += 1
            self.supplicant = Supplicant(
                bytes.fromhex(self.cfg.legacy_psk),
                self.ap_mac,
                self.mac,
                self.rng.child(f"supp{self.session_counter}"),
            )
        if self.supplicant is None or frame.src_mac != self.ap_mac:
            self.transcript.note(tick, "discard", self.cfg.station_id, reason="phase")
            return []
        try:
            key_frame = parse_eapol_key_frame(frame.payload)
        except MalformedFrameError as exc:
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason="malformed", detail=str(exc)
            )
            return []
        reply, event = self.supplicant.on_frame(key_frame)
        out = []
        if reply is not None:
            out.append(
                self._out_eapol(
                    frame.src_mac, encode_eapol_key_frame(reply), "eapol-key"
                )
            )
        if event == "established":
            self.kck_history.append(self.supplicant.keys.kck)
            self.state = "established"
            self.await_since = None
            self.transcript.transition(tick, self.cfg.station_id, "station", "established")
        elif event == "mic-mismatch":
            self.transcript.transition(
                tick, self.cfg.station_id, "fourway", "failed", reason="mic-mismatch"
            )
            self._client_restart(tick, "fourway-failed")
        elif event in ("replay", "unexpected"):
            self.transcript.note(tick, "discard", self.cfg.station_id, reason=event)
        return out

    # -- AP ----------------------------------------------------------------

    def _ap_check_timers(self, tick: int) -> list[Transmission]:
        out = []
        for mac, entry in self.entries.items():
            if entry.get("done"):
                continue
            last = entry.get("last_tx")
            if last is None or tick - last < RETRY_TIMEOUT_TICKS:
                continue
            if entry["attempts"] >= MAX_RETRANSMISSIONS:
                entry["done"] = True
                session = entry.get("soap")
                if session is not None and session.phase is Phase.AWAIT_MSG2:
                    session.abort("timeout")
                self.transcript.transition(
                    tick, self.cfg.station_id, "session", "aborted",
                    peer=format_mac(mac), reason="timeout",
                )
                continue
            packet = None
            kind = "agreement"
            if entry.get("await") == "m2" and entry.get("soap") is not None:
                msg = entry["soap"].retransmit_message1()
                if msg is not None:
                    packet = encode_soap_message(msg)
            elif entry.get("auth") is not None:
                key_frame = entry["auth"].retransmit()
                if key_frame is not None:
                    packet = encode_eapol_key_frame(key_frame)
                    kind = "eapol-key"
            if packet is None:
                entry["done"] = True
                continue
            entry["attempts"] += 1
            entry["last_tx"] = tick
            self.transcript.note(
                tick, "retransmit", self.cfg.station_id, peer=format_mac(mac)
            )
            out.append(self._out_eapol(mac, packet, kind))
        return out

    def _ap_on_mgmt(self, tick: int, frame: ManagementFrame) -> list[Transmission]:
        if frame.subtype is FrameSubtype.DISASSOC:
            entry = self.entries.get(frame.src_mac)
            if entry is not None:
                del self.entries[frame.src_mac]
                self.transcript.note(
                    tick, "client-disassociated", self.cfg.station_id,
                    src=format_mac(frame.src_mac),
                )
            return []
        if frame.subtype is not FrameSubtype.ASSOC_REQUEST:
            return []
        ssid = find_element(frame, ELEMENT_ID_SSID)
        if ssid is None or ssid.decode(errors="replace") != self.cfg.ssid:
            return []
        existing = self.entries.get(frame.src_mac)
        if existing is not None and existing.get("established"):
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason="replay",
                detail="association from established client",
                src=format_mac(frame.src_mac),
            )
            return []
        ie = soap_ie_from_frame(frame) if self.cfg.soap_aware else None
        if ie is not None:
            return self._ap_start_soap(tick, frame, ie)
        return self._ap_start_legacy(tick, frame)

    def _ap_start_soap(self, tick, frame, ie) -> list[Transmission]:
        self.session_counter += 1
        session = ApSession(
            self.identity,
            self.rng.child(f"session{self.session_counter}"),
            frame.src_mac,
            strict_frames=self.strict_frames,
        )
        event = session.on_response_element(ie)
        if event != "ok":
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason=event,
                src=format_mac(frame.src_mac),
            )
            return []
        msg = session.build_message1()
        if msg is None:
            self.transcript.transition(
                tick, self.cfg.station_id, "session", "aborted",
                peer=format_mac(frame.src_mac), reason=session.abort_reason,
            )
            return []
        self.known_keys[frame.src_mac] = (
            session.peer_signer_group, session.peer_signer_point
        )
        self.entries[frame.src_mac] = {
            "soap": session,
            "auth": None,
            "attempts": 0,
            "last_tx": tick,
            "await": "m2",
            "established": False,
            "done": False,
        }
        self.transcript.transition(
            tick, self.cfg.station_id, "session", "await-msg2",
            peer=format_mac(frame.src_mac),
        )
        return [self._out_eapol(frame.src_mac, encode_soap_message(msg), "agreement")]

    def _ap_start_legacy(self, tick, frame) -> list[Transmission]:
        if self.cfg.legacy_psk is None:
            self.transcript.note(
                tick, "note", self.cfg.station_id, detail="no legacy psk configured"
            )
            return []
        self.session_counter += 1
        auth = Authenticator(
            bytes.fromhex(self.cfg.legacy_psk),
            self.mac,
            frame.src_mac,
            self.rng.child(f"auth{self.session_counter}"),
        )
        first = auth.start()
        self.entries[frame.src_mac] = {
            "soap": None,
            "auth": auth,
            "attempts": 0,
            "last_tx": tick,
            "await": "m2-key",
            "established": False,
            "done": False,
        }
        self.transcript.transition(
            tick, self.cfg.station_id, "session", "fourway",
            peer=format_mac(frame.src_mac), mode="legacy",
        )
        return [
            self._out_eapol(frame.src_mac, encode_eapol_key_frame(first), "eapol-key")
        ]

    def _ap_on_agreement(self, tick, frame: DataFrame) -> list[Transmission]:
        entry = self.entries.get(frame.src_mac)
        if entry is None or entry.get("soap") is None:
            self.transcript.note(tick, "discard", self.cfg.station_id, reason="phase")
            return []
        session: ApSession = entry["soap"]
        if session.group is None:
            self.transcript.note(tick, "discard", self.cfg.station_id, reason="phase")
            return []
        try:
            msg = parse_soap_message(
                frame.payload,
                key_octets=session.group.key_size_octets,
                signature_octets=session.peer_signer_group.key_size_octets,
            )
        except MalformedFrameError as exc:
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason="malformed", detail=str(exc)
            )
            return []
        event = session.on_message2(msg, frame.src_mac)
        if event == "signature":
            self._sig_failure(tick, frame.src_mac, "agreement-msg2")
            return []
        if event != "agreed":
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason=event,
                src=format_mac(frame.src_mac),
            )
            return []
        self._sig_success(frame.src_mac)
        psk = session.psk
        self.psk_history.append(bytes(psk))
        self.transcript.transition(
            tick, self.cfg.station_id, "soap", "psk-agreed",
            peer=format_mac(frame.src_mac),
        )
        auth = Authenticator(
            psk, self.mac, frame.src_mac, self.rng.child(f"auth{self.session_counter}")
        )
        first = auth.start()
        entry.update(auth=auth, attempts=0, last_tx=tick)
        entry["await"] = "m2-key"
        return [
            self._out_eapol(frame.src_mac, encode_eapol_key_frame(first), "eapol-key")
        ]

    def _ap_on_eapol_key(self, tick, frame: DataFrame) -> list[Transmission]:
        entry = self.entries.get(frame.src_mac)
        if entry is None or entry.get("auth") is None:
            self.transcript.note(tick, "discard", self.cfg.station_id, reason="phase")
            return []
        try:
            key_frame = parse_eapol_key_frame(frame.payload)
        except MalformedFrameError as exc:
            self.transcript.note(
                tick, "discard", self.cfg.station_id, reason="malformed", detail=str(exc)
            )
            return []
        auth: Authenticator = entry["auth"]
        reply, event = auth.on_frame(key_frame)
        out = []
        if reply is not None:
            entry["attempts"] = 0
            entry["last_tx"] = tick
            out.append(
                self._out_eapol(
                    frame.src_mac, encode_eapol_key_frame(reply), "eapol-key"
                )
            )
        if event == "established":
            entry["established"] = True
            entry["done"] = True
            self.kck_history.append(auth.keys.kck)
            self.transcript.transition(
                tick, self.cfg.station_id, "session", "established",
                peer=format_mac(frame.src_mac),
            )
        elif event == "mic-mismatch":
            entry["done"] = True
            self.transcript.transition(
                tick, self.cfg.station_id, "session", "failed",
                peer=format_mac(frame.src_mac), reason="mic-mismatch",
            )
        elif event in ("replay", "unexpected"):
            self.transcript.note(tick, "discard", self.cfg.station_id, reason=event)
        return out

    # -- schedule actions and summaries ------------------------------------

    def do_action(self, tick: int, action: str) -> list[Transmission]:
        if action == "reset" and self.cfg.role == "client":
            out = []
            if self.ap_mac is not None:
                disassoc = ManagementFrame(
                    FrameSubtype.DISASSOC, self.mac, self.ap_mac
                )
                out.append(self._out_mgmt(disassoc, "disassoc"))
            self._client_restart(tick, "scripted-reset")
            return out
        return []

    def summary(self, mac_names: dict) -> dict:
        base = {
            "role": self.cfg.role,
            "mac": format_mac(self.mac),
            "psk_count": len(self.psk_history),
            "blocked": sorted(mac_names.get(m, format_mac(m)) for m in self.blocked),
        }
        if self.cfg.role == "client":
            base.update(
                state=self.state,
                mode=self.mode,
                peer=mac_names.get(self.ap_mac, format_mac(self.ap_mac))
                if self.ap_mac
                else None,
                soap_phase=self.session.phase.value if self.session else None,
                abort_reason=self.session.abort_reason if self.session else None,
                fallback=self.fallback_recorded,
                fourway=self.supplicant.state.value if self.supplicant else None,
            )
        else:
            sessions = {}
            for mac, entry in self.entries.items():
                soap = entry.get("soap")
                auth = entry.get("auth")
                sessions[mac_names.get(mac, format_mac(mac))] = {
                    "soap_phase": soap.phase.value if soap else None,
                    "abort_reason": soap.abort_reason if soap else None,
                    "established": bool(entry.get("established")),
                    "fourway": auth.state.value if auth else None,
                }
            base.update(state=self.state, sessions=sessions)
        return base

    def secrets(self) -> dict:
        return {
            "psks": [p.hex() for p in self.psk_history],
            "kcks": [k.hex() for k in self.kck_history],
        }


# ---------------------------------------------------------------------------
# Adversary
# ---------------------------------------------------------------------------


class Adversary:
    """Channel-level attacker. Capabilities compose: passive capture, frame
    replay, rogue advertisement (with a consistent or a bogus key), in-path
    substitution of agreement messages, data-frame deletion, and spoofed
    disassociation."""

    def __init__(
        self,
        cfg: AdversaryConfig,
        rng: SeededRng,
        transcript: Transcript,
        strict_frames: bool,
        target_ap_mac: bytes | None,
        target_client_mac: bytes | None,
    ):
        self.cfg = cfg
        self.caps = set(cfg.capabilities)
        self.rng = rng
        self.transcript = transcript
        self.target_ap_mac = target_ap_mac
        self.target_client_mac = target_client_mac
        self.captured: list[Transmission] = []
        self.replayed = False
        self.disassoc_sent = False
        self.flow_groups: dict[bytes, int] = {}
        self._substitutions = 0
        self.rogue: Station | None = None
        if self.caps & {"masquerade", "inject"}:
            rogue_cfg = StationConfig(
                station_id="adversary",
                role="ap",
                mac=cfg.mac,
                ssid=cfg.ssid or "simnet",
                groups=tuple(cfg.groups),
                beacon_period=cfg.beacon_period,
                beacon_offset=cfg.beacon_offset,
                advertise_bogus_key=cfg.advertise_bogus_key,
            )
            identity = make_identity(
                parse_mac(cfg.mac), Role.AP, rogue_cfg.groups, rng.child("rogue-id")
            )
            self.rogue = Station(
                rogue_cfg,
                identity,
                rng.child("rogue-run"),
                Mitigations(),
                transcript,
                strict_frames,
            )

    @property
    def mac(self) -> bytes:
        return parse_mac(self.cfg.mac)

    def observe(self, tick: int, t: Transmission) -> None:
        if t.origin == "adversary":
            return
        if self.caps & {"eavesdrop", "replay"}:
            if self.cfg.replay_at is None or tick < self.cfg.replay_at:
                self.captured.append(t)
        if "mitm-substitute" in self.caps and t.kind == "assoc-request":
            try:
                frame = parse_management_frame(t.wire)
                ie = soap_ie_from_frame(frame)
            except MalformedFrameError:
                return
            if ie is not None and ie.group_ids:
                self.flow_groups[frame.src_mac] = ie.group_ids[0]

    def filter(self, tick: int, t: Transmission) -> list[Transmission]:
        """Applied to every legitimate frame in flight; returns replacements."""
        if t.origin == "adversary":
            return [t]
        if "delete-intercept" in self.caps and t.kind in ("agreement", "eapol-key"):
            self.transcript.note(
                tick, "deleted", "adversary", frame=t.kind, src=format_mac(t.src_mac)
            )
            return []
        if (
            "mitm-substitute" in self.caps
            and t.kind == "agreement"
            and t.src_mac == self.target_ap_mac
            and t.dst_mac == self.target_client_mac
        ):
            substitute = self._substitute_message1(t)
            if substitute is not None:
                self.transcript.note(tick, "mitm-substituted", "adversary")
                return [substitute]
        return [t]

    def _substitute_message1(self, t: Transmission) -> Transmission | None:
        from .crypto import ecdh_generate, registry_lookup
        from .handshake import TAG_MESSAGE1, signed_payload
        from .crypto import point_to_octets

        try:
            frame = parse_data_frame(t.wire)
            original = parse_soap_message(frame.payload)
        except MalformedFrameError:
            return None
        group_id = self.flow_groups.get(t.dst_mac, 26)
        group = registry_lookup(group_id)
        if self.rogue is not None:
            signer = self.rogue.identity.ecdsa
        else:
            signer = getattr(self, "_signer", None)
            if signer is None:
                signer = ecdsa_generate(group, self.rng.child("mitm-signer"))
                self._signer = signer
        self._substitutions += 1
        ephemeral = ecdh_generate(group, self.rng.child(f"mitm{self._substitutions}"))
        fake_public = point_to_octets(group, ephemeral.public_point)
        nonce = original.session_nonce
        if nonce is None:
            payload = fake_public
        else:
            payload = signed_payload(
                TAG_MESSAGE1, t.src_mac, t.dst_mac, group_id, nonce, fake_public
            )
        fake = SoapMessage(fake_public, ecdsa_sign(signer, payload), nonce)
        wire = encode_data_frame(
            DataFrame(t.src_mac, t.dst_mac, encode_soap_message(fake), from_ds=True)
        )
        return Transmission("adversary", "agreement", wire)

    def on_tick(self, tick: int) -> list[Transmission]:
        out: list[Transmission] = []
        if self.rogue is not None:
            out.extend(self.rogue.on_tick(tick))
        if (
            "replay" in self.caps
            and self.cfg.replay_at is not None
            and tick >= self.cfg.replay_at
            and not self.replayed
        ):
            self.replayed = True
            self.transcript.note(
                tick, "replay-burst", "adversary", frames=len(self.captured)
            )
            out.extend(
                Transmission("adversary", t.kind, t.wire) for t in self.captured
            )
        if (
            "disassoc-inject" in self.caps
            and self.cfg.disassoc_at is not None
            and tick >= self.cfg.disassoc_at
            and not self.disassoc_sent
            and self.target_ap_mac is not None
            and self.target_client_mac is not None
        ):
            self.disassoc_sent = True
            forged = ManagementFrame(
                FrameSubtype.DISASSOC, self.target_ap_mac, self.target_client_mac
            )
            out.append(
                Transmission(
                    "adversary", "disassoc", encode_management_frame(forged)
                )
            )
        return out

    def on_frame(self, tick: int, wire: bytes) -> list[Transmission]:
        if self.rogue is None:
            return []
        return self.rogue.on_frame(tick, wire)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


class Simulation:
    """Builds stations from a script and runs the tick loop."""

    def __init__(self, script: ScenarioScript, seed: int):
        self.script = script
        self.seed = seed
        self.transcript = Transcript(script.name, seed)
        identity_rng = SeededRng(script.identity_seed, b"identities")
        run_rng = SeededRng(seed, b"run")

        identities = {}
        for cfg in script.stations:
            role = Role.CLIENT if cfg.role == "client" else Role.AP
            identities[cfg.station_id] = make_identity(
                parse_mac(cfg.mac),
                role,
                cfg.groups,
                identity_rng.child(f"id:{cfg.station_id}"),
            )
        self.stations: list[Station] = []
        self.by_id: dict[str, Station] = {}
        for cfg in script.stations:
            station = Station(
                cfg,
                identities[cfg.station_id],
                run_rng.child(f"st:{cfg.station_id}"),
                script.mitigations,
                self.transcript,
                script.strict_frames,
            )
            if cfg.pin_ap is not None:
                pinned = identities[cfg.pin_ap].ecdsa
                station.pinned_ap_key = (pinned.group.group_id, pinned.public_point)
                station.known_keys[identities[cfg.pin_ap].mac] = (
                    pinned.group,
                    pinned.public_point,
                )
            self.stations.append(station)
            self.by_id[cfg.station_id] = station

        self.adversary: Adversary | None = None
        if script.adversary is not None:
            cfg = script.adversary
            ap_mac = client_mac = None
            aps = [s for s in self.stations if s.cfg.role == "ap"]
            clients = [s for s in self.stations if s.cfg.role == "client"]
            if cfg.target_ap is not None:
                ap_mac = self.by_id[cfg.target_ap].mac
            elif aps:
                ap_mac = aps[0].mac
            if cfg.target_client is not None:
                client_mac = self.by_id[cfg.target_client].mac
            elif clients:
                client_mac = clients[0].mac
            self.adversary = Adversary(
                cfg,
                run_rng.child("adversary"),
                self.transcript,
                script.strict_frames,
                ap_mac,
                client_mac,
            )

        self._schedule: dict[int, list[ScheduleAction]] = {}
        for action in script.schedule:
            self._schedule.setdefault(action.tick, []).append(action)

        self.mac_names = {s.mac: s.cfg.station_id for s in self.stations}
        if self.adversary is not None:
            self.mac_names[self.adversary.mac] = "adversary"

    def _transmit(self, tick: int, t: Transmission, in_flight: list) -> None:
        self.transcript.tx(tick, t)
        in_flight.append(t)

    def run(self) -> Transcript:
        in_flight: list[Transmission] = []
        for tick in range(self.script.max_ticks):
            deliveries, in_flight = in_flight, []
            for t in deliveries:
                if self.adversary is not None:
                    self.adversary.observe(tick, t)
                    passed = self.adversary.filter(tick, t)
                    for sub in passed:
                        if sub is not t:
                            self.transcript.tx(tick, sub)
                else:
                    passed = [t]
                for item in passed:
                    dst = item.dst_mac
                    src = item.src_mac
                    for station in self.stations:
                        if station.mac == src:
                            continue
                        if dst not in (station.mac, BROADCAST_MAC):
                            continue
                        for reply in station.on_frame(tick, item.wire):
                            self._transmit(tick, reply, in_flight)
                    if (
                        self.adversary is not None
                        and self.adversary.rogue is not None
                        and src != self.adversary.mac
                        and dst in (self.adversary.mac, BROADCAST_MAC)
                    ):
                        for reply in self.adversary.on_frame(tick, item.wire):
                            self._transmit(tick, reply, in_flight)
            if self.adversary is not None:
                for t in self.adversary.on_tick(tick):
                    self._transmit(tick, t, in_flight)
            for station in self.stations:
                for t in station.on_tick(tick):
                    self._transmit(tick, t, in_flight)
            for action in self._schedule.get(tick, ()):
                station = self.by_id[action.station]
                for t in station.do_action(tick, action.action):
                    self._transmit(tick, t, in_flight)
        for station in self.stations:
            self.transcript.summaries[station.cfg.station_id] = station.summary(
                self.mac_names
            )
            self.transcript.secrets[station.cfg.station_id] = station.secrets()
        if self.adversary is not None:
            adv = {
                "captured_frames": len(self.captured_frames()),
                "capabilities": sorted(self.adversary.caps),
            }
            if self.adversary.rogue is not None:
                adv["rogue"] = self.adversary.rogue.summary(self.mac_names)
                self.transcript.secrets["adversary"] = self.adversary.rogue.secrets()
            else:
                self.transcript.secrets["adversary"] = {"psks": [], "kcks": []}
            self.transcript.summaries["adversary"] = adv
        return self.transcript

    def captured_frames(self) -> list[Transmission]:
        return [] if self.adversary is None else self.adversary.captured


def run_scenario(script: ScenarioScript, seed: int) -> Transcript:
    return Simulation(script, seed).run()


def eavesdropper_view(transcript: Transcript) -> dict:
    """What a passive observer of the whole run learned about the secrets.

    Scans every transmitted frame for the raw octets of each station's PSKs
    and KCKs. The count must be zero for any run without the deliberate
    debug leak; the adversary only knows a legitimate station's PSK if it
    was itself an endpoint of that session."""
    frames = [
        bytes.fromhex(r["hex"]) for r in transcript.records if r["event"] == "tx"
    ]
    legit_psks: set[bytes] = set()
    legit_kcks: set[bytes] = set()
    for station_id, entry in transcript.secrets.items():
        if station_id == "adversary":
            continue
        legit_psks.update(bytes.fromhex(p) for p in entry["psks"])
        legit_kcks.update(bytes.fromhex(k) for k in entry["kcks"])
    psk_hits = sum(1 for f in frames for p in legit_psks if p in f)
    kck_hits = sum(1 for f in frames for k in legit_kcks if k in f)
    adversary_psks = {
        bytes.fromhex(p)
        for p in transcript.secrets.get("adversary", {}).get("psks", ())
    }
    knows = bool(adversary_psks & legit_psks) or psk_hits > 0
    return {
        "frames_observed": len(frames),
        "legit_psk_count": len(legit_psks),
        "psk_octets_on_wire": psk_hits,
        "kck_octets_on_wire": kck_hits,
        "adversary_knows_legit_psk": knows,
    }
