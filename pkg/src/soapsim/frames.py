"""Wire formats: the negotiation information element, the two EAPOL-carried
key-agreement messages, EAPOL-Key frames, and simplified 802.11 management
and data frames for the simulated network.

Every encoder returns exact octet strings and every parser either returns a
dataclass or raises MalformedFrameError; callers decide whether a malformed
frame is dropped silently or counted.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from enum import IntEnum

# Information element ids. 251 carries the ECDH group negotiation payload;
# 252 carries an optional ECDSA signature over the management frame when the
# frame-signing mitigation is enabled. Both ride in the ordinary tagged
# element area, so receivers that do not know them skip them by length.
ELEMENT_ID_SOAP = 251
ELEMENT_ID_MGMT_SIGNATURE = 252
ELEMENT_ID_SSID = 0

MAC_HEADER_OCTETS = 24
LLC_SNAP_HEADER = bytes.fromhex("AAAA03000000888E")
BROADCAST_MAC = b"\xff" * 6

EAPOL_VERSION = 2
EAPOL_TYPE_KEY = 3
# The key-agreement messages use a reserved placeholder in both EAPOL header
# octets to stay distinguishable from every deployed EAPOL packet type.
AGREEMENT_PROTOCOL_VERSION = 0xFF
AGREEMENT_PACKET_TYPE = 0xFF

SESSION_NONCE_OCTETS = 8

KEY_DESCRIPTOR_RSN = 2
KEY_INFO_HMAC_SHA1_AES = 0x0002
KEY_INFO_PAIRWISE = 0x0008
KEY_INFO_INSTALL = 0x0040
KEY_INFO_ACK = 0x0080
KEY_INFO_MIC = 0x0100
KEY_INFO_SECURE = 0x0200
EAPOL_KEY_BODY_OCTETS = 95
KEY_NONCE_OCTETS = 32
KEY_MIC_OCTETS = 16


class FrameError(ValueError):
    """Base class for encode and parse failures."""


class MalformedFrameError(FrameError):
    """Octet string cannot be parsed as the expected frame."""


class OversizeElementError(FrameError):
    """Element payload would not fit the one-octet length field."""


# ---------------------------------------------------------------------------
# Negotiation information element
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SoapIe:
    """Group-list advertisement plus the sender's x-only ECDSA public key."""

    group_ids: tuple[int, ...]
    ecdsa_public_x: bytes

    @property
    def group_count(self) -> int:
        return len(self.group_ids)

    @property
    def key_size_octets(self) -> int:
        return len(self.ecdsa_public_x)

    @property
    def wire_size(self) -> int:
        # id + length + group count + group ids + key size + key
        return 2 + 2 + self.group_count + self.key_size_octets


def encode_soap_ie(ie: SoapIe) -> bytes:
    m = ie.group_count
    s = ie.key_size_octets
    if m < 1:
        raise FrameError("advertisement must list at least one group")
    if any(not 0 <= gid <= 255 for gid in ie.group_ids):
        raise FrameError("group ids must fit one octet")
    if not 1 <= s <= 255:
        raise FrameError("key size must fit one octet")
    length = 2 + m + s
    if length > 255:
        raise OversizeElementError(f"element payload of {length} octets exceeds 255")
    return bytes([ELEMENT_ID_SOAP, length, m, *ie.group_ids, s]) + ie.ecdsa_public_x


def parse_soap_ie(data: bytes) -> SoapIe:
    if len(data) < 2:
        raise MalformedFrameError("element shorter than its header")
    if data[0] != ELEMENT_ID_SOAP:
        raise MalformedFrameError(f"element id {data[0]} is not {ELEMENT_ID_SOAP}")
    length = data[1]
    if len(data) != 2 + length:
        raise MalformedFrameError("element length field disagrees with data")
    if length < 2:
        raise MalformedFrameError("element payload too short for any group list")
    m = data[2]
    if m < 1:
        raise MalformedFrameError("empty group list")
    if length < 2 + m:
        raise MalformedFrameError("group list runs past the element")
    s = data[3 + m]
    if length != 2 + m + s:
        raise MalformedFrameError("key size field disagrees with element length")
    return SoapIe(tuple(data[3 : 3 + m]), bytes(data[4 + m :]))


# ---------------------------------------------------------------------------
# Key-agreement messages (EAPOL variant)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SoapMessage:
    """One signed ephemeral-key message; identical layout both directions.

    ecdh_public is x || y and signature is r || s, all coordinates at the
    negotiated group's fixed width. session_nonce, when present, rides as a
    trailer after the length-covered body so strict-layout parsers still see
    a packet whose header length matches.
    """

    ecdh_public: bytes
    signature: bytes
    session_nonce: bytes | None = None


def encode_soap_message(msg: SoapMessage) -> bytes:
    if len(msg.ecdh_public) % 2 or len(msg.signature) % 2:
        raise FrameError("key and signature must each be a coordinate pair")
    if not msg.ecdh_public or not msg.signature:
        raise FrameError("key and signature must be non-empty")
    if msg.session_nonce is not None and len(msg.session_nonce) != SESSION_NONCE_OCTETS:
        raise FrameError(f"session nonce must be {SESSION_NONCE_OCTETS} octets")
    body = msg.ecdh_public + msg.signature
    packet = (
        struct.pack(">BBH", AGREEMENT_PROTOCOL_VERSION, AGREEMENT_PACKET_TYPE, len(body))
        + body
    )
    if msg.session_nonce is not None:
        packet += msg.session_nonce
    return packet


def parse_soap_message(
    data: bytes,
    key_octets: int | None = None,
    signature_octets: int | None = None,
) -> SoapMessage:
    """Parse an EAPOL packet into a key-agreement message.

    With no width hints the body splits into equal halves (the layout when
    both stations run the same curve). A receiver that negotiated group
    widths passes key_octets (and signature_octets when the peer signs on a
    different curve than the ECDH group) to fix the split exactly.
    """
    if len(data) < 4:
        raise MalformedFrameError("packet shorter than the EAPOL header")
    version, packet_type, body_length = struct.unpack(">BBH", data[:4])
    if version != AGREEMENT_PROTOCOL_VERSION or packet_type != AGREEMENT_PACKET_TYPE:
        raise MalformedFrameError("not a key-agreement packet")
    remaining = len(data) - 4
    if remaining == body_length:
        nonce = None
    elif remaining == body_length + SESSION_NONCE_OCTETS:
        nonce = bytes(data[4 + body_length :])
    else:
        raise MalformedFrameError("body length field disagrees with data")
    body = bytes(data[4 : 4 + body_length])
    if key_octets is not None:
        split = 2 * key_octets
        expected = split + 2 * (
            signature_octets if signature_octets is not None else key_octets
        )
        if body_length != expected:
            raise MalformedFrameError(
                f"body of {body_length} octets does not fit the negotiated widths"
            )
    else:
        if body_length == 0 or body_length % 4:
            raise MalformedFrameError("body cannot split into key and signature")
        split = body_length // 2
    return SoapMessage(body[:split], body[split:], nonce)


# ---------------------------------------------------------------------------
# EAPOL-Key frames (4-Way Handshake)
# ---------------------------------------------------------------------------


@dataclass
class EapolKeyFrame:
    key_info: int
    replay_counter: int
    key_nonce: bytes
    key_length: int = 16
    key_iv: bytes = bytes(16)
    key_rsc: bytes = bytes(8)
    key_id: bytes = bytes(8)
    key_mic: bytes = bytes(KEY_MIC_OCTETS)
    key_data: bytes = b""
    descriptor_type: int = KEY_DESCRIPTOR_RSN

    @property
    def has_mic(self) -> bool:
        return bool(self.key_info & KEY_INFO_MIC)


def encode_eapol_key_frame(frame: EapolKeyFrame) -> bytes:
    if len(frame.key_nonce) != KEY_NONCE_OCTETS:
        raise FrameError(f"key nonce must be {KEY_NONCE_OCTETS} octets")
    if len(frame.key_mic) != KEY_MIC_OCTETS:
        raise FrameError(f"key mic must be {KEY_MIC_OCTETS} octets")
    body = (
        struct.pack(">BHH", frame.descriptor_type, frame.key_info, frame.key_length)
        + frame.replay_counter.to_bytes(8, "big")
        + frame.key_nonce
        + frame.key_iv
        + frame.key_rsc
        + frame.key_id
        + frame.key_mic
        + struct.pack(">H", len(frame.key_data))
        + frame.key_data
    )
    return struct.pack(">BBH", EAPOL_VERSION, EAPOL_TYPE_KEY, len(body)) + body


def parse_eapol_key_frame(data: bytes) -> EapolKeyFrame:
    if len(data) < 4:
        raise MalformedFrameError("packet shorter than the EAPOL header")
    version, packet_type, body_length = struct.unpack(">BBH", data[:4])
    if packet_type != EAPOL_TYPE_KEY or version not in (1, EAPOL_VERSION):
        raise MalformedFrameError("not an EAPOL-Key packet")
    body = data[4:]
    if len(body) != body_length or body_length < EAPOL_KEY_BODY_OCTETS:
        raise MalformedFrameError("body length field disagrees with data")
    descriptor_type, key_info, key_length = struct.unpack(">BHH", body[:5])
    replay_counter = int.from_bytes(body[5:13], "big")
    key_nonce = bytes(body[13:45])
    key_iv = bytes(body[45:61])
    key_rsc = bytes(body[61:69])
    key_id = bytes(body[69:77])
    key_mic = bytes(body[77:93])
    (key_data_length,) = struct.unpack(">H", body[93:95])
    key_data = bytes(body[95:])
    if len(key_data) != key_data_length:
        raise MalformedFrameError("key data length field disagrees with data")
    return EapolKeyFrame(
        key_info=key_info,
        replay_counter=replay_counter,
        key_nonce=key_nonce,
        key_length=key_length,
        key_iv=key_iv,
        key_rsc=key_rsc,
        key_id=key_id,
        key_mic=key_mic,
        key_data=key_data,
        descriptor_type=descriptor_type,
    )


def classify_eapol(data: bytes) -> str:
    """Cheap discriminator for EAPOL payloads: 'agreement', 'key' or 'unknown'."""
    if len(data) < 4:
        return "unknown"
    if data[0] == AGREEMENT_PROTOCOL_VERSION and data[1] == AGREEMENT_PACKET_TYPE:
        return "agreement"
    if data[1] == EAPOL_TYPE_KEY:
        return "key"
    return "unknown"


# ---------------------------------------------------------------------------
# Management frames
# ---------------------------------------------------------------------------


class FrameSubtype(IntEnum):
    ASSOC_REQUEST = 0
    PROBE_REQUEST = 4
    PROBE_RESPONSE = 5
    BEACON = 8
    DISASSOC = 10


# Fixed (pre-element) body per subtype: timestamp/interval/capability for
# beacon-like frames, capability/listen-interval for association requests,
# a reason code for disassociation.
_FIXED_BODY = {
    FrameSubtype.ASSOC_REQUEST: struct.pack("<HH", 0x0431, 10),
    FrameSubtype.PROBE_REQUEST: b"",
    FrameSubtype.PROBE_RESPONSE: struct.pack("<QHH", 0, 100, 0x0431),
    FrameSubtype.BEACON: struct.pack("<QHH", 0, 100, 0x0431),
    FrameSubtype.DISASSOC: struct.pack("<H", 8),
}


@dataclass
class ManagementFrame:
    subtype: FrameSubtype
    src_mac: bytes
    dst_mac: bytes
    elements: tuple = ()
    signature: bytes | None = None


def _mac_header(frame_control: bytes, dst: bytes, src: bytes, bssid: bytes) -> bytes:
    if not (len(dst) == len(src) == len(bssid) == 6):
        raise FrameError("mac addresses must be 6 octets")
    return frame_control + b"\x00\x00" + dst + src + bssid + b"\x00\x00"


def encode_management_frame(frame: ManagementFrame) -> bytes:
    frame_control = bytes([(frame.subtype << 4) & 0xF0, 0x00])
    out = _mac_header(frame_control, frame.dst_mac, frame.src_mac, frame.src_mac)
    out += _FIXED_BODY[frame.subtype]
    elements = list(frame.elements)
    if frame.signature is not None:
        elements.append((ELEMENT_ID_MGMT_SIGNATURE, frame.signature))
    for eid, payload in elements:
        if len(payload) > 255:
            raise OversizeElementError(f"element {eid} payload exceeds 255 octets")
        out += bytes([eid, len(payload)]) + payload
    return out


def iter_elements(data: bytes):
    """Walk a tagged-element area; raises on a truncated trailing element."""
    offset = 0
    while offset < len(data):
        if offset + 2 > len(data):
            raise MalformedFrameError("truncated element header")
        eid, length = data[offset], data[offset + 1]
        offset += 2
        if offset + length > len(data):
            raise MalformedFrameError("truncated element payload")
        yield eid, bytes(data[offset : offset + length])
        offset += length


def parse_management_frame(data: bytes) -> ManagementFrame:
    if len(data) < MAC_HEADER_OCTETS:
        raise MalformedFrameError("frame shorter than a MAC header")
    if data[0] & 0x0C:
        raise MalformedFrameError("not a management frame")
    try:
        subtype = FrameSubtype(data[0] >> 4)
    except ValueError:
        raise MalformedFrameError(f"unsupported management subtype {data[0] >> 4}") from None
    dst = bytes(data[4:10])
    src = bytes(data[10:16])
    body = data[MAC_HEADER_OCTETS:]
    fixed = _FIXED_BODY[subtype]
    if len(body) < len(fixed):
        raise MalformedFrameError("frame shorter than its fixed body")
    elements = []
    signature = None
    for eid, payload in iter_elements(body[len(fixed) :]):
        if eid == ELEMENT_ID_MGMT_SIGNATURE:
            signature = payload
        else:
            elements.append((eid, payload))
    return ManagementFrame(subtype, src, dst, tuple(elements), signature)


def management_signing_input(frame: ManagementFrame) -> bytes:
    """Octets covered by the optional management-frame signature."""
    return encode_management_frame(replace(frame, signature=None))


def extract_elements(source, known_ids):
    """Split a frame's elements into recognized and skipped-by-length.

    source may be a parsed ManagementFrame or the raw octets of a tagged
    element area. Unknown ids are counted, not errors; a truncated element
    area raises MalformedFrameError.
    """
    if isinstance(source, ManagementFrame):
        pairs = list(source.elements)
        if source.signature is not None:
            pairs.append((ELEMENT_ID_MGMT_SIGNATURE, source.signature))
    else:
        pairs = list(iter_elements(source))
    known = set(known_ids)
    recognized = [(eid, payload) for eid, payload in pairs if eid in known]
    skipped = len(pairs) - len(recognized)
    return recognized, skipped


def find_element(frame: ManagementFrame, eid: int) -> bytes | None:
    for element_id, payload in frame.elements:
        if element_id == eid:
            return payload
    return None


def soap_ie_element(ie: SoapIe) -> tuple:
    """The IE as an (id, payload) pair for a management frame's element list."""
    return (ELEMENT_ID_SOAP, encode_soap_ie(ie)[2:])


def soap_ie_from_frame(frame: ManagementFrame) -> SoapIe | None:
    """Extract and parse the negotiation element, None when absent."""
    payload = find_element(frame, ELEMENT_ID_SOAP)
    if payload is None:
        return None
    return parse_soap_ie(bytes([ELEMENT_ID_SOAP, len(payload)]) + payload)


# ---------------------------------------------------------------------------
# Data frames (EAPOL carrier)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DataFrame:
    """Minimal data frame whose payload is one EAPOL packet."""

    src_mac: bytes
    dst_mac: bytes
    payload: bytes
    from_ds: bool = False


def encode_data_frame(frame: DataFrame) -> bytes:
    frame_control = bytes([0x08, 0x02 if frame.from_ds else 0x01])
    bssid = frame.src_mac if frame.from_ds else frame.dst_mac
    header = _mac_header(frame_control, frame.dst_mac, frame.src_mac, bssid)
    return header + LLC_SNAP_HEADER + frame.payload


def parse_data_frame(data: bytes) -> DataFrame:
    if len(data) < MAC_HEADER_OCTETS + len(LLC_SNAP_HEADER):
        raise MalformedFrameError("frame shorter than its headers")
    if data[0] & 0x0C != 0x08:
        raise MalformedFrameError("not a data frame")
    llc = data[MAC_HEADER_OCTETS : MAC_HEADER_OCTETS + len(LLC_SNAP_HEADER)]
    if llc != LLC_SNAP_HEADER:
        raise MalformedFrameError("payload is not EAPOL over LLC/SNAP")
    return DataFrame(
        src_mac=bytes(data[10:16]),
        dst_mac=bytes(data[4:10]),
        payload=bytes(data[MAC_HEADER_OCTETS + len(LLC_SNAP_HEADER) :]),
        from_ds=bool(data[1] & 0x02),
    )


# ---------------------------------------------------------------------------
# Sizes and dumps
# ---------------------------------------------------------------------------


def frame_wire_size(obj) -> int:
    """Full transmitted size in octets, MAC and LLC/SNAP headers included."""
    if isinstance(obj, SoapIe):
        return obj.wire_size
    if isinstance(obj, SoapMessage):
        return MAC_HEADER_OCTETS + len(LLC_SNAP_HEADER) + len(encode_soap_message(obj))
    if isinstance(obj, EapolKeyFrame):
        return (
            MAC_HEADER_OCTETS + len(LLC_SNAP_HEADER) + len(encode_eapol_key_frame(obj))
        )
    if isinstance(obj, ManagementFrame):
        return len(encode_management_frame(obj))
    if isinstance(obj, DataFrame):
        return len(encode_data_frame(obj))
    raise TypeError(f"no wire size for {type(obj).__name__}")


def hexdump(data: bytes) -> str:
    lines = []
    for offset in range(0, len(data), 16):
        chunk = data[offset : offset + 16]
        lines.append(f"{offset:04x}: {' '.join(f'{b:02x}' for b in chunk)}")
    return "\n".join(lines)
