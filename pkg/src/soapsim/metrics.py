"""Frame-size accounting and crypto micro-benchmarks.

The size report measures real encoded frames, so every number it prints is
the length of bytes that the codecs actually produce.  The bench report
times the five public-key operations the key agreement adds on top of a
plain pre-shared-key setup, plus the constant two-frame message overhead.
"""

from __future__ import annotations

import platform
import statistics
import sys
import time
from dataclasses import dataclass, field

from .crypto import (
    EcGroup,
    SeededRng,
    ecdh_agree,
    ecdh_generate,
    ecdsa_generate,
    ecdsa_sign,
    ecdsa_verify,
    registry_lookup,
)
from .frames import (
    ELEMENT_ID_SSID,
    EapolKeyFrame,
    FrameSubtype,
    ManagementFrame,
    SoapIe,
    SoapMessage,
    frame_wire_size,
    soap_ie_element,
)
from .fourway import (
    KEY_DATA_M3,
    KEY_INFO_M1,
    KEY_INFO_M2,
    KEY_INFO_M3,
    KEY_INFO_M4,
    derive_ptk,
)

# Element ids for the fixed baseline management frames.  The baseline is
# this artifact's own reference composition: a beacon carrying the element
# set a typical infrastructure network advertises, against which the cost
# of the key-agreement advertisement is measured.
_EID_RATES = 1
_EID_DS_PARAMS = 3
_EID_TIM = 5
_EID_COUNTRY = 7
_EID_ERP = 42
_EID_RSN = 48
_EID_EXT_RATES = 50

_BASELINE_SSID = b"publicnet"

# (element id, payload octets) for the baseline beacon body
_BASELINE_BEACON_ELEMENTS = (
    (ELEMENT_ID_SSID, len(_BASELINE_SSID)),
    (_EID_RATES, 8),
    (_EID_DS_PARAMS, 1),
    (_EID_TIM, 4),
    (_EID_COUNTRY, 6),
    (_EID_ERP, 1),
    (_EID_EXT_RATES, 4),
    (_EID_RSN, 20),
)

_BASELINE_ASSOC_ELEMENTS = (
    (ELEMENT_ID_SSID, len(_BASELINE_SSID)),
    (_EID_RATES, 8),
)

_MAC_A = b"\x02\x00\x00\x00\x00\x01"
_MAC_B = b"\x02\x00\x00\x00\x00\x02"


@dataclass(frozen=True)
class SizeRow:
    """One frame kind, measured without and with the key-agreement fields."""

    kind: str
    baseline_octets: int
    soap_octets: int

    @property
    def overhead_fraction(self) -> float:
        return (self.soap_octets - self.baseline_octets) / self.soap_octets


@dataclass(frozen=True)
class AddedFrame:
    """A frame the key agreement introduces that has no baseline analogue."""

    kind: str
    octets: int


@dataclass
class SizeReport:
    group_id: int
    group_name: str
    key_size_octets: int
    group_count: int
    strict: bool
    ie_octets: int
    message_octets: int
    rows: list[SizeRow] = field(default_factory=list)
    added: list[AddedFrame] = field(default_factory=list)

    @property
    def ie_key_fraction(self) -> float:
        """Share of the advertisement element taken by the public key."""
        return self.key_size_octets / self.ie_octets

    def to_text(self) -> str:
        lines = [
            f"frame sizes: group {self.group_id} ({self.group_name}), "
            f"{self.group_count} advertised group(s), "
            f"{'strict' if self.strict else 'nonce-extended'} messages",
            "",
            f"advertisement element: {self.ie_octets} octets "
            f"(key {self.key_size_octets} octets, "
            f"{self.ie_key_fraction:.1%} of the element)",
            f"key-agreement message: {self.message_octets} octets on the wire",
            "",
            f"{'frame':<24} {'baseline':>9} {'with-agreement':>15} {'overhead':>9}",
            "-" * 61,
        ]
        for row in self.rows:
            lines.append(
                f"{row.kind:<24} {row.baseline_octets:>9} {row.soap_octets:>15} "
                f"{row.overhead_fraction:>8.1%}"
            )
        for extra in self.added:
            lines.append(f"{extra.kind:<24} {'-':>9} {extra.octets:>15} {'added':>9}")
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        return {
            "group_id": self.group_id,
            "group_name": self.group_name,
            "key_size_octets": self.key_size_octets,
            "group_count": self.group_count,
            "strict": self.strict,
            "ie_octets": self.ie_octets,
            "ie_key_fraction": round(self.ie_key_fraction, 6),
            "message_octets": self.message_octets,
            "rows": [
                {
                    "kind": r.kind,
                    "baseline_octets": r.baseline_octets,
                    "soap_octets": r.soap_octets,
                    "overhead_fraction": round(r.overhead_fraction, 6),
                }
                for r in self.rows
            ],
            "added": [{"kind": a.kind, "octets": a.octets} for a in self.added],
        }

    def to_csv(self) -> str:
        lines = ["kind,baseline_octets,with_agreement_octets,overhead_fraction"]
        for r in self.rows:
            lines.append(
                f"{r.kind},{r.baseline_octets},{r.soap_octets},"
                f"{r.overhead_fraction:.6f}"
            )
        for a in self.added:
            lines.append(f"{a.kind},,{a.octets},")
        return "\n".join(lines) + "\n"


def _baseline_elements(
    composition: tuple[tuple[int, int], ...],
) -> list[tuple[int, bytes]]:
    out = []
    for eid, size in composition:
        payload = _BASELINE_SSID if eid == ELEMENT_ID_SSID else bytes(size)
        out.append((eid, payload))
    return out


def _advertised_ids(group: EcGroup, m: int) -> tuple[int, ...]:
    # Size accounting only needs m one-octet ids; repeat when m exceeds 1.
    return (group.group_id,) * m


def size_report(group_id: int, group_count: int = 1, strict: bool = True) -> SizeReport:
    """Measure every frame kind the protocol touches, by encoding it."""
    group = registry_lookup(group_id)
    if group_count < 1:
        raise ValueError("at least one advertised group is required")
    s = group.key_size_octets

    ie = SoapIe(_advertised_ids(group, group_count), bytes(s))
    ie_octets = len(soap_ie_element(ie)[1]) + 2
    assert ie_octets == ie.wire_size

    nonce = None if strict else bytes(8)
    message = SoapMessage(bytes(2 * s), bytes(2 * s), nonce)
    message_octets = frame_wire_size(message)

    response_ie = SoapIe((group.group_id,), bytes(s))

    def mgmt(subtype, elements, with_ie):
        els = list(elements)
        if with_ie is not None:
            els.append(soap_ie_element(with_ie))
        return frame_wire_size(ManagementFrame(subtype, _MAC_A, _MAC_B, els))

    beacon_elements = _baseline_elements(_BASELINE_BEACON_ELEMENTS)
    assoc_elements = _baseline_elements(_BASELINE_ASSOC_ELEMENTS)

    rows = [
        SizeRow(
            "beacon",
            mgmt(FrameSubtype.BEACON, beacon_elements, None),
            mgmt(FrameSubtype.BEACON, beacon_elements, ie),
        ),
        SizeRow(
            "probe-response",
            mgmt(FrameSubtype.PROBE_RESPONSE, beacon_elements, None),
            mgmt(FrameSubtype.PROBE_RESPONSE, beacon_elements, ie),
        ),
        SizeRow(
            "association-request",
            mgmt(FrameSubtype.ASSOC_REQUEST, assoc_elements, None),
            mgmt(FrameSubtype.ASSOC_REQUEST, assoc_elements, response_ie),
        ),
    ]

    def eapol(key_info, counter, key_data=b""):
        return frame_wire_size(
            EapolKeyFrame(
                key_info=key_info,
                replay_counter=counter,
                key_nonce=bytes(32),
                key_mic=bytes(16),
                key_data=key_data,
            )
        )

    key_sizes = [
        ("key-handshake-1", eapol(KEY_INFO_M1, 1)),
        ("key-handshake-2", eapol(KEY_INFO_M2, 1)),
        ("key-handshake-3", eapol(KEY_INFO_M3, 2, KEY_DATA_M3)),
        ("key-handshake-4", eapol(KEY_INFO_M4, 2)),
    ]
    # The key handshake itself is unchanged; its frames cost the same octets
    # either way, so they appear with a zero overhead fraction.
    rows.extend(SizeRow(kind, octets, octets) for kind, octets in key_sizes)

    added = [
        AddedFrame("agreement-message-1", message_octets),
        AddedFrame("agreement-message-2", message_octets),
    ]

    report = SizeReport(
        group_id=group.group_id,
        group_name=group.name,
        key_size_octets=s,
        group_count=group_count,
        strict=strict,
        ie_octets=ie_octets,
        message_octets=message_octets,
        rows=rows,
        added=added,
    )
    for row in report.rows:
        assert 0 <= row.overhead_fraction < 1
    return report


# ---------------------------------------------------------------------------
# Crypto benchmarks
# ---------------------------------------------------------------------------

#: Frames the key agreement adds ahead of the key handshake, independent of
#: group or timing: the two signed agreement messages.
MESSAGE_COUNT_DELTA = 2

_MIN_BENCH_ITERATIONS = 100


@dataclass(frozen=True)
class BenchRow:
    operation: str
    mean_seconds: float
    stdev_seconds: float
    samples: int


@dataclass
class BenchReport:
    group_id: int
    group_name: str
    rows: list[BenchRow]
    message_count_delta: int
    machine: dict

    def row(self, operation: str) -> BenchRow:
        for r in self.rows:
            if r.operation == operation:
                return r
        raise KeyError(operation)

    def to_text(self) -> str:
        lines = [
            f"crypto benchmark: group {self.group_id} ({self.group_name})",
            f"machine: {self.machine['platform']} / python "
            f"{self.machine['python']}",
            "",
            f"{'operation':<28} {'mean (ms)':>10} {'stdev (ms)':>11} {'samples':>8}",
            "-" * 61,
        ]
        for r in self.rows:
            lines.append(
                f"{r.operation:<28} {r.mean_seconds * 1e3:>10.3f} "
                f"{r.stdev_seconds * 1e3:>11.3f} {r.samples:>8}"
            )
        lines.append("-" * 61)
        lines.append(
            f"extra frames before the key handshake: {self.message_count_delta}"
        )
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        return {
            "group_id": self.group_id,
            "group_name": self.group_name,
            "machine": self.machine,
            "message_count_delta": self.message_count_delta,
            "rows": [
                {
                    "operation": r.operation,
                    "mean_seconds": r.mean_seconds,
                    "stdev_seconds": r.stdev_seconds,
                    "samples": r.samples,
                }
                for r in self.rows
            ],
        }


def _timed(fn, iterations: int) -> list[float]:
    samples = []
    for _ in range(iterations):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return samples


def bench_crypto(group_id: int, iterations: int = _MIN_BENCH_ITERATIONS) -> BenchReport:
    """Time the public-key operations the agreement adds per handshake."""
    if iterations < _MIN_BENCH_ITERATIONS:
        raise ValueError(f"need at least {_MIN_BENCH_ITERATIONS} iterations")
    group = registry_lookup(group_id)
    rng = SeededRng(b"bench", b"metrics")

    signer = ecdsa_generate(group, rng.child(b"signer"))
    own = ecdh_generate(group, rng.child(b"own"))
    peer = ecdh_generate(group, rng.child(b"peer"))
    messages = [i.to_bytes(8, "big") for i in range(iterations)]
    signature = ecdsa_sign(signer, messages[0])

    pmk = rng.randbytes(32)
    anonce, snonce = rng.randbytes(32), rng.randbytes(32)

    message_iter = iter(messages)

    plan = [
        ("ecdh-generate", lambda: ecdh_generate(group, rng)),
        ("ecdh-agree", lambda: ecdh_agree(own, peer.public_point)),
        ("ecdsa-sign", lambda: ecdsa_sign(signer, next(message_iter))),
        ("ecdsa-verify", lambda: ecdsa_verify(group, signer.public_point, messages[0], signature)),
        ("ptk-derive", lambda: derive_ptk(pmk, _MAC_A, _MAC_B, anonce, snonce)),
    ]

    rows = []
    for name, fn in plan:
        samples = _timed(fn, iterations)
        rows.append(
            BenchRow(name, statistics.fmean(samples), statistics.stdev(samples), len(samples))
        )

    # Both stations each generate, agree, sign once, and verify once, so the
    # pair spends two of every operation per completed agreement.
    pair_total = 2 * sum(
        r.mean_seconds for r in rows if r.operation.startswith(("ecdh", "ecdsa"))
    )
    rows.append(BenchRow("agreement-pair-total", pair_total, 0.0, iterations))

    machine = {
        "platform": platform.platform(),
        "python": sys.version.split()[0],
        "processor": platform.machine(),
    }
    return BenchReport(
        group_id=group.group_id,
        group_name=group.name,
        rows=rows,
        message_count_delta=MESSAGE_COUNT_DELTA,
        machine=machine,
    )
