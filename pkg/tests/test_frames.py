"""Wire codecs: elements, agreement messages, EAPOL-Key, management frames."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soapsim.crypto import known_group_ids, registry_lookup
from soapsim.frames import (
    BROADCAST_MAC,
    ELEMENT_ID_MGMT_SIGNATURE,
    ELEMENT_ID_SOAP,
    ELEMENT_ID_SSID,
    EAPOL_KEY_BODY_OCTETS,
    DataFrame,
    EapolKeyFrame,
    FrameError,
    FrameSubtype,
    LLC_SNAP_HEADER,
    MAC_HEADER_OCTETS,
    MalformedFrameError,
    ManagementFrame,
    OversizeElementError,
    SoapIe,
    SoapMessage,
    classify_eapol,
    encode_data_frame,
    encode_eapol_key_frame,
    encode_management_frame,
    encode_soap_ie,
    encode_soap_message,
    extract_elements,
    find_element,
    frame_wire_size,
    hexdump,
    iter_elements,
    management_signing_input,
    parse_data_frame,
    parse_eapol_key_frame,
    parse_management_frame,
    parse_soap_ie,
    parse_soap_message,
    soap_ie_element,
    soap_ie_from_frame,
)
from soapsim.fourway import KEY_DATA_M3, KEY_INFO_M1, KEY_INFO_M3

MAC_A = bytes.fromhex("020000000001")
MAC_B = bytes.fromhex("020000000002")


class TestSoapIeGolden:
    """The advertisement element's documented sizes."""

    def test_single_group_default_curve_is_33_octets(self):
        ie = SoapIe((26,), bytes(28))
        assert len(encode_soap_ie(ie)) == 33
        assert ie.wire_size == 33

    def test_second_group_adds_one_octet(self):
        assert len(encode_soap_ie(SoapIe((26, 19), bytes(28)))) == 34

    def test_size_formula_every_group(self):
        for gid in known_group_ids():
            s = registry_lookup(gid).key_size_octets
            for m in range(1, 6):
                ie = SoapIe(tuple([gid] * m), bytes(s))
                assert len(encode_soap_ie(ie)) == 2 + 2 + m + s

    def test_known_layout(self):
        wire = encode_soap_ie(SoapIe((26,), b"\xaa" * 28))
        assert wire[0] == ELEMENT_ID_SOAP
        assert wire[1] == 31          # payload length
        assert wire[2] == 1           # group count
        assert wire[3] == 26          # the one group id
        assert wire[4] == 28          # key size
        assert wire[5:] == b"\xaa" * 28


class TestSoapIeCodec:
    """Round trips and malformed-input rejection."""

    @given(
        groups=st.lists(st.integers(min_value=0, max_value=255), min_size=1, max_size=8),
        key=st.binary(min_size=1, max_size=80),
    )
    def test_round_trip(self, groups, key):
        ie = SoapIe(tuple(groups), key)
        assert parse_soap_ie(encode_soap_ie(ie)) == ie

    def test_empty_group_list_rejected_on_encode(self):
        with pytest.raises(FrameError):
            encode_soap_ie(SoapIe((), bytes(28)))

    def test_oversize_element_rejected(self):
        with pytest.raises(OversizeElementError):
            encode_soap_ie(SoapIe(tuple([26] * 200), bytes(60)))

    @pytest.mark.parametrize(
        "data",
        [
            b"",
            b"\xfb",
            bytes([250, 31, 1, 26, 28]) + bytes(28),   # wrong element id
            bytes([251, 30, 1, 26, 28]) + bytes(28),   # length disagrees
            bytes([251, 31, 0, 26, 28]) + bytes(28),   # zero groups
            bytes([251, 31, 1, 26, 29]) + bytes(28),   # key size disagrees
            bytes([251, 3, 5, 1, 2]),                  # group list past element
        ],
    )
    def test_malformed_rejected(self, data):
        with pytest.raises(MalformedFrameError):
            parse_soap_ie(data)


class TestSoapMessageCodec:
    """Signed-key packets, with and without the session-nonce trailer."""

    def test_strict_wire_size_default_curve(self):
        msg = SoapMessage(bytes(56), bytes(56))
        assert len(encode_soap_message(msg)) == 116
        assert frame_wire_size(msg) == 148

    def test_wire_size_formula_every_group(self):
        for gid in known_group_ids():
            s = registry_lookup(gid).key_size_octets
            msg = SoapMessage(bytes(2 * s), bytes(2 * s))
            assert frame_wire_size(msg) == 36 + 4 * s
            with_nonce = SoapMessage(bytes(2 * s), bytes(2 * s), bytes(8))
            assert frame_wire_size(with_nonce) == 44 + 4 * s

    @given(s=st.sampled_from([28, 32, 48, 66]), nonce=st.booleans())
    def test_round_trip(self, s, nonce):
        msg = SoapMessage(
            bytes(range(256))[: 2 * s] + bytes(max(0, 2 * s - 256)),
            b"\x55" * (2 * s),
            bytes(8) if nonce else None,
        )
        assert parse_soap_message(encode_soap_message(msg)) == msg

    def test_nonce_excluded_from_length_field(self):
        plain = encode_soap_message(SoapMessage(bytes(56), bytes(56)))
        extended = encode_soap_message(SoapMessage(bytes(56), bytes(56), b"\x01" * 8))
        assert plain[:4] == extended[:4]
        assert extended[-8:] == b"\x01" * 8

    def test_width_hints_split_uneven_halves(self):
        # key on one curve, signature on another
        msg = SoapMessage(b"\x01" * 64, b"\x02" * 96)
        wire = encode_soap_message(msg)
        parsed = parse_soap_message(wire, key_octets=32, signature_octets=48)
        assert parsed == msg

    def test_no_hints_assumes_equal_halves(self):
        # without negotiated widths the parser can only split down the middle
        msg = SoapMessage(b"\x01" * 64, b"\x02" * 96)
        parsed = parse_soap_message(encode_soap_message(msg))
        assert parsed != msg
        assert len(parsed.ecdh_public) == len(parsed.signature) == 80

    def test_no_hints_rejects_odd_body(self):
        wire = bytearray(encode_soap_message(SoapMessage(bytes(56), bytes(56))))
        wire[3] += 2  # body length no longer divisible by four
        with pytest.raises(MalformedFrameError):
            parse_soap_message(bytes(wire[:-6]))

    def test_hint_mismatch_rejected(self):
        wire = encode_soap_message(SoapMessage(bytes(56), bytes(56)))
        with pytest.raises(MalformedFrameError):
            parse_soap_message(wire, key_octets=32)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda w: w[:3],                      # shorter than header
            lambda w: b"\x00" + w[1:],            # wrong version
            lambda w: w[:1] + b"\x00" + w[2:],    # wrong packet type
            lambda w: w + b"\x00",                # stray trailing octet
            lambda w: w[:-1],                     # truncated body
        ],
    )
    def test_malformed_rejected(self, mutate):
        wire = encode_soap_message(SoapMessage(bytes(56), bytes(56)))
        with pytest.raises(MalformedFrameError):
            parse_soap_message(mutate(wire))


class TestEapolKeyCodec:
    """The 95-octet key-descriptor body plus key data."""

    def test_wire_sizes(self):
        plain = EapolKeyFrame(key_info=KEY_INFO_M1, replay_counter=1, key_nonce=bytes(32))
        assert len(encode_eapol_key_frame(plain)) == 99
        assert frame_wire_size(plain) == 131
        m3 = EapolKeyFrame(
            key_info=KEY_INFO_M3, replay_counter=2, key_nonce=bytes(32),
            key_mic=b"\x11" * 16, key_data=KEY_DATA_M3,
        )
        assert frame_wire_size(m3) == 195

    @given(
        key_info=st.integers(min_value=0, max_value=0xFFFF),
        counter=st.integers(min_value=0, max_value=2**64 - 1),
        nonce=st.binary(min_size=32, max_size=32),
        mic=st.binary(min_size=16, max_size=16),
        key_data=st.binary(max_size=80),
    )
    def test_round_trip(self, key_info, counter, nonce, mic, key_data):
        frame = EapolKeyFrame(
            key_info=key_info, replay_counter=counter, key_nonce=nonce,
            key_mic=mic, key_data=key_data,
        )
        assert parse_eapol_key_frame(encode_eapol_key_frame(frame)) == frame

    def test_body_length_validated(self):
        wire = encode_eapol_key_frame(
            EapolKeyFrame(key_info=KEY_INFO_M1, replay_counter=0, key_nonce=bytes(32))
        )
        with pytest.raises(MalformedFrameError):
            parse_eapol_key_frame(wire[:-1])
        with pytest.raises(MalformedFrameError):
            parse_eapol_key_frame(wire + b"\x00")

    def test_classify(self):
        key = encode_eapol_key_frame(
            EapolKeyFrame(key_info=KEY_INFO_M1, replay_counter=0, key_nonce=bytes(32))
        )
        agreement = encode_soap_message(SoapMessage(bytes(56), bytes(56)))
        assert classify_eapol(key) == "key"
        assert classify_eapol(agreement) == "agreement"
        assert classify_eapol(b"\x02\x00\x00\x00") == "unknown"
        assert classify_eapol(b"") == "unknown"


class TestManagementFrames:
    """Beacons, association, disassociation, and the signature element."""

    def beacon(self, elements=(), signature=None):
        return ManagementFrame(
            FrameSubtype.BEACON, MAC_A, BROADCAST_MAC, tuple(elements), signature
        )

    def test_round_trip(self):
        frame = self.beacon([(ELEMENT_ID_SSID, b"publicnet"), (7, b"\x01\x02")])
        assert parse_management_frame(encode_management_frame(frame)) == frame

    def test_round_trip_all_subtypes(self):
        for subtype in FrameSubtype:
            frame = ManagementFrame(subtype, MAC_A, MAC_B, ((ELEMENT_ID_SSID, b"x"),))
            parsed = parse_management_frame(encode_management_frame(frame))
            assert parsed.subtype is subtype
            assert parsed.src_mac == MAC_A
            assert parsed.dst_mac == MAC_B

    def test_signature_rides_last_element(self):
        frame = self.beacon([(0, b"net")], signature=b"\xab" * 56)
        wire = encode_management_frame(frame)
        parsed = parse_management_frame(wire)
        assert parsed.signature == b"\xab" * 56
        assert parsed.elements == ((0, b"net"),)
        # signature element sits after every other element
        assert wire[-58] == ELEMENT_ID_MGMT_SIGNATURE

    def test_signing_input_excludes_signature(self):
        bare = self.beacon([(0, b"net")])
        signed = self.beacon([(0, b"net")], signature=b"\xab" * 56)
        assert management_signing_input(signed) == encode_management_frame(bare)
        assert management_signing_input(signed) != encode_management_frame(signed)

    def test_truncated_element_area_raises(self):
        frame = self.beacon([(0, b"net")])
        wire = encode_management_frame(frame)
        with pytest.raises(MalformedFrameError):
            parse_management_frame(wire[:-1])

    def test_non_management_rejected(self):
        wire = bytearray(encode_management_frame(self.beacon()))
        wire[0] |= 0x08  # data-frame type bits
        with pytest.raises(MalformedFrameError):
            parse_management_frame(bytes(wire))

    def test_find_element(self):
        frame = self.beacon([(0, b"net"), (7, b"\x01")])
        assert find_element(frame, 7) == b"\x01"
        assert find_element(frame, 8) is None


class TestLegacyTransparency:
    """A receiver that has never heard of element 251 is unaffected by it."""

    def soap_beacon(self):
        ie = SoapIe((26,), bytes(28))
        return ManagementFrame(
            FrameSubtype.BEACON,
            MAC_A,
            BROADCAST_MAC,
            ((ELEMENT_ID_SSID, b"publicnet"), (1, bytes(8)), soap_ie_element(ie)),
        )

    def stripped(self, frame):
        kept = tuple(e for e in frame.elements if e[0] != ELEMENT_ID_SOAP)
        return ManagementFrame(frame.subtype, frame.src_mac, frame.dst_mac, kept)

    def test_unaware_parser_sees_identical_recognized_elements(self):
        legacy_ids = {ELEMENT_ID_SSID, 1}
        with_ie = parse_management_frame(encode_management_frame(self.soap_beacon()))
        without = parse_management_frame(
            encode_management_frame(self.stripped(self.soap_beacon()))
        )
        rec_a, skipped_a = extract_elements(with_ie, legacy_ids)
        rec_b, skipped_b = extract_elements(without, legacy_ids)
        assert rec_a == rec_b
        assert skipped_a == skipped_b + 1

    def test_stripping_element_changes_exactly_its_size(self):
        with_ie = encode_management_frame(self.soap_beacon())
        without = encode_management_frame(self.stripped(self.soap_beacon()))
        assert len(with_ie) - len(without) == 33

    def test_soap_ie_from_frame(self):
        frame = parse_management_frame(encode_management_frame(self.soap_beacon()))
        ie = soap_ie_from_frame(frame)
        assert ie == SoapIe((26,), bytes(28))
        assert soap_ie_from_frame(self.stripped(frame)) is None

    @given(
        extra=st.lists(
            st.tuples(
                st.integers(min_value=2, max_value=250), st.binary(max_size=20)
            ),
            max_size=4,
        )
    )
    def test_unknown_elements_never_error(self, extra):
        frame = ManagementFrame(
            FrameSubtype.BEACON,
            MAC_A,
            BROADCAST_MAC,
            ((ELEMENT_ID_SSID, b"net"), *extra),
        )
        parsed = parse_management_frame(encode_management_frame(frame))
        recognized, _ = extract_elements(parsed, {ELEMENT_ID_SSID})
        assert recognized == [(ELEMENT_ID_SSID, b"net")]


class TestDataFrames:
    """LLC/SNAP-wrapped EAPOL carrier frames."""

    def test_round_trip(self):
        frame = DataFrame(MAC_A, MAC_B, b"\x01\x02\x03")
        assert parse_data_frame(encode_data_frame(frame)) == frame

    def test_llc_snap_header_present(self):
        wire = encode_data_frame(DataFrame(MAC_A, MAC_B, b"payload"))
        assert wire[MAC_HEADER_OCTETS : MAC_HEADER_OCTETS + 8] == LLC_SNAP_HEADER

    def test_wrong_llc_rejected(self):
        wire = bytearray(encode_data_frame(DataFrame(MAC_A, MAC_B, b"p")))
        wire[MAC_HEADER_OCTETS] ^= 0xFF
        with pytest.raises(MalformedFrameError):
            parse_data_frame(bytes(wire))

    def test_macs_recovered(self):
        parsed = parse_data_frame(encode_data_frame(DataFrame(MAC_A, MAC_B, b"p")))
        assert parsed.src_mac == MAC_A
        assert parsed.dst_mac == MAC_B


class TestWireSizeDispatch:
    """frame_wire_size agrees with the encoders for every frame family."""

    def test_management(self):
        frame = ManagementFrame(
            FrameSubtype.BEACON, MAC_A, BROADCAST_MAC, ((0, b"ssid"),)
        )
        assert frame_wire_size(frame) == len(encode_management_frame(frame))

    def test_agreement_message_counts_headers(self):
        msg = SoapMessage(bytes(56), bytes(56))
        assert frame_wire_size(msg) == len(encode_soap_message(msg)) + 32

    def test_eapol_key_counts_headers(self):
        frame = EapolKeyFrame(key_info=KEY_INFO_M1, replay_counter=0, key_nonce=bytes(32))
        assert frame_wire_size(frame) == len(encode_eapol_key_frame(frame)) + 32

    def test_unknown_type_rejected(self):
        with pytest.raises(TypeError):
            frame_wire_size(object())


class TestHexdump:
    """Sixteen octets per line with running offsets."""

    def test_layout(self):
        lines = hexdump(bytes(range(20))).splitlines()
        assert lines[0].startswith("0000: 00 01")
        assert lines[1].startswith("0010: 10 11")
        assert len(lines) == 2

    def test_empty(self):
        assert hexdump(b"") == ""
