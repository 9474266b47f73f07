"""Group negotiation: advertisement and response elements, and the rule that
picks the strongest curve both stations support or falls back to legacy
WPA-PSK when they share none."""

from __future__ import annotations

from dataclasses import dataclass

from .crypto import (
    EcdsaKeyPair,
    Point,
    UnknownGroupError,
    group_for_key_size,
    point_from_x_octets,
    point_x_octets,
    registry_lookup,
    strongest_group_id,
)
from .frames import MalformedFrameError, SoapIe


@dataclass(frozen=True)
class NegotiationOutcome:
    """Either a selected ECDH group or the legacy pre-shared-key fallback."""

    selected_group_id: int | None

    @classmethod
    def soap(cls, group_id: int) -> "NegotiationOutcome":
        return cls(group_id)

    @classmethod
    def fallback(cls) -> "NegotiationOutcome":
        return cls(None)

    @property
    def is_soap(self) -> bool:
        return self.selected_group_id is not None


def select_group(ap_group_ids, client_group_ids) -> NegotiationOutcome:
    """Strongest common group wins; disjoint sets mean WPA-PSK fallback.

    Ids absent from the local registry are ignored, never an error, so a
    station interoperates with peers advertising groups it does not know.
    """
    common = set(ap_group_ids) & set(client_group_ids)
    chosen = strongest_group_id(common)
    if chosen is None:
        return NegotiationOutcome.fallback()
    return NegotiationOutcome.soap(chosen)


def advertisement_ie(signing_key: EcdsaKeyPair, group_ids) -> SoapIe:
    """AP-side element: the full supported group list plus the AP's key."""
    ids = sorted(set(group_ids))
    if not ids:
        raise ValueError("at least one group must be advertised")
    for gid in ids:
        registry_lookup(gid)  # raises UnknownGroupError on bad config
    return SoapIe(
        tuple(ids), point_x_octets(signing_key.group, signing_key.public_point)
    )


def response_ie(signing_key: EcdsaKeyPair, selected_group_id: int) -> SoapIe:
    """Client-side element: exactly the one group the client chose."""
    registry_lookup(selected_group_id)
    return SoapIe(
        (selected_group_id,),
        point_x_octets(signing_key.group, signing_key.public_point),
    )


def resolve_signer(ie: SoapIe):
    """Recover (curve, public point) for the key carried in an element.

    The element's key-size octet identifies the signer's curve, since every
    registered curve has a distinct coordinate width.
    """
    group = group_for_key_size(ie.key_size_octets)
    if group is None:
        raise UnknownGroupError(
            f"no registered curve has {ie.key_size_octets}-octet coordinates"
        )
    try:
        point: Point = point_from_x_octets(group, ie.ecdsa_public_x)
    except ValueError as exc:
        raise MalformedFrameError(f"advertised key does not decode: {exc}") from None
    return group, point
