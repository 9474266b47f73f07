"""Ephemeral Wi-Fi PSK agreement over ECDH/ECDSA, plus a deterministic simnet harness."""

__version__ = "0.1.0"
