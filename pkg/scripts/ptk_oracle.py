"""One-off oracle: straight-line PTK derivation and EAPOL-Key MIC values.

Run once; its printed values are frozen into tests/test_fourway.py. Written
deliberately without importing the package so the checked path and the
expected values stay independent.
"""

import hashlib
import hmac
import struct

pmk = bytes.fromhex(
    "0dc0d6eb90555ed6419756b9a15ec3e3207b536bc0a4dc917f0f18de136ee24d"
)
aa = bytes.fromhex("020000000001")
spa = bytes.fromhex("020000000002")
anonce = bytes(range(32))
snonce = bytes(range(32, 64))

data = min(aa, spa) + max(aa, spa) + min(anonce, snonce) + max(anonce, snonce)
blob = b""
i = 0
while len(blob) < 48:
    blob += hmac.new(
        pmk, b"Pairwise key expansion" + b"\x00" + data + struct.pack("B", i),
        hashlib.sha1,
    ).digest()
    i += 1
ptk = blob[:48]
print("kck =", ptk[:16].hex())
print("kek =", ptk[16:32].hex())
print("tk  =", ptk[32:48].hex())

# Message 2 of the handshake, MIC field zeroed, serialized by hand:
# EAPOL header (ver 2, type 3, length 95) then the fixed 95-octet body.
key_info = 0x010A
body = (
    struct.pack(">BHH", 2, key_info, 16)
    + (1).to_bytes(8, "big")
    + snonce
    + bytes(16)
    + bytes(8)
    + bytes(8)
    + bytes(16)
    + struct.pack(">H", 0)
)
frame = struct.pack(">BBH", 2, 3, len(body)) + body
mic = hmac.new(ptk[:16], frame, hashlib.sha1).digest()[:16]
print("m2 frame =", frame.hex())
print("mic =", mic.hex())
