"""Elliptic-curve primitives for the PSK agreement protocol.

Pure-Python arithmetic over the short-Weierstrass NIST prime curves, a
registry keyed by the IKEv2 Diffie-Hellman transform identifiers those
curves are negotiated under, deterministic ECDSA, and a seeded DRBG so
every run of the simulator is reproducible byte for byte.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

# A derived PSK is always a full SHA-256 digest.
PSK_OCTETS = 32

_DIGEST = hashlib.sha256
_DIGEST_OCTETS = 32


class UnknownGroupError(ValueError):
    """Group id is not present in the curve registry."""


class InvalidPointError(ValueError):
    """Octet string does not decode to a point on the curve."""


class InvalidScalarError(ValueError):
    """Scalar is outside the private-key range [1, n-1]."""


Point = tuple[int, int]


@dataclass(frozen=True)
class EcGroup:
    """One registered curve: negotiation id plus domain parameters.

    All registered curves use a = -3; only b is stored.  key_size_octets
    is the width of one coordinate and of every scalar on the wire.
    """

    group_id: int
    name: str
    key_size_octets: int
    field_p: int
    curve_b: int
    order_n: int
    gen_x: int
    gen_y: int

    @property
    def curve_a(self) -> int:
        return self.field_p - 3

    @property
    def generator(self) -> Point:
        return (self.gen_x, self.gen_y)

    def __repr__(self) -> str:
        return f"EcGroup(id={self.group_id}, {self.name})"


def _p521_order() -> int:
    return int(
        "01" + "F" * 65 + "A"
        "51868783BF2F966B7FCC0148F709A5D03BB5C9B8899C47AEBB6FB71E91386409",
        16,
    )


_GROUPS = (
    EcGroup(
        group_id=26,
        name="P-224",
        key_size_octets=28,
        field_p=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF000000000000000000000001,
        curve_b=0xB4050A850C04B3ABF54132565044B0B7D7BFD8BA270B39432355FFB4,
        order_n=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFF16A2E0B8F03E13DD29455C5C2A3D,
        gen_x=0xB70E0CBD6BB4BF7F321390B94A03C1D356C21122343280D6115C1D21,
        gen_y=0xBD376388B5F723FB4C22DFE6CD4375A05A07476444D5819985007E34,
    ),
    EcGroup(
        group_id=19,
        name="P-256",
        key_size_octets=32,
        field_p=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
        curve_b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
        order_n=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
        gen_x=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
        gen_y=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    ),
    EcGroup(
        group_id=20,
        name="P-384",
        key_size_octets=48,
        field_p=int(
            "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF"
            "FFFFFFFEFFFFFFFF0000000000000000FFFFFFFF",
            16,
        ),
        curve_b=int(
            "B3312FA7E23EE7E4988E056BE3F82D19181D9C6EFE8141120314088F"
            "5013875AC656398D8A2ED19D2A85C8EDD3EC2AEF",
            16,
        ),
        order_n=int(
            "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFC7634D81"
            "F4372DDF581A0DB248B0A77AECEC196ACCC52973",
            16,
        ),
        gen_x=int(
            "AA87CA22BE8B05378EB1C71EF320AD746E1D3B628BA79B9859F741E0"
            "82542A385502F25DBF55296C3A545E3872760AB7",
            16,
        ),
        gen_y=int(
            "3617DE4A96262C6F5D9E98BF9292DC29F8F41DBD289A147CE9DA3113"
            "B5F0B8C00A60B1CE1D7E819D7A431D7C90EA0E5F",
            16,
        ),
    ),
    EcGroup(
        group_id=21,
        name="P-521",
        key_size_octets=66,
        field_p=(1 << 521) - 1,
        curve_b=int(
            "0051953EB9618E1C9A1F929A21A0B68540EEA2DA725B99B315F3B8B4"
            "89918EF109E156193951EC7E937B1652C0BD3BB1BF073573DF883D2C"
            "34F1EF451FD46B503F00",
            16,
        ),
        order_n=_p521_order(),
        gen_x=int(
            "00C6858E06B70404E9CD9E3ECB662395B4429C648139053FB521F828"
            "AF606B4D3DBAA14B5E77EFE75928FE1DC127A2FFA8DE3348B3C1856A"
            "429BF97E7E31C2E5BD66",
            16,
        ),
        gen_y=int(
            "011839296A789A3BC0045C8A5FB42C7D1BD998F54449579B446817AF"
            "BD17273E662C97EE72995EF42640C550B9013FAD0761353C7086A272"
            "C24088BE94769FD16650",
            16,
        ),
    ),
)

REGISTRY: dict[int, EcGroup] = {g.group_id: g for g in _GROUPS}
assert len(REGISTRY) == len(_GROUPS)  # ids must be unique
assert all(0 <= gid <= 255 for gid in REGISTRY)  # ids ride in one octet
assert len({g.key_size_octets for g in _GROUPS}) == len(_GROUPS)

DEFAULT_GROUP_ID = 26


def registry_lookup(group_id: int) -> EcGroup:
    try:
        return REGISTRY[group_id]
    except KeyError:
        raise UnknownGroupError(f"unknown ECDH group id {group_id}") from None


def known_group_ids() -> frozenset[int]:
    return frozenset(REGISTRY)


def group_for_key_size(key_size_octets: int) -> EcGroup | None:
    """Map a wire key size back to the unique registered curve of that size."""
    for group in REGISTRY.values():
        if group.key_size_octets == key_size_octets:
            return group
    return None


def strongest_group_id(group_ids) -> int | None:
    """Pick the largest-key group; break ties on the smaller id."""
    best: EcGroup | None = None
    for gid in group_ids:
        group = REGISTRY.get(gid)
        if group is None:
            continue
        if (
            best is None
            or group.key_size_octets > best.key_size_octets
            or (group.key_size_octets == best.key_size_octets and gid < best.group_id)
        ):
            best = group
    return None if best is None else best.group_id


# ---------------------------------------------------------------------------
# Field and point arithmetic
# ---------------------------------------------------------------------------


def is_on_curve(group: EcGroup, point: Point | None) -> bool:
    if point is None:
        return True  # the identity
    x, y = point
    p = group.field_p
    if not (0 <= x < p and 0 <= y < p):
        return False
    return (y * y - (x * x * x - 3 * x + group.curve_b)) % p == 0


def point_add(group: EcGroup, p1: Point | None, p2: Point | None) -> Point | None:
    """Affine addition, identity encoded as None."""
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    p = group.field_p
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 - 3) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return (x3, y3)


def _jacobian_double(x, y, z, p):
    if not y:
        return 0, 1, 0
    yy = y * y % p
    s = 4 * x * yy % p
    zz = z * z % p
    m = 3 * (x - zz) * (x + zz) % p
    x3 = (m * m - 2 * s) % p
    y3 = (m * (s - x3) - 8 * yy * yy) % p
    z3 = 2 * y * z % p
    return x3, y3, z3


def _jacobian_add_affine(x1, y1, z1, x2, y2, p):
    # Mixed addition: (x1,y1,z1) Jacobian + (x2,y2) affine.
    if not z1:
        return x2, y2, 1
    z1z1 = z1 * z1 % p
    u2 = x2 * z1z1 % p
    s2 = y2 * z1 * z1z1 % p
    h = (u2 - x1) % p
    r = (s2 - y1) % p
    if not h:
        if not r:
            return _jacobian_double(x1, y1, z1, p)
        return 0, 1, 0
    hh = h * h % p
    hhh = h * hh % p
    v = x1 * hh % p
    x3 = (r * r - hhh - 2 * v) % p
    y3 = (r * (v - x3) - y1 * hhh) % p
    z3 = z1 * h % p
    return x3, y3, z3


def point_mul(group: EcGroup, scalar: int, point: Point | None = None) -> Point | None:
    """Scalar multiple of point (base point when omitted)."""
    if point is None:
        point = group.generator
    scalar %= group.order_n
    if scalar == 0 or point is None:
        return None
    p = group.field_p
    ax, ay = point
    x, y, z = 0, 1, 0
    for bit in bin(scalar)[2:]:
        x, y, z = _jacobian_double(x, y, z, p)
        if bit == "1":
            x, y, z = _jacobian_add_affine(x, y, z, ax, ay, p)
    if not z:
        return None
    zinv = pow(z, -1, p)
    zinv2 = zinv * zinv % p
    return (x * zinv2 % p, y * zinv2 * zinv % p)


def _mod_sqrt(a: int, p: int) -> int | None:
    """Square root mod an odd prime, or None when a is a non-residue."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks for p = 1 mod 4 (P-224).
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t = t * c % p
        r = r * b % p
    return r


# ---------------------------------------------------------------------------
# Octet-string encodings (all fixed width, big endian)
# ---------------------------------------------------------------------------


def scalar_to_octets(group: EcGroup, value: int) -> bytes:
    return value.to_bytes(group.key_size_octets, "big")


def octets_to_scalar(group: EcGroup, data: bytes) -> int:
    if len(data) != group.key_size_octets:
        raise InvalidScalarError(
            f"expected {group.key_size_octets} octets, got {len(data)}"
        )
    return int.from_bytes(data, "big")


def point_to_octets(group: EcGroup, point: Point) -> bytes:
    """Uncompressed coordinate pair: x then y, each key_size_octets wide."""
    s = group.key_size_octets
    x, y = point
    return x.to_bytes(s, "big") + y.to_bytes(s, "big")


def octets_to_point(group: EcGroup, data: bytes) -> Point:
    s = group.key_size_octets
    if len(data) != 2 * s:
        raise InvalidPointError(f"expected {2 * s} octets, got {len(data)}")
    point = (int.from_bytes(data[:s], "big"), int.from_bytes(data[s:], "big"))
    if not is_on_curve(group, point) or point is None:
        raise InvalidPointError("coordinates are not a point on the curve")
    return point


def point_x_octets(group: EcGroup, point: Point) -> bytes:
    return point[0].to_bytes(group.key_size_octets, "big")


def point_from_x_octets(group: EcGroup, data: bytes) -> Point:
    """Recover the even-y point for an x-only encoding."""
    if len(data) != group.key_size_octets:
        raise InvalidPointError(
            f"expected {group.key_size_octets} octets, got {len(data)}"
        )
    p = group.field_p
    x = int.from_bytes(data, "big")
    if x >= p:
        raise InvalidPointError("x coordinate out of field range")
    y = _mod_sqrt((x * x * x - 3 * x + group.curve_b) % p, p)
    if y is None:
        raise InvalidPointError("x coordinate is not on the curve")
    if y % 2:
        y = p - y
    return (x, y)


# ---------------------------------------------------------------------------
# Seeded randomness
# ---------------------------------------------------------------------------


class SeededRng:
    """Deterministic byte stream: SHA-256 in counter mode over (seed, label).

    child() derives an independent stream, so stations and sessions can
    each consume randomness without perturbing one another's draws.
    """

    def __init__(self, seed: int | bytes, label: bytes = b""):
        if isinstance(seed, int):
            seed = seed.to_bytes(16, "big", signed=False) if seed >= 0 else repr(seed).encode()
        self._state = _DIGEST(b"soapsim.rng\x00" + seed + b"\x00" + label).digest()
        self._counter = 0
        self._pool = b""

    def child(self, label: bytes | str) -> "SeededRng":
        if isinstance(label, str):
            label = label.encode()
        rng = SeededRng.__new__(SeededRng)
        rng._state = _DIGEST(self._state + b"\x01child\x00" + label).digest()
        rng._counter = 0
        rng._pool = b""
        return rng

    def randbytes(self, n: int) -> bytes:
        while len(self._pool) < n:
            block = _DIGEST(
                self._state + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            self._pool += block
        out, self._pool = self._pool[:n], self._pool[n:]
        return out

    def uniform_scalar(self, group: EcGroup) -> int:
        """Draw uniformly from [1, n-1] by rejection sampling."""
        n = group.order_n
        nbytes = (n.bit_length() + 7) // 8
        shift = 8 * nbytes - n.bit_length()
        while True:
            candidate = int.from_bytes(self.randbytes(nbytes), "big") >> shift
            if 1 <= candidate < n:
                return candidate


# ---------------------------------------------------------------------------
# ECDH
# ---------------------------------------------------------------------------


@dataclass
class EcdhKeyPair:
    group: EcGroup
    private_scalar: int
    public_point: Point


class SharedPsk(bytes):
    """32-octet pre-shared key: SHA-256 over the shared point's x coordinate."""

    def __new__(cls, data: bytes):
        if len(data) != PSK_OCTETS:
            raise ValueError(f"PSK must be {PSK_OCTETS} octets")
        return super().__new__(cls, data)


def ecdh_generate(group: EcGroup, rng: SeededRng) -> EcdhKeyPair:
    d = rng.uniform_scalar(group)
    public = point_mul(group, d)
    assert public is not None
    return EcdhKeyPair(group, d, public)


def ecdh_agree(own: EcdhKeyPair, peer_public: Point) -> SharedPsk:
    group = own.group
    if not is_on_curve(group, peer_public) or peer_public is None:
        raise InvalidPointError("peer public value is not on the curve")
    shared = point_mul(group, own.private_scalar, peer_public)
    if shared is None:
        raise InvalidPointError("shared secret degenerated to the identity")
    return SharedPsk(_DIGEST(point_x_octets(group, shared)).digest())


# ---------------------------------------------------------------------------
# ECDSA (deterministic per RFC 6979, SHA-256 throughout)
# ---------------------------------------------------------------------------


@dataclass
class EcdsaKeyPair:
    group: EcGroup
    private_scalar: int
    public_point: Point


def ecdsa_generate(group: EcGroup, rng: SeededRng) -> EcdsaKeyPair:
    """Generate a signing key whose public point has even y.

    The advertisement carries only the x coordinate, so the key is
    canonicalised at generation time: if d*G has odd y, d is replaced by
    n - d, which negates the point without changing x.
    """
    d = rng.uniform_scalar(group)
    public = point_mul(group, d)
    assert public is not None
    if public[1] % 2:
        d = group.order_n - d
        public = (public[0], group.field_p - public[1])
    return EcdsaKeyPair(group, d, public)


def _bits2int(data: bytes, n: int) -> int:
    value = int.from_bytes(data, "big")
    excess = 8 * len(data) - n.bit_length()
    if excess > 0:
        value >>= excess
    return value


def _int2octets(value: int, n: int) -> bytes:
    return value.to_bytes((n.bit_length() + 7) // 8, "big")


def _deterministic_nonce(group: EcGroup, private_scalar: int, digest: bytes) -> int:
    """HMAC-SHA256 DRBG nonce derivation keyed on the private key and digest."""
    n = group.order_n
    h1 = _bits2int(digest, n) % n
    v = b"\x01" * _DIGEST_OCTETS
    k = b"\x00" * _DIGEST_OCTETS
    seed = _int2octets(private_scalar, n) + _int2octets(h1, n)
    k = hmac.new(k, v + b"\x00" + seed, _DIGEST).digest()
    v = hmac.new(k, v, _DIGEST).digest()
    k = hmac.new(k, v + b"\x01" + seed, _DIGEST).digest()
    v = hmac.new(k, v, _DIGEST).digest()
    nbytes = (n.bit_length() + 7) // 8
    while True:
        t = b""
        while len(t) < nbytes:
            v = hmac.new(k, v, _DIGEST).digest()
            t += v
        candidate = _bits2int(t[:nbytes], n)
        if 1 <= candidate < n:
            return candidate
        k = hmac.new(k, v + b"\x00", _DIGEST).digest()
        v = hmac.new(k, v, _DIGEST).digest()


def ecdsa_sign(key: EcdsaKeyPair, message: bytes) -> bytes:
    """Sign SHA-256(message); returns r || s, each key_size_octets wide.

    Nonces are derived deterministically from the key and digest, so a
    given (key, message) pair always yields the same signature and runs
    never depend on platform entropy.
    """
    group = key.group
    n = group.order_n
    digest = _DIGEST(message).digest()
    e = _bits2int(digest, n) % n
    while True:
        k = _deterministic_nonce(group, key.private_scalar, digest)
        point = point_mul(group, k)
        assert point is not None
        r = point[0] % n
        if r == 0:
            digest = _DIGEST(digest).digest()  # unreachable in practice
            continue
        s = (e + r * key.private_scalar) * pow(k, -1, n) % n
        if s == 0:
            digest = _DIGEST(digest).digest()
            continue
        return scalar_to_octets(group, r) + scalar_to_octets(group, s)


def ecdsa_verify(
    group: EcGroup, public_point: Point, message: bytes, signature: bytes
) -> bool:
    width = group.key_size_octets
    if len(signature) != 2 * width:
        return False
    n = group.order_n
    r = int.from_bytes(signature[:width], "big")
    s = int.from_bytes(signature[width:], "big")
    if not (1 <= r < n and 1 <= s < n):
        return False
    if not is_on_curve(group, public_point) or public_point is None:
        return False
    e = _bits2int(_DIGEST(message).digest(), n) % n
    w = pow(s, -1, n)
    u1 = e * w % n
    u2 = r * w % n
    point = point_add(
        group, point_mul(group, u1), point_mul(group, u2, public_point)
    )
    if point is None:
        return False
    return point[0] % n == r
