"""Plain affine short-Weierstrass arithmetic, kept deliberately naive.

This is the reference the fast production path is checked against, so it
shares no code with the package: textbook formulas, modular inverse via
pow(x, -1, p), one bit at a time.
"""

from __future__ import annotations

Point = tuple[int, int] | None


def affine_add(p: int, a: int, lhs: Point, rhs: Point) -> Point:
    if lhs is None:
        return rhs
    if rhs is None:
        return lhs
    x1, y1 = lhs
    x2, y2 = rhs
    if x1 == x2 and (y1 + y2) % p == 0:
        return None
    if lhs == rhs:
        slope = (3 * x1 * x1 + a) * pow(2 * y1, -1, p) % p
    else:
        slope = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (slope * slope - x1 - x2) % p
    return x3, (slope * (x1 - x3) - y1) % p


def affine_mul(p: int, a: int, k: int, point: Point) -> Point:
    acc: Point = None
    addend = point
    while k:
        if k & 1:
            acc = affine_add(p, a, acc, addend)
        addend = affine_add(p, a, addend, addend)
        k >>= 1
    return acc
