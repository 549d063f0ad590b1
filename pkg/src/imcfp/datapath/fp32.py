"""Scalar golden model of the single-precision add/sub datapath.

Significands travel as 27-bit integers: hidden bit at position 26, 23
fraction bits, then guard, round and sticky.  Subnormal operands and
results are flushed to zero.
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

BIAS = 127
EXP_MAX = 254
FRAC_BITS = 23
SIG_BITS = 27          # hidden + fraction + G/R/S
HIDDEN = 1 << 26
SHIFT_CLAMP = 31
CANONICAL_NAN = 0x7FC00000


class FpClass(enum.Enum):
    ZERO = "zero"
    NORMAL = "normal"
    INF = "inf"
    NAN = "nan"
    SUBNORMAL_FLUSHED = "subnormal_flushed"


class Rounding(enum.Enum):
    RNE = "rne"
    TRUNCATE = "truncate"


@dataclass
class Flags:
    overflow: bool = False
    underflow: bool = False
    inexact: bool = False
    invalid: bool = False

    def as_int(self) -> int:
        return (self.overflow << 3) | (self.underflow << 2) | (self.inexact << 1) | int(self.invalid)

    @classmethod
    def from_int(cls, v: int) -> "Flags":
        return cls(bool(v >> 3 & 1), bool(v >> 2 & 1), bool(v >> 1 & 1), bool(v & 1))

    def __str__(self):
        names = [n for n in ("overflow", "underflow", "inexact", "invalid") if getattr(self, n)]
        return ",".join(names) or "-"


@dataclass
class Unpacked:
    sign: int
    exponent: int
    significand: int   # 27-bit, hidden bit at 26 for normals
    cls: FpClass

    @property
    def magnitude_key(self) -> tuple:
        return (self.exponent, self.significand)


def float_to_bits(x: float) -> int:
    return struct.unpack("<I", struct.pack("<f", x))[0]


def bits_to_float(w: int) -> float:
    return struct.unpack("<f", struct.pack("<I", w & 0xFFFFFFFF))[0]


def unpack(w: int) -> Unpacked:
    sign = w >> 31 & 1
    exp = w >> 23 & 0xFF
    frac = w & 0x7FFFFF
    if exp == 0xFF:
        return Unpacked(sign, exp, frac << 3, FpClass.NAN if frac else FpClass.INF)
    if exp == 0:
        return Unpacked(sign, 0, 0, FpClass.SUBNORMAL_FLUSHED if frac else FpClass.ZERO)
    return Unpacked(sign, exp, (HIDDEN | frac << 3), FpClass.NORMAL)


def exponent_diff(ea: int, eb: int) -> tuple[int, int]:
    """``(|ea - eb|`` clamped to 31, ``1`` iff ``eb > ea)``."""
    return min(abs(ea - eb), SHIFT_CLAMP), int(eb > ea)


def align(sig: int, d: int, width: int = SIG_BITS) -> int:
    """Logical right shift by ``d``; every bit shifted out is ORed into bit 0."""
    if d == 0:
        return sig
    lost = sig & ((1 << d) - 1) if d < width else sig
    return (sig >> d) | int(lost != 0)


def significand_addsub(a: int, b: int, subtract: bool, width: int = SIG_BITS,
                       block: int = 4) -> tuple[int, int]:
    """``a + b`` or ``a - b`` modulo ``2**width`` through carry-select blocks.

    Each ``block``-bit slice is summed for carry-in 0 and 1 and the real
    carry picks one.  Subtraction is ``a + ~b + 1``.  Returns ``(sum, carry_out)``.
    """
    mask = (1 << width) - 1
    if subtract:
        b = ~b & mask
    carry = int(subtract)
    out = 0
    for lo in range(0, width, block):
        w = min(block, width - lo)
        m = (1 << w) - 1
        x, y = a >> lo & m, b >> lo & m
        s0, s1 = x + y, x + y + 1
        s = s1 if carry else s0
        out |= (s & m) << lo
        carry = s >> w
    return out, carry


def normalize(total: int) -> tuple[int, int, bool]:
    """Bring a 28-bit sum back to a 27-bit significand with the hidden bit at 26.

    Returns ``(sig, lz_shift, is_zero)``; ``lz_shift`` is the left shift
    applied, ``-1`` for the carry-out right shift.
    """
    if total == 0:
        return 0, 0, True
    if total >> SIG_BITS:
        return (total >> 1) | (total & 1), -1, False
    lz = SIG_BITS - total.bit_length()
    return total << lz, lz, False


def exp_adjust(e: int, delta: int) -> tuple[int, bool, bool]:
    """``e - delta`` with (overflow ``> 254``, underflow ``< 1``) flags."""
    out = e - delta
    return out, out > EXP_MAX, out < 1


def round_sig(sig: int, mode: Rounding) -> tuple[int, int, bool]:
    """Drop G/R/S from a normalized 27-bit significand.

    Returns ``(sig24, carry, inexact)``; on ``carry`` the significand has been
    renormalized to ``0x800000`` and the exponent must be bumped.
    """
    grs = sig & 0b111
    sig24 = sig >> 3
    if mode is Rounding.RNE:
        g, rest, lsb = grs >> 2, grs & 0b11, sig24 & 1
        if g and (rest or lsb):
            sig24 += 1
    if sig24 >> 24:
        return sig24 >> 1, 1, grs != 0
    return sig24, 0, grs != 0


def pack(sign: int, e: int, sig24: int, is_zero: bool = False) -> int:
    if is_zero:
        return sign << 31
    if e > EXP_MAX:
        return sign << 31 | 0xFF << 23
    if e < 1:
        return sign << 31
    return sign << 31 | e << 23 | (sig24 & 0x7FFFFF)


def special_case(ua: Unpacked, ub: Unpacked, subtract: bool):
    """Result for Inf/NaN operands, or ``None`` when both are finite."""
    if ua.cls is FpClass.NAN or ub.cls is FpClass.NAN:
        snan = any(u.cls is FpClass.NAN and not u.significand >> 25 & 1 for u in (ua, ub))
        return CANONICAL_NAN, Flags(invalid=snan)
    sb = ub.sign ^ int(subtract)
    if ua.cls is FpClass.INF and ub.cls is FpClass.INF:
        if ua.sign != sb:
            return CANONICAL_NAN, Flags(invalid=True)
        return ua.sign << 31 | 0xFF << 23, Flags()
    if ua.cls is FpClass.INF:
        return ua.sign << 31 | 0xFF << 23, Flags()
    if ub.cls is FpClass.INF:
        return sb << 31 | 0xFF << 23, Flags()
    return None
