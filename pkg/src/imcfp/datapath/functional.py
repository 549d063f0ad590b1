"""Golden model split into the same pipeline stages as the mapped datapath."""
from __future__ import annotations

from .fp32 import (SIG_BITS, Flags, FpClass, Rounding, align, exp_adjust, exponent_diff,
                   normalize, pack, round_sig, significand_addsub, special_case, unpack)

EXPONENT_SUBTRACTION = "Exponent Subtraction"
RIGHT_SHIFT = "Right Shift"
FRACTION_ADDITION = "Fraction Addition"
LEFT_SHIFT = "Left Shift"
ROUNDING = "Rounding"
EXPONENT_INCDEC = "Exponent Inc/Dec"


def stage_names(mode: Rounding) -> list[str]:
    names = [EXPONENT_SUBTRACTION, RIGHT_SHIFT, FRACTION_ADDITION, LEFT_SHIFT]
    if mode is Rounding.RNE:
        names.append(ROUNDING)
    return names + [EXPONENT_INCDEC]


class FunctionalDatapath:
    """Scalar stage functions over a per-operation state dict."""

    def __init__(self, mode: Rounding = Rounding.RNE, block_width: int = 4):
        self.mode = mode
        self.block_width = block_width
        fns = {
            EXPONENT_SUBTRACTION: self._exponent_subtraction,
            RIGHT_SHIFT: self._right_shift,
            FRACTION_ADDITION: self._fraction_addition,
            LEFT_SHIFT: self._left_shift,
            ROUNDING: self._rounding,
            EXPONENT_INCDEC: self._exponent_incdec,
        }
        self.stages = [(name, fns[name]) for name in stage_names(mode)]

    def start(self, a: int, b: int, subtract: bool) -> dict:
        return {"a": a, "b": b, "subtract": bool(subtract)}

    def run(self, a: int, b: int, subtract: bool = False) -> tuple[int, Flags]:
        st = self.start(a, b, subtract)
        for _, fn in self.stages:
            st = fn(st)
        return st["result"], st["flags"]

    # -- stages ---------------------------------------------------------------

    def _exponent_subtraction(self, st):
        ua, ub = unpack(st["a"]), unpack(st["b"])
        special = special_case(ua, ub, st["subtract"])
        if special is not None:
            st["result"], st["flags"] = special
            st["done"] = True
            return st
        sb = ub.sign ^ int(st["subtract"])
        swap = int(ub.magnitude_key > ua.magnitude_key)
        big, small = (ub, ua) if swap else (ua, ub)
        st.update(
            done=False,
            flags=Flags(inexact=FpClass.SUBNORMAL_FLUSHED in (ua.cls, ub.cls)),
            zero_sign=ua.sign & sb,
            sign=sb if swap else ua.sign,
            eff_sub=ua.sign != sb,
            exponent=big.exponent,
            big_sig=big.significand,
            small_sig=small.significand,
            shift=exponent_diff(big.exponent, small.exponent)[0],
        )
        return st

    def _right_shift(self, st):
        if not st["done"]:
            st["small_sig"] = align(st["small_sig"], st["shift"])
        return st

    def _fraction_addition(self, st):
        if not st["done"]:
            total, carry = significand_addsub(st["big_sig"], st["small_sig"], st["eff_sub"],
                                              block=self.block_width)
            if not st["eff_sub"]:
                total |= carry << SIG_BITS
            st["sum"] = total
        return st

    def _left_shift(self, st):
        if not st["done"]:
            st["sig"], st["lz"], st["is_zero"] = normalize(st["sum"])
            st["carry"] = 0
        return st

    def _rounding(self, st):
        if not st["done"] and not st["is_zero"]:
            st["sig24"], st["carry"], st["grs"] = round_sig(st["sig"], self.mode)
        return st

    def _exponent_incdec(self, st):
        if st["done"]:
            return st
        flags = st["flags"]
        if st["is_zero"]:
            st["result"] = pack(st["zero_sign"], 0, 0, True)
            return st
        if self.mode is not Rounding.RNE:
            st["sig24"], st["carry"], st["grs"] = round_sig(st["sig"], self.mode)
        e, _, _ = exp_adjust(st["exponent"], st["lz"])
        e += st["carry"]
        flags.overflow = e > 254
        flags.underflow = e < 1
        flags.inexact |= st["grs"] or flags.overflow or flags.underflow
        st["result"] = pack(st["sign"], e, st["sig24"])
        return st


def fp_add_functional(a: int, b: int, subtract: bool = False, mode: Rounding = Rounding.RNE,
                      block_width: int = 4) -> tuple[int, Flags]:
    return FunctionalDatapath(mode, block_width).run(a, b, subtract)
