"""Crossbar-mapped add/sub datapath.

Each stage is built from :mod:`blocks` evaluated on compiled NAND-NAND (or
NOR-NOR) array pairs.  Shifts run through sense-latch banks one position
per step.  State flows between stages as a dict of ``(batch, bits)`` arrays,
least significant bit first.
"""
from __future__ import annotations

import numpy as np

from .. import crossbar as xb
from ..sop import Budgets, Style
from . import blocks as bk
from .blocks import BlockLibrary
from .fp32 import Rounding
from .functional import (EXPONENT_INCDEC, EXPONENT_SUBTRACTION, FRACTION_ADDITION, LEFT_SHIFT,
                         RIGHT_SHIFT, ROUNDING, stage_names)

MUX_WIDTH = 4
OR_FANIN = 8


def words_to_bits(words, n: int = 32) -> np.ndarray:
    w = np.asarray(words, dtype=np.uint64).reshape(-1)
    return ((w[:, None] >> np.arange(n, dtype=np.uint64)) & 1).astype(np.uint8)


def bits_to_words(bits: np.ndarray) -> np.ndarray:
    weights = np.uint64(1) << np.arange(bits.shape[1], dtype=np.uint64)
    return (bits.astype(np.uint64) * weights).sum(axis=1).astype(np.uint64)


def _const(n: int, v: int, w: int = 1) -> np.ndarray:
    return np.full((n, w), v, dtype=np.uint8)


class MappedDatapath:
    """Batch evaluation of the add/sub pipeline on crossbar arrays.

    ``block_width`` is the carry-select block width; each adder block has
    ``2 * block_width`` inputs, so widths above 6 cannot be compiled exactly.
    """

    def __init__(self, mode: Rounding = Rounding.RNE, style: Style = Style.NAND_NAND,
                 block_width: int = 4, budgets: Budgets = Budgets()):
        if not 1 <= block_width <= 6:
            raise ValueError("mapped block width must be between 1 and 6")
        self.mode = mode
        self.w = block_width
        self.lib = BlockLibrary(style, budgets)
        fns = {
            EXPONENT_SUBTRACTION: self._exponent_subtraction,
            RIGHT_SHIFT: self._right_shift,
            FRACTION_ADDITION: self._fraction_addition,
            LEFT_SHIFT: self._left_shift,
            ROUNDING: self._rounding,
            EXPONENT_INCDEC: self._exponent_incdec,
        }
        self.stages = [(name, fns[name]) for name in stage_names(mode)]

    # -- composite helpers -----------------------------------------------------

    def _chunked(self, stage, site, block_of, x, *extra, width=MUX_WIDTH):
        """Apply a width-parametrized block to successive column chunks of ``x``."""
        out = []
        for k, lo in enumerate(range(0, x.shape[1], width)):
            w = min(width, x.shape[1] - lo)
            out.append(self.lib(stage, f"{site}[{k}]", block_of(w), x[:, lo:lo + w], *extra))
        return np.concatenate(out, axis=1)

    def _mux(self, stage, site, x, y, sel):
        out = []
        for k, lo in enumerate(range(0, x.shape[1], MUX_WIDTH)):
            w = min(MUX_WIDTH, x.shape[1] - lo)
            out.append(self.lib(stage, f"{site}[{k}]", bk.mux(w), x[:, lo:lo + w],
                                y[:, lo:lo + w], sel))
        return np.concatenate(out, axis=1)

    def _or_all(self, stage, site, x, level=0):
        if x.shape[1] == 1:
            return x
        parts = []
        for k, lo in enumerate(range(0, x.shape[1], OR_FANIN)):
            w = min(OR_FANIN, x.shape[1] - lo)
            chunk = x[:, lo:lo + w]
            parts.append(chunk if w == 1 else
                         self.lib(stage, f"{site}.L{level}[{k}]", bk.or_reduce(w), chunk))
        return self._or_all(stage, site, np.concatenate(parts, axis=1), level + 1)

    def _csa(self, stage, site, a, b, cin):
        """Carry-select add of two equal-width vectors; returns ``(sum, carry_out)``."""
        carry = cin
        out = []
        for k, lo in enumerate(range(0, a.shape[1], self.w)):
            w = min(self.w, a.shape[1] - lo)
            x, y = a[:, lo:lo + w], b[:, lo:lo + w]
            s0 = self.lib(stage, f"{site}.blk{k}.c0", bk.adder(w, 0), x, y)
            s1 = self.lib(stage, f"{site}.blk{k}.c1", bk.adder(w, 1), x, y)
            out.append(self._mux(stage, f"{site}.sel{k}", s0[:, :w], s1[:, :w], carry))
            carry = self.lib(stage, f"{site}.csel{k}", bk.carry_select(), s0[:, w:], s1[:, w:], carry)
        return np.concatenate(out, axis=1), carry

    def _increment(self, stage, site, x, cin):
        carry = cin
        out = []
        for k, lo in enumerate(range(0, x.shape[1], MUX_WIDTH)):
            w = min(MUX_WIDTH, x.shape[1] - lo)
            s = self.lib(stage, f"{site}[{k}]", bk.incrementer(w), x[:, lo:lo + w], carry)
            out.append(s[:, :w])
            carry = s[:, w:]
        return np.concatenate(out, axis=1), carry

    # -- stages ------------------------------------------------------------------

    def start(self, a, b, subtract) -> dict:
        a = np.asarray(a, dtype=np.uint64).reshape(-1)
        n = a.shape[0]
        b = np.broadcast_to(np.asarray(b, dtype=np.uint64), (n,))
        op = np.broadcast_to(np.asarray(subtract, dtype=np.uint8), (n,)).reshape(n, 1)
        return {"a": words_to_bits(a), "b": words_to_bits(b), "op": op.copy()}

    def run(self, a, b, subtract=False) -> tuple[np.ndarray, np.ndarray]:
        """Words and flag integers for a batch of Normal/Zero operand pairs."""
        st = self.start(a, b, subtract)
        for _, fn in self.stages:
            st = fn(st)
        return st["result"], st["flags"]

    def _operand(self, S, tag, w):
        exp, frac = w[:, 23:31], w[:, 0:23]
        hidden = self._or_all(S, f"{tag}.hidden", exp)
        frac_nz = self._or_all(S, f"{tag}.frac_nz", frac)
        subnormal = self.lib(S, f"{tag}.subnormal", bk.subnormal_detect(), hidden, frac_nz)
        frac = self._chunked(S, f"{tag}.flush", bk.and_mask, frac, hidden)
        sig = np.concatenate([_const(len(w), 0, 3), frac, hidden], axis=1)
        return exp, frac, sig, subnormal

    def _exponent_subtraction(self, st):
        S = EXPONENT_SUBTRACTION
        wa, wb = st["a"], st["b"]
        n = len(wa)
        ea, fa, sig_a, sub_a = self._operand(S, "a", wa)
        eb, fb, sig_b, sub_b = self._operand(S, "b", wb)
        # magnitude compare of {exponent, flushed fraction}: is b > a?
        mag_a = np.concatenate([fa, ea], axis=1)
        mag_b = np.concatenate([fb, eb], axis=1)
        gt = eq = None
        for k, lo in enumerate(range(0, 31, MUX_WIDTH)):
            w = min(MUX_WIDTH, 31 - lo)
            r = self.lib(S, f"cmp[{k}]", bk.comparator(w), mag_b[:, lo:lo + w], mag_a[:, lo:lo + w])
            if gt is None:
                gt, eq = r[:, :1], r[:, 1:]
            else:
                m = self.lib(S, f"cmp_merge[{k}]", bk.compare_merge(), r[:, :1], r[:, 1:], gt, eq)
                gt, eq = m[:, :1], m[:, 1:]
        swap = gt
        signs = self.lib(S, "sign", bk.sign_logic(), swap, wa[:, 31:], wb[:, 31:], st["op"])
        big_e = self._mux(S, "big_e", ea, eb, swap)
        small_e = self._mux(S, "small_e", eb, ea, swap)
        big_sig = self._mux(S, "big_sig", sig_a, sig_b, swap)
        small_sig = self._mux(S, "small_sig", sig_b, sig_a, swap)
        neg_small = self._chunked(S, "neg_small_e", bk.xor_mask, small_e, _const(n, 1))
        diff, _ = self._csa(S, "exp_sub", big_e, neg_small, _const(n, 1))
        shift = self.lib(S, "clamp", bk.clamp_shift(), diff)
        inexact_in = self.lib(S, "flush_flag", bk.or_reduce(2), sub_a, sub_b)
        return {
            "sign": signs[:, 0:1], "zero_sign": signs[:, 1:2], "eff_sub": signs[:, 2:3],
            "exponent": big_e, "big_sig": big_sig, "small_sig": small_sig, "shift": shift,
            "inexact_in": inexact_in,
        }

    def _right_shift(self, st):
        S = RIGHT_SHIFT
        enable = self.lib(S, "decode", bk.shift_decode(), st["shift"])
        bank = xb.SenseLatchBank(st["small_sig"])
        sticky = np.zeros((len(bank.bits), 1), dtype=np.uint8)
        for t in range(enable.shape[1]):
            en = enable[:, t:t + 1].astype(bool)
            out = xb.shifted_out(bank, 1, toward_higher=False)
            moved = xb.latch_shift(bank, 1, toward_higher=False, fill=0)
            bank = xb.SenseLatchBank(np.where(en, moved.bits, bank.bits))
            sticky = np.where(en, self.lib(S, "sticky", bk.or_reduce(2), sticky, out), sticky)
        bits = bank.bits.copy()
        bits[:, :1] = self.lib(S, "sticky_merge", bk.or_reduce(2), bits[:, :1], sticky)
        st["small_sig"] = bits
        return st

    def _fraction_addition(self, st):
        S = FRACTION_ADDITION
        addend = self._chunked(S, "invert", bk.xor_mask, st["small_sig"], st["eff_sub"])
        total, cout = self._csa(S, "csa", st["big_sig"], addend, st["eff_sub"])
        top = self.lib(S, "carry_keep", bk.carry_keep(), cout, st["eff_sub"])
        st["sum"] = np.concatenate([total, top], axis=1)
        return st

    def _left_shift(self, st):
        S = LEFT_SHIFT
        s = st["sum"]
        n = len(s)
        st["nonzero"] = self._or_all(S, "nonzero", s)
        carry = s[:, 27:28]
        low = self.lib(S, "carry_sticky", bk.or_reduce(2), s[:, 0:1], s[:, 1:2])
        right1 = np.concatenate([low, s[:, 2:28]], axis=1)
        bank = xb.SenseLatchBank(self._mux(S, "carry_shift", s[:, 0:27], right1, carry))
        lz = np.zeros((n, 5), dtype=np.uint8)
        for _ in range(26):
            en = self.lib(S, "msb_low", bk.inverter(), bank.bits[:, 26:27])
            moved = xb.latch_shift(bank, 1, toward_higher=True, fill=0)
            bank = xb.SenseLatchBank(np.where(en.astype(bool), moved.bits, bank.bits))
            lz = self.lib(S, "lz_count", bk.incrementer(5), lz, en)[:, :5]
        st["sig"], st["lz"], st["carry_out"] = bank.bits, lz, carry
        st["round_carry"] = _const(n, 0)
        st["sig24"] = bank.bits[:, 3:27]
        return st

    def _rounding(self, st):
        S = ROUNDING
        sig = st["sig"]
        inc = self.lib(S, "round_inc", bk.round_increment(),
                       sig[:, 3:4], sig[:, 2:3], sig[:, 1:2], sig[:, 0:1])
        sig24, c24 = self._increment(S, "sig_inc", sig[:, 3:27], inc)
        sig24[:, 23:24] = self.lib(S, "renorm", bk.or_reduce(2), sig24[:, 23:24], c24)
        st["sig24"], st["round_carry"] = sig24, c24
        return st

    def _exponent_incdec(self, st):
        S = EXPONENT_INCDEC
        n = len(st["sig"])
        lz10 = np.concatenate([st["lz"], _const(n, 0, 5)], axis=1)
        operand = self._chunked(S, "delta", bk.neg_mask, lz10, st["carry_out"])
        e10 = np.concatenate([st["exponent"], _const(n, 0, 2)], axis=1)
        e, _ = self._csa(S, "exp_adj", e10, operand, _const(n, 1))
        if self.mode is Rounding.RNE:
            e, _ = self._increment(S, "exp_round", e, st["round_carry"])
        uf_of = self.lib(S, "flags", bk.exponent_flags(), e)
        ctl = self.lib(S, "pack_ctl", bk.pack_control(), st["nonzero"], uf_of[:, :1], uf_of[:, 1:])
        kill_exp, force_exp, kill_frac, uf, of = (ctl[:, i:i + 1] for i in range(5))
        exp_out = self._chunked(S, "exp_out", bk.exponent_select, e[:, :8], kill_exp, force_exp)
        frac_out = self._chunked(S, "frac_out", bk.frac_kill, st["sig24"][:, :23], kill_frac)
        sign = self.lib(S, "sign_out", bk.mux(1), st["zero_sign"], st["sign"], st["nonzero"])
        sig = st["sig"]
        grs = self.lib(S, "grs", bk.or_reduce(3), sig[:, 0:1], sig[:, 1:2], sig[:, 2:3])
        inexact = self.lib(S, "inexact", bk.or_reduce(4), st["inexact_in"], grs, uf, of)
        bits = np.concatenate([frac_out, exp_out, sign], axis=1)
        st["result"] = bits_to_words(bits)
        st["flags"] = (of[:, 0].astype(np.int64) << 3 | uf[:, 0].astype(np.int64) << 2
                       | inexact[:, 0].astype(np.int64) << 1)
        return st

    # -- inventory -----------------------------------------------------------------

    def inventory(self) -> dict[str, dict[str, str]]:
        """Block instances per stage (call site -> block name), after at least one run."""
        if not self.lib.trace:
            self.run(np.array([0x3F800000], dtype=np.uint64), np.array([0x3F800000], dtype=np.uint64))
        return self.lib.trace
