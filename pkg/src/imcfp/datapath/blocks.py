"""Small Boolean blocks compiled to two-level crossbar plans.

Every block is a truth table of at most 12 inputs.  The mapped datapath is
wired together only from these blocks, the sense-latch banks and plain bit
routing; all logic is evaluated on crossbar arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..sop import BoolFunc, Budgets, MappingPlan, Style, compile_function


def _u(x: np.ndarray, lo: int, w: int) -> np.ndarray:
    """Unsigned value of columns ``lo..lo+w-1`` (LSB first)."""
    v = np.zeros(x.shape[0], dtype=np.int64)
    for i in range(w):
        v |= x[:, lo + i].astype(np.int64) << i
    return v


def _bits(v: np.ndarray, w: int) -> np.ndarray:
    return np.stack([(v >> i) & 1 for i in range(w)], axis=1)


@dataclass(frozen=True)
class LogicBlock:
    name: str
    n_in: int
    n_out: int
    fn: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)

    def truth_table(self) -> BoolFunc:
        return BoolFunc.from_vectorized(self.n_in, self.n_out, self.fn)


# -- block constructors -------------------------------------------------------

def adder(w: int, cin: int) -> LogicBlock:
    """``a[w] + b[w] + cin`` -> ``s[w], cout``; ``cin`` is fixed (carry-select copy)."""
    return LogicBlock(f"add{w}_c{cin}", 2 * w, w + 1,
                      lambda x: _bits(_u(x, 0, w) + _u(x, w, w) + cin, w + 1))


def mux(w: int) -> LogicBlock:
    """``x[w], y[w], sel`` -> ``sel ? y : x``."""
    def fn(x):
        sel = x[:, 2 * w:2 * w + 1]
        return np.where(sel == 1, x[:, w:2 * w], x[:, :w])
    return LogicBlock(f"mux{w}", 2 * w + 1, w, fn)


def carry_select() -> LogicBlock:
    return LogicBlock("carry_sel", 3, 1, lambda x: (x[:, :1] | (x[:, 1:2] & x[:, 2:3])))


def xor_mask(w: int) -> LogicBlock:
    return LogicBlock(f"xor_mask{w}", w + 1, w, lambda x: x[:, :w] ^ x[:, w:w + 1])


def and_mask(w: int) -> LogicBlock:
    return LogicBlock(f"and_mask{w}", w + 1, w, lambda x: x[:, :w] & x[:, w:w + 1])


def comparator(w: int) -> LogicBlock:
    """``a[w], b[w]`` -> ``(a > b, a == b)``."""
    def fn(x):
        a, b = _u(x, 0, w), _u(x, w, w)
        return np.stack([a > b, a == b], axis=1)
    return LogicBlock(f"cmp{w}", 2 * w, 2, fn)


def compare_merge() -> LogicBlock:
    """``(gt_hi, eq_hi, gt_lo, eq_lo)`` -> ``(gt, eq)`` of the concatenation."""
    def fn(x):
        gt = x[:, 0] | (x[:, 1] & x[:, 2])
        return np.stack([gt, x[:, 1] & x[:, 3]], axis=1)
    return LogicBlock("cmp_merge", 4, 2, fn)


def or_reduce(k: int) -> LogicBlock:
    return LogicBlock(f"or{k}", k, 1, lambda x: x.max(axis=1, keepdims=True))


def inverter() -> LogicBlock:
    return LogicBlock("not", 1, 1, lambda x: 1 - x)


def incrementer(w: int) -> LogicBlock:
    """``x[w], cin`` -> ``s[w], cout``."""
    return LogicBlock(f"inc{w}", w + 1, w + 1, lambda x: _bits(_u(x, 0, w) + x[:, w], w + 1))


def clamp_shift() -> LogicBlock:
    """8-bit exponent difference -> 5-bit shift amount saturated at 31."""
    def fn(x):
        d = _u(x, 0, 8)
        return _bits(np.minimum(d, 31), 5)
    return LogicBlock("clamp_shift", 8, 5, fn)


def shift_decode() -> LogicBlock:
    """5-bit shift amount ``d`` -> thermometer code ``en[t] = d > t`` for t < 31."""
    def fn(x):
        d = _u(x, 0, 5)
        return np.stack([d > t for t in range(31)], axis=1)
    return LogicBlock("shift_decode", 5, 31, fn)


def sign_logic() -> LogicBlock:
    """``(swap, sign_a, sign_b, subtract)`` -> ``(result_sign, zero_sign, eff_sub)``."""
    def fn(x):
        swap, sa, sb, op = (x[:, i] for i in range(4))
        sbe = sb ^ op
        return np.stack([np.where(swap == 1, sbe, sa), sa & sbe, sa ^ sbe], axis=1)
    return LogicBlock("sign_logic", 4, 3, fn)


def carry_keep() -> LogicBlock:
    """``(cout, eff_sub)`` -> bit 27 of the sum: a subtract's carry is discarded."""
    return LogicBlock("carry_keep", 2, 1, lambda x: x[:, :1] & (1 - x[:, 1:2]))


def neg_mask(w: int) -> LogicBlock:
    """``lz[w], carry`` -> ``~lz & ~carry``: the exponent adjust operand."""
    return LogicBlock(f"neg_mask{w}", w + 1, w, lambda x: (1 - x[:, :w]) & (1 - x[:, w:w + 1]))


def round_increment() -> LogicBlock:
    """``(lsb, guard, round, sticky)`` -> round-to-nearest-even increment."""
    return LogicBlock("round_inc", 4, 1,
                      lambda x: (x[:, 1:2] & (x[:, 0:1] | x[:, 2:3] | x[:, 3:4])))


def exponent_flags() -> LogicBlock:
    """10-bit two's-complement exponent -> ``(underflow, overflow)``."""
    def fn(x):
        e = _u(x, 0, 10)
        e = np.where(e >= 512, e - 1024, e)
        return np.stack([e < 1, e > 254], axis=1)
    return LogicBlock("exp_flags", 10, 2, fn)


def pack_control() -> LogicBlock:
    """``(nonzero, underflow, overflow)`` -> ``(kill_exp, force_exp, kill_frac, uf, of)``.

    Flags only count for a nonzero result.
    """
    def fn(x):
        nz, uf, of = x[:, 0], x[:, 1] & x[:, 0], x[:, 2] & x[:, 0]
        kill_exp = (1 - nz) | uf
        return np.stack([kill_exp, of, kill_exp | of, uf, of], axis=1)
    return LogicBlock("pack_ctl", 3, 5, fn)


def exponent_select(w: int) -> LogicBlock:
    """``e[w], kill, force`` -> ``(e & ~kill) | force``."""
    def fn(x):
        return (x[:, :w] & (1 - x[:, w:w + 1])) | x[:, w + 1:w + 2]
    return LogicBlock(f"exp_sel{w}", w + 2, w, fn)


def frac_kill(w: int) -> LogicBlock:
    return LogicBlock(f"frac_kill{w}", w + 1, w, lambda x: x[:, :w] & (1 - x[:, w:w + 1]))


def subnormal_detect() -> LogicBlock:
    """``(hidden, frac_nonzero)`` -> operand was a flushed subnormal."""
    return LogicBlock("subnormal", 2, 1, lambda x: (1 - x[:, :1]) & x[:, 1:2])


# -- compiled library ------------------------------------------------------------

class BlockLibrary:
    """Compiles blocks on first use and evaluates them on their crossbar plans.

    Every evaluation names the stage and call site that uses the block; the
    resulting trace is the physical block inventory of the datapath.
    """

    _plans: dict = {}

    def __init__(self, style: Style = Style.NAND_NAND, budgets: Budgets = Budgets()):
        self.style = style
        self.budgets = budgets
        self.trace: dict[str, dict[str, str]] = {}
        self.blocks: dict[str, LogicBlock] = {}

    def plan(self, block: LogicBlock) -> MappingPlan:
        key = (block.name, self.style, self.budgets)
        plan = BlockLibrary._plans.get(key)
        if plan is None:
            plan = compile_function(block.truth_table(), self.style, self.budgets, name=block.name)
            BlockLibrary._plans[key] = plan
        return plan

    def __call__(self, stage: str, site: str, block: LogicBlock, *cols) -> np.ndarray:
        x = np.concatenate([np.asarray(c, dtype=np.uint8).reshape(len(c), -1) for c in cols], axis=1)
        if x.shape[1] != block.n_in:
            raise ValueError(f"{block.name} expects {block.n_in} inputs, got {x.shape[1]}")
        self.trace.setdefault(stage, {})[site] = block.name
        self.blocks[block.name] = block
        return self.plan(block).evaluate(x)
