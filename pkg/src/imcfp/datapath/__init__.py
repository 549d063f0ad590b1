"""Single-precision add/sub in two fidelities plus pipeline scheduling.

``functional`` runs the scalar golden model; ``mapped`` evaluates every
stage's logic on compiled crossbar arrays.  Inf/NaN operands never reach the
mapped arrays: both fidelities answer them in the same wrapper.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from ..sop import Style
from .fp32 import (BIAS, CANONICAL_NAN, Flags, FpClass, Rounding, Unpacked, align, bits_to_float,
                   exp_adjust, exponent_diff, float_to_bits, normalize, pack, round_sig,
                   significand_addsub, special_case, unpack)
from .functional import FunctionalDatapath, stage_names
from .mapped import MappedDatapath
from .pipeline import Pipeline, PipelineRun

FIDELITIES = ("functional", "mapped")


@lru_cache(maxsize=None)
def functional_datapath(mode: Rounding = Rounding.RNE, block_width: int = 4) -> FunctionalDatapath:
    return FunctionalDatapath(mode, block_width)


@lru_cache(maxsize=None)
def mapped_datapath(mode: Rounding = Rounding.RNE, style: Style = Style.NAND_NAND,
                    block_width: int = 4) -> MappedDatapath:
    return MappedDatapath(mode, style, block_width)


def _is_special(word: int) -> bool:
    return (word >> 23 & 0xFF) == 0xFF


def fp_add(a: int, b: int, op: str = "add", mode: Rounding = Rounding.RNE,
           fidelity: str = "functional", style: Style = Style.NAND_NAND) -> tuple[int, Flags]:
    """Add or subtract two binary32 bit patterns."""
    words, flags = fp_add_batch([a], [b], [op == "sub"], mode, fidelity, style)
    return int(words[0]), Flags.from_int(int(flags[0]))


def fp_add_batch(a: Sequence[int], b: Sequence[int], subtract, mode: Rounding = Rounding.RNE,
                 fidelity: str = "functional", style: Style = Style.NAND_NAND
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Vector form of :func:`fp_add`; returns ``(words, flag_ints)``."""
    a = np.asarray(a, dtype=np.uint64).reshape(-1)
    b = np.broadcast_to(np.asarray(b, dtype=np.uint64), a.shape)
    sub = np.broadcast_to(np.asarray(subtract, dtype=bool), a.shape)
    if fidelity == "functional":
        dp = functional_datapath(mode)
        out = [dp.run(int(x), int(y), bool(s)) for x, y, s in zip(a, b, sub)]
        return (np.array([r for r, _ in out], dtype=np.uint64),
                np.array([f.as_int() for _, f in out], dtype=np.int64))
    if fidelity != "mapped":
        raise ValueError(f"unknown fidelity {fidelity!r}")
    words = np.zeros(a.shape, dtype=np.uint64)
    flags = np.zeros(a.shape, dtype=np.int64)
    special = np.array([_is_special(int(x)) or _is_special(int(y)) for x, y in zip(a, b)],
                       dtype=bool)
    for k in np.flatnonzero(special):
        w, f = special_case(unpack(int(a[k])), unpack(int(b[k])), bool(sub[k]))
        words[k], flags[k] = w, f.as_int()
    finite = ~special
    if finite.any():
        w, f = mapped_datapath(mode, style).run(a[finite], b[finite], sub[finite])
        words[finite], flags[finite] = w, f
    return words, flags


def pipeline_run(stream: Iterable[tuple[int, int, str]], mitigated: Iterable[str] = (),
                 mode: Rounding = Rounding.RNE, fidelity: str = "functional",
                 style: Style = Style.NAND_NAND) -> PipelineRun:
    """Push ``(a, b, op)`` operations through the staged datapath.

    ``mitigated`` names the stages whose arrays run a two-cycle fault
    mitigation.  ``outputs`` of the returned run are ``(word, Flags)`` tuples.
    """
    if fidelity == "functional":
        dp = functional_datapath(mode)
        stages = dp.stages

        def start(a, b, sub):
            return dp.start(a, b, sub)

        def finish(st):
            return st["result"], st["flags"]
    else:
        dp = mapped_datapath(mode, style)

        def guard(fn):
            def stage(st):
                return st if "special" in st else fn(st)
            return stage

        stages = [(name, guard(fn)) for name, fn in dp.stages]

        def start(a, b, sub):
            if _is_special(a) or _is_special(b):
                return {"special": special_case(unpack(a), unpack(b), sub)}
            return dp.start([a], [b], [sub])

        def finish(st):
            if "special" in st:
                return st["special"]
            return int(st["result"][0]), Flags.from_int(int(st["flags"][0]))

    pipe = Pipeline.with_mitigation(stages, mitigated)
    run = pipe.run(start(int(a), int(b), op == "sub") for a, b, op in stream)
    run.outputs = [finish(st) for st in run.outputs]
    return run


__all__ = [
    "BIAS", "CANONICAL_NAN", "FIDELITIES", "Flags", "FpClass", "Rounding", "Unpacked", "align",
    "bits_to_float", "exp_adjust", "exponent_diff", "float_to_bits", "normalize", "pack",
    "round_sig", "significand_addsub", "special_case", "unpack", "FunctionalDatapath",
    "MappedDatapath", "Pipeline", "PipelineRun", "fp_add", "fp_add_batch", "pipeline_run",
    "stage_names", "functional_datapath", "mapped_datapath",
]
