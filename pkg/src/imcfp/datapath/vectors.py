"""Test-vector files: ``op a_hex b_hex [expected_hex]`` per line."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..sop import Style
from . import fp_add_batch
from .fp32 import Flags, Rounding


class VectorParseError(ValueError):
    pass


@dataclass
class Vector:
    op: str
    a: int
    b: int
    expected: Optional[int] = None


@dataclass
class VectorResult:
    vector: Vector
    result: int
    flags: Flags

    @property
    def mismatch(self) -> bool:
        return self.vector.expected is not None and self.vector.expected != self.result

    def line(self) -> str:
        v = self.vector
        exp = "" if v.expected is None else f" {v.expected:08x}"
        return f"{v.op} {v.a:08x} {v.b:08x}{exp} {self.result:08x} {self.flags}"


def parse_vectors(text: str) -> list[Vector]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4) or parts[0] not in ("add", "sub"):
            raise VectorParseError(f"line {lineno}: expected 'op a_hex b_hex [expected_hex]'")
        try:
            nums = [int(p, 16) for p in parts[1:]]
        except ValueError as exc:
            raise VectorParseError(f"line {lineno}: bad hex value") from exc
        if any(not 0 <= v < 1 << 32 for v in nums):
            raise VectorParseError(f"line {lineno}: value outside 32 bits")
        out.append(Vector(parts[0], nums[0], nums[1], nums[2] if len(nums) == 3 else None))
    return out


def run_vectors(vectors: list[Vector], mode: Rounding = Rounding.RNE,
                fidelity: str = "functional", style: Style = Style.NAND_NAND) -> list[VectorResult]:
    if not vectors:
        return []
    words, flags = fp_add_batch([v.a for v in vectors], [v.b for v in vectors],
                                np.array([v.op == "sub" for v in vectors]), mode, fidelity, style)
    return [VectorResult(v, int(w), Flags.from_int(int(f))) for v, w, f in zip(vectors, words, flags)]


def format_results(results: list[VectorResult]) -> str:
    return "".join(r.line() + "\n" for r in results)
