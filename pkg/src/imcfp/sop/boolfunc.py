"""Truth-table Boolean functions and a small PLA reader/writer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

DC = 2


class PlaParseError(ValueError):
    pass


def input_space(n: int) -> np.ndarray:
    """All ``2**n`` assignments as an ``(2**n, n)`` bit matrix.

    Row index ``k`` assigns input 0 the most significant bit of ``k``, so a
    cube string reads left to right in the same order as the row index.
    """
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


@dataclass
class BoolFunc:
    n: int
    m: int
    table: np.ndarray  # (2**n, m) of {0, 1, DC}

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.int8).reshape(1 << self.n, self.m)
        if not np.isin(self.table, (0, 1, DC)).all():
            raise ValueError("truth table entries must be 0, 1 or don't-care")

    @classmethod
    def from_vectorized(cls, n: int, m: int, fn: Callable[[np.ndarray], np.ndarray]) -> "BoolFunc":
        """Tabulate ``fn``, which maps an ``(N, n)`` bit matrix to ``(N, m)``."""
        out = np.asarray(fn(input_space(n)), dtype=np.int8).reshape(1 << n, m)
        return cls(n, m, out)

    @classmethod
    def from_callable(cls, n: int, m: int, fn: Callable[..., tuple]) -> "BoolFunc":
        rows = [tuple(fn(*bits)) for bits in input_space(n).tolist()]
        return cls(n, m, np.array(rows, dtype=np.int8))

    def complement(self) -> "BoolFunc":
        t = self.table.copy()
        care = t != DC
        t[care] = 1 - t[care]
        return BoolFunc(self.n, self.m, t)

    def output(self, j: int) -> "BoolFunc":
        return BoolFunc(self.n, 1, self.table[:, j:j + 1])


def parse_pla(text: str) -> BoolFunc:
    """Parse espresso-style PLA text (``.i``, ``.o``, cube lines, ``.e``).

    Output characters: ``1`` puts the cube in the on-set, ``-``/``~`` in the
    don't-care set, ``0`` leaves it alone.  Rows not mentioned are 0.
    """
    n = m = None
    cubes = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("."):
            key, *rest = line.split()
            try:
                if key == ".i":
                    n = int(rest[0])
                elif key == ".o":
                    m = int(rest[0])
                elif key == ".e" or key == ".end":
                    break
            except (IndexError, ValueError) as exc:
                raise PlaParseError(f"line {lineno}: bad directive {line!r}") from exc
            continue
        parts = line.split()
        if len(parts) != 2:
            raise PlaParseError(f"line {lineno}: expected '<inputs> <outputs>', got {line!r}")
        cubes.append((lineno, parts[0], parts[1]))
    if n is None or m is None:
        raise PlaParseError("missing .i or .o directive")
    if n > 20:
        raise PlaParseError(f".i {n} too large for a truth-table function")
    table = np.zeros((1 << n, m), dtype=np.int8)
    space = input_space(n)
    for lineno, ins, outs in cubes:
        if len(ins) != n or set(ins) - set("01-"):
            raise PlaParseError(f"line {lineno}: bad input cube {ins!r}")
        if len(outs) != m or set(outs) - set("01-~"):
            raise PlaParseError(f"line {lineno}: bad output part {outs!r}")
        sel = np.ones(1 << n, dtype=bool)
        for i, ch in enumerate(ins):
            if ch != "-":
                sel &= space[:, i] == int(ch)
        for j, ch in enumerate(outs):
            if ch == "1":
                table[sel, j] = 1
            elif ch in "-~":
                table[sel & (table[:, j] == 0), j] = DC
    return BoolFunc(n, m, table)


def format_pla(f: BoolFunc) -> str:
    """Minterm-per-line PLA text for ``f`` (rows whose outputs are all 0 omitted)."""
    lines = [f".i {f.n}", f".o {f.m}"]
    space = input_space(f.n)
    for k in range(1 << f.n):
        row = f.table[k]
        if not row.any():
            continue
        ins = "".join(map(str, space[k]))
        outs = "".join("-" if v == DC else str(int(v)) for v in row)
        lines.append(f"{ins} {outs}")
    lines.append(".e")
    return "\n".join(lines) + "\n"
