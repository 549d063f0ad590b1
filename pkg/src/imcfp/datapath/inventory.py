"""Physical array inventory: block arrays packed into fixed-size crossbars.

Each stage owns arrays of one size per logic level.  Block arrays are placed
block-diagonally (own wordlines, own bitlines) and a new physical array is
opened when the current one is full.  Blocks larger than the stage size get
a dedicated oversized array and a warning.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..crossbar import CrossbarArray, hrs_fraction, run_array
from .fp32 import Rounding
from .functional import (EXPONENT_INCDEC, EXPONENT_SUBTRACTION, FRACTION_ADDITION, LEFT_SHIFT,
                         RIGHT_SHIFT, ROUNDING)

# (rows, cols) of the first- and second-level arrays and how many of each the
# reference design lists; rounding reuses the exponent inc/dec geometry
STAGE_ARRAYS = {
    EXPONENT_SUBTRACTION: (((32, 32), 1), ((32, 64), 1)),
    RIGHT_SHIFT: (((8, 16), 1), ((8, 16), 0)),
    FRACTION_ADDITION: (((64, 64), 2), ((64, 64), 2)),
    LEFT_SHIFT: (((32, 64), 1), ((32, 64), 0)),
    ROUNDING: (((32, 32), 0), ((32, 64), 0)),
    EXPONENT_INCDEC: (((32, 32), 1), ((32, 64), 1)),
}


@dataclass
class Placement:
    site: str
    block: str
    row: int
    col: int
    array: CrossbarArray


@dataclass
class PhysicalArray:
    stage: str
    level: int
    rows: int
    cols: int
    placements: list = field(default_factory=list)
    oversized: bool = False
    _r: int = 0
    _c: int = 0

    def fits(self, a: CrossbarArray) -> bool:
        return self._r + a.rows <= self.rows and self._c + a.cols <= self.cols

    def add(self, site: str, block: str, a: CrossbarArray) -> Placement:
        if self.placements and (a.plane, a.polarity) != (self.placements[0].array.plane,
                                                          self.placements[0].array.polarity):
            raise ValueError("one physical array cannot mix plane kinds")
        p = Placement(site, block, self._r, self._c, a)
        self.placements.append(p)
        self._r += a.rows
        self._c += a.cols
        return p

    def crossbar(self) -> CrossbarArray:
        """The packed array; its inputs are the placed blocks' inputs in order."""
        first = self.placements[0].array
        out = CrossbarArray(self.rows, self.cols, first.plane, first.polarity)
        pairing = []
        for p in self.placements:
            out.program[p.row:p.row + p.array.rows, p.col:p.col + p.array.cols] = p.array.program
            pairing += [(t + p.row, None if c is None else c + p.row) for t, c in p.array.pairing]
        out.pairing = pairing
        return out

    @property
    def used_rows(self) -> int:
        return self._r

    @property
    def used_cols(self) -> int:
        return self._c


def run_packed(phys: PhysicalArray, block_inputs: list) -> list[np.ndarray]:
    """Evaluate the packed array and slice out each placed block's outputs."""
    x = np.concatenate([np.asarray(b, dtype=np.uint8) for b in block_inputs], axis=-1)
    out = run_array(phys.crossbar(), x)
    return [out[..., p.col:p.col + p.array.cols] for p in phys.placements]


@dataclass
class Inventory:
    arrays: list
    warnings: list

    def stage_arrays(self, stage: str, level: Optional[int] = None) -> list[PhysicalArray]:
        return [a for a in self.arrays if a.stage == stage and (level is None or a.level == level)]

    def hrs_fraction(self) -> float:
        cells = sum(a.rows * a.cols for a in self.arrays)
        lrs = sum(int(p.array.program.sum()) for a in self.arrays for p in a.placements)
        return 1.0 - lrs / cells

    def rows(self) -> list[tuple]:
        """``(stage, level, size, arrays, reference count, HRS fraction)`` per stage level."""
        out = []
        for stage, levels in STAGE_ARRAYS.items():
            for level, ((r, c), ref) in enumerate(levels, 1):
                arrs = self.stage_arrays(stage, level)
                if not arrs:
                    continue
                frac = float(np.mean([hrs_fraction(a.crossbar().program) for a in arrs]))
                out.append((stage, level, f"{r}x{c}", len(arrs), ref, frac))
        return out

    def table(self) -> str:
        lines = [f"{'stage':<22}{'level':>6}{'size':>8}{'arrays':>8}{'ref':>5}{'HRS':>8}"]
        for stage, level, size, n, ref, frac in self.rows():
            lines.append(f"{stage:<22}{level:>6}{size:>8}{n:>8}{ref:>5}{frac:>8.3f}")
        lines.append(f"overall HRS fraction {self.hrs_fraction():.4f}")
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines)


def block_arrays(dp) -> list[tuple[str, str, str, int, CrossbarArray]]:
    """``(stage, site, block, level, array)`` for every block instance of a mapped datapath."""
    out = []
    for stage, sites in dp.inventory().items():
        for site, name in sites.items():
            plan = dp.lib.plan(dp.lib.blocks[name])
            for k, a in enumerate(plan.first):
                out.append((stage, f"{site}/L1.{k}", name, 1, a))
            out.append((stage, f"{site}/L2", name, 2, plan.second))
    return out


def pack_inventory(dp) -> Inventory:
    arrays, oversize = [], {}
    current: dict = {}
    for stage, site, name, level, a in block_arrays(dp):
        (r, c), _ = STAGE_ARRAYS[stage][level - 1]
        if a.rows > r or a.cols > c:
            big = PhysicalArray(stage, level, max(r, a.rows), max(c, a.cols), oversized=True)
            big.add(site, name, a)
            arrays.append(big)
            key = f"{stage} L{level}: {name} is {a.rows}x{a.cols}, exceeds {r}x{c}"
            oversize[key] = oversize.get(key, 0) + 1
            continue
        phys = current.get((stage, level))
        if phys is None or not phys.fits(a):
            phys = PhysicalArray(stage, level, r, c)
            arrays.append(phys)
            current[(stage, level)] = phys
        phys.add(site, name, a)
    warnings = [f"{k} ({n} instances)" for k, n in oversize.items()]
    for stage, levels in STAGE_ARRAYS.items():
        for level, (_, ref) in enumerate(levels, 1):
            n = sum(1 for a in arrays if a.stage == stage and a.level == level)
            if ref and n > ref:
                warnings.append(f"{stage} L{level}: {n} arrays against {ref} in the reference design")
    return Inventory(arrays, warnings)


def tight_hrs_fraction(dp) -> float:
    """HRS share counting only the cells each block array actually spans."""
    cells = lrs = 0
    for *_, a in block_arrays(dp):
        cells += a.program.size
        lrs += int(a.program.sum())
    return 1.0 - lrs / cells


def datapath_inventory(mode: Rounding = Rounding.TRUNCATE, style=None) -> Inventory:
    from . import mapped_datapath
    from ..sop import Style
    return pack_inventory(mapped_datapath(mode, style or Style.NAND_NAND))
