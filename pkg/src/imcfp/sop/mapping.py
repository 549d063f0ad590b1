"""Two-level NAND-NAND / NOR-NOR mapping of cube covers onto crossbar arrays."""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import crossbar as xb
from ..crossbar import CrossbarArray, PlaneKind, SaPolarity
from .boolfunc import DC, BoolFunc, input_space
from .qm import CapacityError, CubeCover, minimize

MAX_VERIFY_INPUTS = 20


class Style(enum.Enum):
    NAND_NAND = "nand-nand"
    NOR_NOR = "nor-nor"


@dataclass(frozen=True)
class Budgets:
    first: tuple[int, int] = (64, 64)
    second: tuple[int, int] = (64, 64)
    allow_partition: bool = True


@dataclass
class CapacityEntry:
    name: str
    rows: int
    cols: int
    budget_rows: int
    budget_cols: int

    @property
    def ok(self) -> bool:
        return self.rows <= self.budget_rows and self.cols <= self.budget_cols


@dataclass
class MappingPlan:
    """First-level term arrays feeding one second-level output array.

    Term columns of the first-level arrays are concatenated in order and
    become the wordlines of the second-level array.
    """

    style: Style
    n_inputs: int
    n_outputs: int
    first: list[CrossbarArray]
    second: CrossbarArray
    terms: list[str] = field(default_factory=list)
    capacity: list[CapacityEntry] = field(default_factory=list)
    name: str = "block"

    @property
    def warnings(self) -> list[str]:
        return [f"{e.name}: {e.rows}x{e.cols} exceeds budget {e.budget_rows}x{e.budget_cols}"
                for e in self.capacity if not e.ok]

    def arrays(self) -> list[CrossbarArray]:
        return [*self.first, self.second]

    def evaluate(self, x, first_effective=None, second_effective=None) -> np.ndarray:
        x = np.asarray(x, dtype=np.uint8)
        effs = first_effective or [None] * len(self.first)
        terms = np.concatenate([xb.run_array(a, x, e) for a, e in zip(self.first, effs)], axis=-1)
        return xb.run_array(self.second, terms, second_effective)


def partition(cover: CubeCover, max_cols: int) -> list[CubeCover]:
    if max_cols < 1:
        raise ValueError("max_cols must be >= 1")
    parts = []
    for lo in range(0, max(len(cover), 1), max_cols):
        parts.append(CubeCover(cover.n, cover.m, cover.cubes[lo:lo + max_cols],
                               cover.outputs[lo:lo + max_cols]))
    return parts


def _literal_rows(cube: str, style: Style) -> list[int]:
    # NAND-NAND ties a literal to its own wordline; NOR-NOR to the opposite one
    rows = []
    for i, ch in enumerate(cube):
        if ch == "-":
            continue
        positive = ch == "1"
        if style is Style.NOR_NOR:
            positive = not positive
        rows.append(2 * i if positive else 2 * i + 1)
    return rows


def map_cover(cover: CubeCover, style: Style, budgets: Budgets = Budgets(),
              name: str = "block") -> MappingPlan:
    """Lay out an already-minimized cover.

    For NOR-NOR the cover must be of the complemented function; see
    :func:`compile_function`.
    """
    plane = PlaneKind.AND if style is Style.NAND_NAND else PlaneKind.OR
    rows1 = 2 * cover.n
    max_cols = budgets.first[1]
    if len(cover) > max_cols and not budgets.allow_partition:
        raise CapacityError(f"{len(cover)} terms exceed {max_cols} columns and partitioning is off")
    parts = partition(cover, max_cols)
    first = []
    capacity = []
    for p, part in enumerate(parts):
        arr = CrossbarArray(rows1, len(part), plane, SaPolarity.INVERTING,
                            pairing=xb.complement_pairing(cover.n))
        for col, cube in enumerate(part.cubes):
            arr.program[_literal_rows(cube, style), col] = True
        first.append(arr)
        capacity.append(CapacityEntry(f"{name} L1[{p}]", rows1, len(part), *budgets.first))
    n_terms = len(cover)
    second = CrossbarArray(n_terms, cover.m, plane, SaPolarity.INVERTING,
                           pairing=xb.single_pairing(n_terms))
    for k, outs in enumerate(cover.outputs):
        for j in outs:
            second.program[k, j] = True
    capacity.append(CapacityEntry(f"{name} L2", n_terms, cover.m, *budgets.second))
    return MappingPlan(style, cover.n, cover.m, first, second, list(cover.cubes), capacity, name)


def map_two_level(cover: CubeCover, style: Style = Style.NAND_NAND,
                  budgets: Budgets = Budgets(), name: str = "block") -> MappingPlan:
    return map_cover(cover, style, budgets, name)


def compile_function(f: BoolFunc, style: Style = Style.NAND_NAND,
                     budgets: Budgets = Budgets(), name: str = "block") -> MappingPlan:
    """Minimize and map ``f``; NOR-NOR realizes the product-of-sums of ``f``."""
    cover = minimize(f if style is Style.NAND_NAND else f.complement())
    return map_cover(cover, style, budgets, name)


def replicate_slices(plan: MappingPlan, n_slices: int, max_cols: Optional[int] = None) -> MappingPlan:
    """Block-diagonal copies of a single-array plan, one per bit slice.

    Slice ``k`` owns wordline block ``k`` of every array, so the program is
    column-periodic with period equal to the block's column count.
    """
    if len(plan.first) != 1:
        raise ValueError("slice replication needs a plan with a single first-level array")
    if n_slices < 1:
        raise ValueError("n_slices must be >= 1")
    blk = plan.first[0]
    if max_cols is not None and n_slices * blk.cols > max_cols:
        raise CapacityError(f"{n_slices} slices x {blk.cols} columns exceed {max_cols} columns")

    def tile(arr: CrossbarArray) -> CrossbarArray:
        out = CrossbarArray(arr.rows * n_slices, arr.cols * n_slices, arr.plane, arr.polarity)
        pairing = []
        for k in range(n_slices):
            out.program[k * arr.rows:(k + 1) * arr.rows, k * arr.cols:(k + 1) * arr.cols] = arr.program
            pairing += [(t + k * arr.rows, None if c is None else c + k * arr.rows)
                        for t, c in arr.pairing]
        out.pairing = pairing
        return out

    first = tile(blk)
    second = tile(plan.second)
    # second-level rows follow the first level's slice-major term order
    terms = [t for _ in range(n_slices) for t in plan.terms]
    cap = [CapacityEntry(f"{plan.name}x{n_slices} L1", first.rows, first.cols, first.rows,
                         max_cols or first.cols),
           CapacityEntry(f"{plan.name}x{n_slices} L2", second.rows, second.cols,
                         second.rows, second.cols)]
    return MappingPlan(plan.style, plan.n_inputs * n_slices, plan.n_outputs * n_slices,
                       [first], second, terms, cap, f"{plan.name}x{n_slices}")


def place(array: CrossbarArray, rows: int, cols: int) -> CrossbarArray:
    """Embed ``array`` in the top-left corner of a larger, otherwise all-HRS array."""
    if rows < array.rows or cols < array.cols:
        raise CapacityError(f"{array.rows}x{array.cols} does not fit in {rows}x{cols}")
    out = CrossbarArray(rows, cols, array.plane, array.polarity, pairing=list(array.pairing))
    out.program[:array.rows, :array.cols] = array.program
    return out


@dataclass
class VerifyResult:
    ok: bool
    counterexample: Optional[tuple] = None  # (input bits, expected, got)

    def __bool__(self):
        return self.ok


def verify_mapping(plan: MappingPlan, f: BoolFunc) -> VerifyResult:
    """Exhaustively run the crossbar plan and compare against ``f`` on all care rows."""
    if f.n > MAX_VERIFY_INPUTS:
        raise CapacityError(f"{f.n} inputs is too many for exhaustive verification")
    x = input_space(f.n)
    got = plan.evaluate(x)
    care = f.table != DC
    bad = np.flatnonzero(((got != f.table) & care).any(axis=1))
    if bad.size:
        k = int(bad[0])
        return VerifyResult(False, (tuple(x[k].tolist()), tuple(f.table[k].tolist()),
                                    tuple(got[k].tolist())))
    return VerifyResult(True)


# -- plan files --------------------------------------------------------------

def save_plans(plans: dict[str, list[MappingPlan]], directory: str) -> str:
    """Write every array as ``.xbar`` text plus an ``index.txt`` naming them by stage."""
    os.makedirs(directory, exist_ok=True)
    index = []
    for stage, stage_plans in plans.items():
        for plan in stage_plans:
            for level, arrays in (("L1", plan.first), ("L2", [plan.second])):
                for p, arr in enumerate(arrays):
                    fname = f"{_slug(stage)}__{_slug(plan.name)}__{level}_{p}.xbar"
                    with open(os.path.join(directory, fname), "w", newline="\n") as fh:
                        fh.write(xb.dumps(arr))
                    index.append(f"{stage}\t{plan.name}\t{plan.style.value}\t{level}\t{p}\t{fname}")
    path = os.path.join(directory, "index.txt")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(index) + "\n")
    return path


def load_plans(directory: str) -> dict[str, list[MappingPlan]]:
    with open(os.path.join(directory, "index.txt")) as fh:
        rows = [ln.rstrip("\n").split("\t") for ln in fh if ln.strip()]
    grouped: dict[tuple, dict] = {}
    for stage, name, style, level, p, fname in rows:
        with open(os.path.join(directory, fname)) as fh:
            arr = xb.loads(fh.read())
        g = grouped.setdefault((stage, name), {"style": Style(style), "L1": {}, "L2": None})
        if level == "L1":
            g["L1"][int(p)] = arr
        else:
            g["L2"] = arr
    out: dict[str, list[MappingPlan]] = {}
    for (stage, name), g in grouped.items():
        first = [g["L1"][k] for k in sorted(g["L1"])]
        second = g["L2"]
        plan = MappingPlan(g["style"], first[0].n_inputs, second.cols, first, second, name=name)
        out.setdefault(stage, []).append(plan)
    return out


def _slug(s: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in s).strip("_")
