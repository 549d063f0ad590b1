"""Two-cycle fault mitigation: forcing (FTV/FTG) and shift-at-the-output (SATO).

Both schemes leave fault-free bitlines to the first cycle and spend a second
cycle on the faulty ones.  Forcing drives every fault-hosting wordline to the
plane's neutral level so the stray LRS cells drop out of the wired function.
SATO recomputes a faulty bitline set on its higher neighbour by feeding that
neighbour's slice wordlines with the faulty slice's inputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..crossbar import (CrossbarArray, PlaneKind, SenseLatchBank, drive_inputs, evaluate,
                        latch_shift, run_array, sense)
from .diagnosis import DiagnosisResult
from .model import FaultMap, effective_matrix


class MitigationError(ValueError):
    """Applying a plan that cannot produce correct outputs."""


class SatoPreconditionError(MitigationError):
    """The program is not slice-periodic, so neighbour remapping is meaningless."""


@dataclass(frozen=True)
class SliceLayout:
    """``count`` bit slices, each ``width`` bitlines wide and owning ``rows`` wordlines."""

    width: int
    rows: int
    count: int

    def set_of(self, col: int) -> Optional[int]:
        k = col // self.width
        return k if k < self.count else None

    def columns(self, k: int) -> range:
        return range(k * self.width, (k + 1) * self.width)

    def wordlines(self, k: int) -> range:
        return range(k * self.rows, (k + 1) * self.rows)

    @property
    def n_cols(self) -> int:
        return self.width * self.count

    @classmethod
    def for_array(cls, array: CrossbarArray, width: int) -> "SliceLayout":
        if width < 1 or array.cols < width:
            raise SatoPreconditionError(f"slice width {width} does not fit {array.cols} bitlines")
        count = array.cols // width
        return cls(width, array.rows // count, count)


@dataclass
class MitigationPlan:
    kind: str                        # "FTV", "FTG" or "SATO"
    cycle1: tuple                    # bitlines whose cycle-1 value is kept
    cycle2: tuple                    # bitlines sensed in cycle 2
    live: tuple                      # bitlines whose outputs are consumed
    fixable: bool = True
    reason: str = ""
    forced_wordlines: tuple = ()
    force_level: Optional[int] = None
    layout: Optional[SliceLayout] = None
    remap: dict = field(default_factory=dict)      # faulty set -> host set
    shifts: list = field(default_factory=list)     # (lo, hi, places) toward lower index
    unfixable: dict = field(default_factory=dict)  # bitline or set -> conflicting wordlines

    @property
    def cycles(self) -> int:
        return 2 if self.cycle2 else 1

    @property
    def latch_shifts(self) -> int:
        return sum(k for _, _, k in self.shifts)


def _live_cols(array: CrossbarArray, live) -> tuple:
    if live is None:
        return tuple(range(array.cols))
    live = np.asarray(live)
    if live.dtype == bool:
        return tuple(np.flatnonzero(live).tolist())
    return tuple(sorted(int(c) for c in live))


# -- forcing -----------------------------------------------------------------

def _plan_forcing(array: CrossbarArray, diagnosis: DiagnosisResult, kind: str, live) -> MitigationPlan:
    live = _live_cols(array, live)
    faulty = tuple(c for c in live if diagnosis.faulty_bitlines[c])
    located = [(r, c) for r, c in diagnosis.located if c in set(faulty)]
    forced = tuple(sorted({r for r, _ in located}))
    conflicts = {}
    for b in faulty:
        clash = sorted(set(np.flatnonzero(array.program[:, b]).tolist()) & set(forced))
        if clash:
            conflicts[b] = tuple(clash)
    reason = ""
    if conflicts:
        b = min(conflicts)
        reason = f"bitline {b} has forced wordline(s) {list(conflicts[b])} among its operands"
    return MitigationPlan(kind, tuple(c for c in live if c not in set(faulty)), faulty, live,
                          not conflicts, reason, forced, array.plane.neutral,
                          unfixable=conflicts)


def plan_ftv(array: CrossbarArray, diagnosis: DiagnosisResult, live=None) -> MitigationPlan:
    """Force-to-VDD plan for an AND plane."""
    if array.plane is not PlaneKind.AND:
        raise MitigationError("FTV applies to AND planes; use plan_ftg for OR planes")
    return _plan_forcing(array, diagnosis, "FTV", live)


def plan_ftg(array: CrossbarArray, diagnosis: DiagnosisResult, live=None) -> MitigationPlan:
    """Force-to-ground plan for an OR plane."""
    if array.plane is not PlaneKind.OR:
        raise MitigationError("FTG applies to OR planes; use plan_ftv for AND planes")
    return _plan_forcing(array, diagnosis, "FTG", live)


def plan_forcing(array: CrossbarArray, diagnosis: DiagnosisResult, live=None) -> MitigationPlan:
    """FTV or FTG, whichever matches the plane."""
    fn = plan_ftv if array.plane is PlaneKind.AND else plan_ftg
    return fn(array, diagnosis, live)


def _mask(n: int, cols) -> np.ndarray:
    m = np.zeros(n, dtype=bool)
    m[list(cols)] = True
    return m


def forced_levels(plan: MitigationPlan, levels: np.ndarray) -> np.ndarray:
    out = np.array(levels, copy=True)
    if plan.forced_wordlines:
        out[..., list(plan.forced_wordlines)] = plan.force_level
    return out


def apply_ftv(array: CrossbarArray, faults: FaultMap, plan: MitigationPlan, inputs,
              check: bool = True) -> np.ndarray:
    """Merged latch contents after both cycles, shape ``(..., cols)``.

    Bitlines outside ``plan.live`` read 0.  ``check=False`` runs an unfixable
    plan anyway, which is how unfixability witnesses are searched for.
    """
    if plan.kind not in ("FTV", "FTG"):
        raise MitigationError(f"not a forcing plan: {plan.kind}")
    if check and not plan.fixable:
        raise MitigationError(f"plan is unfixable: {plan.reason}")
    eff = effective_matrix(array.program, faults)
    levels = drive_inputs(array, inputs)
    bank = SenseLatchBank.zeros(array.cols, levels.shape[:-1])
    bank = sense(evaluate(array, levels, eff), array.polarity, _mask(array.cols, plan.cycle1), bank)
    if plan.cycle2:
        wired = evaluate(array, forced_levels(plan, levels), eff)
        bank = sense(wired, array.polarity, _mask(array.cols, plan.cycle2), bank)
    return bank.bits


apply_ftg = apply_ftv


# -- SATO ----------------------------------------------------------------------

def slice_periodicity(program, layout: Union[SliceLayout, int]) -> tuple[bool, Optional[int]]:
    """Check that every set is the previous one moved down by one slice.

    Returns ``(True, None)`` or ``(False, first offending column)``.  Each
    sliced column may only use its own slice's wordlines, otherwise the
    one-slice input remap would not reproduce its function.
    """
    program = np.asarray(program, dtype=bool)
    if isinstance(layout, int):
        count = program.shape[1] // layout
        layout = SliceLayout(layout, program.shape[0] // max(count, 1), count)
    if layout.count < 1 or layout.rows < 1 or layout.rows * layout.count > program.shape[0] \
            or layout.n_cols > program.shape[1]:
        return False, 0
    for k in range(layout.count):
        own = np.zeros(program.shape[0], dtype=bool)
        own[list(layout.wordlines(k))] = True
        for j in layout.columns(k):
            if program[~own, j].any():
                return False, j
            if k and not np.array_equal(program[own, j],
                                        program[list(layout.wordlines(k - 1)), j - layout.width]):
                return False, j
    return True, None


def plan_sato(array: CrossbarArray, diagnosis: DiagnosisResult,
              layout: Union[SliceLayout, int] = 3, live=None) -> MitigationPlan:
    """Remap each faulty set ``k`` onto set ``k + 1``."""
    if isinstance(layout, int):
        layout = SliceLayout.for_array(array, layout)
    ok, col = slice_periodicity(array.program, layout)
    if not ok:
        raise SatoPreconditionError(f"program is not slice-periodic (column {col})")
    live = _live_cols(array, live)
    faulty_cols = [c for c in live if diagnosis.faulty_bitlines[c]]
    outside = [c for c in faulty_cols if layout.set_of(c) is None]
    faulty_sets = sorted({layout.set_of(c) for c in faulty_cols} - {None})
    remap, unfixable = {}, {}
    for k in faulty_sets:
        if k + 1 >= layout.count:
            unfixable[k] = "highest set has no neighbour"
        elif k + 1 in faulty_sets:
            unfixable[k] = f"neighbour set {k + 1} is faulty too"
        else:
            remap[k] = k + 1
    for c in outside:
        unfixable[f"bitline {c}"] = "faulty bitline outside the sliced region"
    bad = {c for k in faulty_sets for c in layout.columns(k)} | set(outside)
    cycle2 = tuple(c for k in sorted(remap) for c in layout.columns(remap[k]))
    shifts = [(k * layout.width, (k + 2) * layout.width, layout.width) for k in sorted(remap)]
    reason = "" if not unfixable else "; ".join(f"set {k}: {v}" for k, v in unfixable.items())
    return MitigationPlan("SATO", tuple(c for c in live if c not in bad), cycle2, live,
                          not unfixable, reason, layout=layout, remap=remap, shifts=shifts,
                          unfixable=unfixable)


def remapped_levels(plan: MitigationPlan, levels: np.ndarray) -> np.ndarray:
    """Cycle-2 wordline levels: each host slice carries its guest slice's inputs."""
    out = np.array(levels, copy=True)
    lay = plan.layout
    for k, host in plan.remap.items():
        out[..., list(lay.wordlines(host))] = levels[..., list(lay.wordlines(k))]
    return out


def readout_order(plan: MitigationPlan, n_cols: int) -> np.ndarray:
    """Latch index holding each bitline's result after the SATO schedule.

    The shift parks set ``k+1``'s cycle-1 value in latch set ``k`` and cycle 2
    writes set ``k``'s value into latch set ``k+1``, so the pair is swapped.
    """
    order = np.arange(n_cols)
    lay = plan.layout
    for k, host in plan.remap.items():
        a, b = list(lay.columns(k)), list(lay.columns(host))
        order[a], order[b] = b, a
    return order


def apply_sato(array: CrossbarArray, faults: FaultMap, plan: MitigationPlan, inputs,
               check: bool = True) -> np.ndarray:
    """Merged outputs after cycle 1, the latch shifts and cycle 2."""
    if plan.kind != "SATO":
        raise MitigationError(f"not a SATO plan: {plan.kind}")
    if check and not plan.fixable:
        raise MitigationError(f"plan is unfixable: {plan.reason}")
    eff = effective_matrix(array.program, faults)
    levels = drive_inputs(array, inputs)
    live = _mask(array.cols, plan.live)
    bank = SenseLatchBank.zeros(array.cols, levels.shape[:-1])
    bank = sense(evaluate(array, levels, eff), array.polarity, live, bank)
    for lo, hi, places in plan.shifts:
        for _ in range(places):
            bank = latch_shift(bank, 1, toward_higher=False, span=(lo, hi))
    if plan.cycle2:
        wired = evaluate(array, remapped_levels(plan, levels), eff)
        bank = sense(wired, array.polarity, _mask(array.cols, plan.cycle2), bank)
    out = bank.bits[..., readout_order(plan, array.cols)]
    return np.where(live, out, 0).astype(np.uint8)


def apply_plan(array: CrossbarArray, faults: FaultMap, plan: MitigationPlan, inputs,
               check: bool = True) -> np.ndarray:
    fn = apply_sato if plan.kind == "SATO" else apply_ftv
    return fn(array, faults, plan, inputs, check)


def golden_outputs(array: CrossbarArray, inputs, live=None) -> np.ndarray:
    """Fault-free single-cycle outputs, zeroed outside the live bitlines."""
    out = run_array(array, inputs)
    return np.where(_mask(array.cols, _live_cols(array, live)), out, 0).astype(np.uint8)


def _all_inputs(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)


def unfixable_witness(array: CrossbarArray, faults: FaultMap, plan: MitigationPlan,
                      max_inputs: int = 16) -> Optional[tuple]:
    """Search all inputs for evidence that an unfixable verdict is real.

    For forcing plans: an input on which the forced evaluation of an
    unfixable bitline is wrong.  For SATO: an input on which an unfixable set
    is wrong, provided its neighbour (if any) is wrong on some input too.
    Returns the input bits or ``None``.
    """
    if array.n_inputs > max_inputs:
        raise MitigationError(f"{array.n_inputs} inputs is too many for exhaustive search")
    x = _all_inputs(array.n_inputs)
    levels = drive_inputs(array, x)
    golden = run_array(array, x)
    eff = effective_matrix(array.program, faults)
    sensed = (lambda w: 1 - w) if array.polarity.value == "I" else (lambda w: w)
    if plan.kind in ("FTV", "FTG"):
        got = sensed(evaluate(array, forced_levels(plan, levels), eff))
        cols = sorted(plan.unfixable)
        bad = (got[:, cols] != golden[:, cols]).any(axis=1) if cols else np.zeros(len(x), bool)
    else:
        # a set is unrepairable when it is observably wrong and its only
        # possible host is missing or observably wrong itself
        lay = plan.layout
        wrong = sensed(evaluate(array, levels, eff)) != golden
        bad = np.zeros(len(x), dtype=bool)
        for k in plan.unfixable:
            if isinstance(k, str):
                bad |= wrong[:, int(k.split()[1])]
                continue
            own = wrong[:, list(lay.columns(k))].any(axis=1)
            if k + 1 < lay.count and not wrong[:, list(lay.columns(k + 1))].any():
                continue
            bad |= own
    hit = np.flatnonzero(bad)
    return tuple(x[hit[0]].tolist()) if hit.size else None


# -- activity ----------------------------------------------------------------

def activity_report(plan: Optional[MitigationPlan], n_ops: int = 1,
                    n_bitlines: Optional[int] = None) -> dict:
    """SA activations, precharges, latch shifts and cycles for ``n_ops`` operations.

    ``plan=None`` is the unmitigated baseline over ``n_bitlines`` bitlines.
    Every sensed bitline is precharged once for its evaluation.
    """
    if plan is None:
        per_cycle = [n_bitlines or 0]
        shifts = 0
    elif plan.kind == "SATO":
        # cycle 1 senses every live bitline, faulty sets are discarded by the shift
        per_cycle = [len(plan.live)] + ([len(plan.cycle2)] if plan.cycle2 else [])
        shifts = plan.latch_shifts
    else:
        per_cycle = [len(plan.cycle1)] + ([len(plan.cycle2)] if plan.cycle2 else [])
        shifts = 0
    return {
        "sa_activations": sum(per_cycle) * n_ops,
        "activations_per_cycle": [a * n_ops for a in per_cycle],
        "precharge_events": sum(per_cycle) * n_ops,
        "latch_shifts": shifts * n_ops,
        "cycles": len(per_cycle) * n_ops,
    }
