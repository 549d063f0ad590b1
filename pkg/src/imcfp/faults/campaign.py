"""Monte Carlo coverage campaigns over a FAME-style bit-sliced array."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import binomtest

from ..crossbar import CrossbarArray
from ..sop import BoolFunc, Style, compile_function, place, replicate_slices
from .diagnosis import diagnose
from .mitigation import SliceLayout, plan_forcing, plan_sato
from .model import YieldModel, inject_count, inject_random, trial_rng

SCHEMA_VERSION = 1
MITIGATIONS = ("SATO", "FTV")


@dataclass
class FaultTarget:
    """An array plus the bitlines whose outputs are consumed."""

    array: CrossbarArray
    layout: SliceLayout
    live: tuple

    @property
    def cells(self) -> int:
        return self.array.rows * self.array.cols


def _carry_terms() -> BoolFunc:
    return BoolFunc.from_callable(3, 1, lambda a, b, c: [(a & b) | (a & c) | (b & c)])


def fame_style_array(rows: int = 64, cols: int = 32, slice_width: int = 3,
                     style: Style = Style.NAND_NAND) -> FaultTarget:
    """First-level carry array of a bit-sliced adder placed in a ``rows x cols`` crossbar.

    Each slice is the three majority product terms of one adder bit on its own
    six complement-paired wordlines.  As many slices as fit are stacked
    block-diagonally; leftover bitlines stay unprogrammed and are not live.
    """
    plan = compile_function(_carry_terms(), style, name="carry")
    block = plan.first[0]
    if block.cols != slice_width:
        raise ValueError(f"carry slice is {block.cols} bitlines wide, not {slice_width}")
    count = min(rows // block.rows, cols // block.cols)
    tiled = replicate_slices(plan, count).first[0]
    array = place(tiled, rows, cols)
    layout = SliceLayout(block.cols, block.rows, count)
    return FaultTarget(array, layout, tuple(range(layout.n_cols)))


@dataclass
class TrialRecord:
    trial: int
    faults: int
    live_faults: int
    neutralized: int
    faulty_bitlines: int
    fixable: bool
    diagnosis_exact: bool


def wilson(successes: int, n: int) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    ci = binomtest(successes, n).proportion_ci(0.95, method="wilson")
    return (float(ci.low), float(ci.high))


@dataclass
class CoverageReport:
    mitigation: str
    trials: int
    seed: int
    fault_source: dict
    fixable_array_rate: float
    fixable_array_ci: tuple
    fixable_fault_rate: float
    fixable_fault_ci: tuple
    fault_count_mean: float
    live_fault_count_mean: float
    records: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        d = asdict(self)
        d["fixable_array_ci"] = list(self.fixable_array_ci)
        d["fixable_fault_ci"] = list(self.fixable_fault_ci)
        return json.dumps(d, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(TrialRecord.__dataclass_fields__)
        w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
        w.writeheader()
        for r in self.records:
            w.writerow(r)
        return buf.getvalue()

    def summary(self) -> str:
        lo, hi = self.fixable_array_ci
        flo, fhi = self.fixable_fault_ci
        return (f"{self.mitigation}: {self.trials} trials, mean faults {self.fault_count_mean:.2f}\n"
                f"  fixable-array rate {self.fixable_array_rate:.4f} [{lo:.4f}, {hi:.4f}]\n"
                f"  fixable-fault rate {self.fixable_fault_rate:.4f} [{flo:.4f}, {fhi:.4f}]")


def run_trial(target: FaultTarget, mitigation: str, trial: int, seed: int,
              model: Optional[YieldModel], count: Optional[int]) -> TrialRecord:
    rng = trial_rng(seed, trial)
    if count is not None:
        faults = inject_count(target.array, count, rng)
    else:
        faults = inject_random(target.array, model, rng)
    diag = diagnose(target.array, faults)
    live = set(target.live)
    live_faults = [(r, c) for r, c in faults.cells if c in live]
    if mitigation == "SATO":
        plan = plan_sato(target.array, diag, target.layout, target.live)
        lay = target.layout
        neutral = sum(1 for _, c in live_faults if lay.set_of(c) in plan.remap)
    elif mitigation == "FTV":
        plan = plan_forcing(target.array, diag, target.live)
        neutral = sum(1 for _, c in live_faults if c not in plan.unfixable)
    else:
        raise ValueError(f"unknown mitigation {mitigation!r}")
    return TrialRecord(trial, len(faults), len(live_faults), neutral,
                       int(diag.faulty_bitlines[list(target.live)].sum()), plan.fixable,
                       diag.located == faults)


def _chunk(args) -> list:
    target, mitigation, lo, hi, seed, model, count = args
    return [asdict(run_trial(target, mitigation, t, seed, model, count)) for t in range(lo, hi)]


def coverage_mc(target: FaultTarget, mitigation: str, trials: int, seed: int = 0,
                model: Optional[YieldModel] = None, count: Optional[int] = None,
                jobs: int = 1) -> CoverageReport:
    """Inject, diagnose, plan and score ``trials`` independent fault maps.

    Exactly one of ``model`` (Bernoulli per HRS cell) or ``count`` (fixed
    number of faults) selects the fault source.  Trial ``t`` draws from
    ``(seed, t)`` so results do not depend on ``jobs``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if (model is None) == (count is None):
        raise ValueError("give exactly one of a yield model or a fault count")
    jobs = max(1, jobs)
    bounds = np.linspace(0, trials, jobs + 1).astype(int)
    work = [(target, mitigation, int(lo), int(hi), seed, model, count)
            for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    if jobs == 1:
        chunks = [_chunk(w) for w in work]
    else:
        with ProcessPoolExecutor(jobs) as pool:
            chunks = list(pool.map(_chunk, work))
    records = [r for ch in chunks for r in ch]
    fixable = sum(r["fixable"] for r in records)
    live = sum(r["live_faults"] for r in records)
    neutral = sum(r["neutralized"] for r in records)
    source = {"fault_count": count} if count is not None else {"cell_yield": model.cell_yield}
    return CoverageReport(
        mitigation, trials, seed, source,
        fixable / trials, wilson(fixable, trials),
        neutral / live if live else 1.0, wilson(neutral, live) if live else (1.0, 1.0),
        sum(r["faults"] for r in records) / trials, live / trials, records)


@dataclass
class ProbabilityEstimate:
    estimate: float
    ci: tuple
    hits: int
    trials: int


def consecutive_fault_prob(target: FaultTarget, model: YieldModel, trials: int,
                           seed: int = 0) -> ProbabilityEstimate:
    """Probability that some two adjacent bitline sets both carry a fault."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    lay = target.layout
    hits = 0
    for t in range(trials):
        faults = inject_random(target.array, model, trial_rng(seed, t))
        sets = {lay.set_of(c) for c in faults.columns() if c in set(target.live)} - {None}
        hits += any(k + 1 in sets for k in sets)
    return ProbabilityEstimate(hits / trials, wilson(hits, trials), hits, trials)


def fault_free_prob(cell_yield: float, cells: int) -> float:
    """Chance that ``cells`` independent devices are all healthy."""
    if not 0.0 <= cell_yield <= 1.0:
        raise ValueError("yield must lie in [0, 1]")
    if cells < 0:
        raise ValueError("cell count must be >= 0")
    return cell_yield ** cells


def fault_free_mc(cell_yield: float, cells: int, trials: int, seed: int = 0,
                  chunk: int = 1 << 22) -> ProbabilityEstimate:
    """Cell-level simulation of the all-healthy event.

    Faults along the concatenated cell stream of all trials form a Bernoulli
    process, so the gaps between them are drawn as geometric variates and a
    trial is healthy when no fault position lands in its cell range.
    """
    p = 1.0 - cell_yield
    total = trials * cells
    if p == 0.0:
        return ProbabilityEstimate(1.0, wilson(trials, trials), trials, trials)
    rng = trial_rng(seed, 0)
    hit = np.zeros(trials, dtype=bool)
    pos = -1
    while True:
        gaps = rng.geometric(p, size=chunk)
        where = pos + np.cumsum(gaps, dtype=np.int64)
        inside = where[where < total]
        hit[inside // cells] = True
        if inside.size < where.size:
            break
        pos = int(where[-1])
    ok = int(trials - hit.sum())
    return ProbabilityEstimate(ok / trials, wilson(ok, trials), ok, trials)


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)
