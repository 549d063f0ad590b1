"""Undesired-LRS fault maps, injection and the per-trial random source."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from ..crossbar import CrossbarArray


class FaultError(ValueError):
    """A fault map that contradicts the array it is applied to."""


@dataclass(frozen=True)
class FaultMap:
    """Intended-HRS cells that behave as LRS."""

    cells: frozenset = frozenset()

    @classmethod
    def of(cls, cells: Iterable[tuple[int, int]]) -> "FaultMap":
        return cls(frozenset((int(r), int(c)) for r, c in cells))

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(sorted(self.cells))

    def columns(self) -> set[int]:
        return {c for _, c in self.cells}

    def rows(self) -> set[int]:
        return {r for r, _ in self.cells}

    def on_column(self, col: int) -> list[int]:
        return sorted(r for r, c in self.cells if c == col)

    def validate(self, array: CrossbarArray) -> None:
        for r, c in self.cells:
            if not (0 <= r < array.rows and 0 <= c < array.cols):
                raise FaultError(f"fault ({r}, {c}) outside the array")
            if array.program[r, c]:
                raise FaultError(f"fault ({r}, {c}) sits on an intended-LRS cell")


@dataclass(frozen=True)
class YieldModel:
    """Independent per-cell fault probability for intended-HRS cells."""

    p_fault: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_fault <= 1.0:
            raise ValueError("fault probability must lie in [0, 1]")

    @classmethod
    def from_yield(cls, cell_yield: float, seed: int = 0) -> "YieldModel":
        return cls(1.0 - cell_yield, seed)

    @property
    def cell_yield(self) -> float:
        return 1.0 - self.p_fault


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(campaign seed, trial index)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def inject_random(array: CrossbarArray, model: YieldModel,
                  rng: Optional[np.random.Generator] = None) -> FaultMap:
    """Bernoulli(``p_fault``) fault on every intended-HRS cell."""
    rng = rng if rng is not None else trial_rng(model.seed, 0)
    hrs = np.argwhere(~array.program)
    hit = rng.random(len(hrs)) < model.p_fault
    return FaultMap.of(hrs[hit].tolist())


def inject_count(array: CrossbarArray, count: int, rng: np.random.Generator) -> FaultMap:
    """Exactly ``count`` faults on distinct intended-HRS cells, uniformly placed."""
    hrs = np.argwhere(~array.program)
    if count > len(hrs):
        raise FaultError(f"cannot place {count} faults on {len(hrs)} HRS cells")
    pick = rng.choice(len(hrs), size=count, replace=False)
    return FaultMap.of(hrs[np.sort(pick)].tolist())


def effective_matrix(program: np.ndarray, faults: FaultMap) -> np.ndarray:
    """Programmed matrix with every fault position forced to LRS."""
    program = np.asarray(program, dtype=bool)
    eff = program.copy()
    for r, c in faults.cells:
        if not (0 <= r < program.shape[0] and 0 <= c < program.shape[1]):
            raise FaultError(f"fault ({r}, {c}) outside the array")
        if program[r, c]:
            raise FaultError(f"fault ({r}, {c}) sits on an intended-LRS cell")
        eff[r, c] = True
    return eff


def dumps_faults(faults: FaultMap) -> str:
    return "".join(f"{r} {c}\n" for r, c in faults)


def loads_faults(text: str) -> FaultMap:
    cells = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FaultError(f"line {lineno}: expected 'row col'")
        cells.append((int(parts[0]), int(parts[1])))
    return FaultMap.of(cells)
