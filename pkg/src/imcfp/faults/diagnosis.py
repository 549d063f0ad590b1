"""Built-in test: screen each bitline, then brute-force the faulty ones cell by cell.

Tests drive wordlines directly (the FTV input transistors allow it) and are
judged on the wired bitline value, so they do not depend on SA polarity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..crossbar import CrossbarArray, PlaneKind, evaluate
from .model import FaultMap, effective_matrix


@dataclass
class DiagnosisResult:
    faulty_bitlines: np.ndarray   # F_B, one flag per bitline
    faulty_wordlines: np.ndarray  # F_W, one flag per wordline
    located: FaultMap
    steps: int


def _screen_levels(array: CrossbarArray, cols) -> np.ndarray:
    intended = array.program[:, cols].T
    # AND plane: operands high, everything else low; OR plane is the dual
    levels = intended if array.plane is PlaneKind.AND else ~intended
    return levels.astype(np.uint8)


def _screen(array: CrossbarArray, eff: np.ndarray, cols) -> np.ndarray:
    wired = evaluate(array, _screen_levels(array, cols), eff)
    own = wired[np.arange(len(cols)), cols]
    expected = 1 if array.plane is PlaneKind.AND else 0
    return own != expected


def screen_column(array: CrossbarArray, faults: FaultMap, col: int) -> bool:
    """``True`` iff the bitline deviates from its fault-free test response."""
    eff = effective_matrix(array.program, faults)
    return bool(_screen(array, eff, [col])[0])


def _locate(array: CrossbarArray, eff: np.ndarray, col: int) -> list[int]:
    # one test per row: cell under test at the controlling level, rest neutral
    if array.plane is PlaneKind.AND:
        levels = 1 - np.eye(array.rows, dtype=np.uint8)
        observed_lrs = evaluate(array, levels, eff)[:, col] == 0
    else:
        levels = np.eye(array.rows, dtype=np.uint8)
        observed_lrs = evaluate(array, levels, eff)[:, col] == 1
    return np.flatnonzero(observed_lrs & ~array.program[:, col]).tolist()


def locate_faults(array: CrossbarArray, faults: FaultMap, col: int) -> list[int]:
    """Rows whose cell conducts on ``col`` although it was programmed HRS."""
    return _locate(array, effective_matrix(array.program, faults), col)


def diagnose(array: CrossbarArray, faults: FaultMap) -> DiagnosisResult:
    eff = effective_matrix(array.program, faults)
    cols = np.arange(array.cols)
    faulty = _screen(array, eff, cols)
    located = []
    for col in np.flatnonzero(faulty):
        located += [(r, int(col)) for r in _locate(array, eff, int(col))]
    fw = np.zeros(array.rows, dtype=bool)
    for r, _ in located:
        fw[r] = True
    steps = array.cols + array.rows * int(faulty.sum())
    return DiagnosisResult(faulty, fw, FaultMap.of(located), steps)
