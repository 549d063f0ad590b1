"""Logic-level model of a DCIM crossbar array.

Wordlines are inputs, bitlines are outputs.  An AND-plane bitline starts
precharged high and is pulled low by any LRS cell whose wordline sits at 0,
so it computes the wired-AND of the wordline levels over its LRS cells.  An
OR-plane bitline starts discharged and computes the wired-OR.  The sense
amplifier latches the wired value, optionally inverted (NAND / NOR arrays).

All evaluation functions accept a leading batch axis so that whole input
spaces can be pushed through an array in one call.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class CellState(enum.Enum):
    HRS = "H"
    LRS = "L"


class PlaneKind(enum.Enum):
    AND = "AND"
    OR = "OR"

    @property
    def neutral(self) -> int:
        """Wordline level that never changes the wired value of this plane."""
        return 1 if self is PlaneKind.AND else 0


class SaPolarity(enum.Enum):
    NON_INVERTING = "T"
    INVERTING = "I"


class CrossbarError(ValueError):
    """Dimension or index mismatch in a crossbar operation."""


@dataclass
class CrossbarArray:
    """A programmed array.

    ``program`` is a boolean ``rows x cols`` matrix, ``True`` meaning LRS.
    ``pairing[i]`` gives the wordline(s) carrying logical input ``i``: a
    ``(true_wl, complement_wl)`` tuple, or ``(wl, None)`` for a single line.
    """

    rows: int
    cols: int
    plane: PlaneKind
    polarity: SaPolarity
    program: np.ndarray = None
    pairing: list = field(default_factory=list)

    def __post_init__(self):
        if self.program is None:
            self.program = np.zeros((self.rows, self.cols), dtype=bool)
        else:
            self.program = np.asarray(self.program, dtype=bool)
        if self.program.shape != (self.rows, self.cols):
            raise CrossbarError(
                f"program shape {self.program.shape} != ({self.rows}, {self.cols})")
        self.pairing = [(int(t), None if c is None else int(c)) for t, c in self.pairing]
        used = [w for pair in self.pairing for w in pair if w is not None]
        if len(used) != len(set(used)):
            raise CrossbarError("a wordline belongs to more than one pairing entry")
        if any(not 0 <= w < self.rows for w in used):
            raise CrossbarError("pairing references a wordline outside the array")

    @property
    def n_inputs(self) -> int:
        return len(self.pairing)

    def copy(self) -> "CrossbarArray":
        return CrossbarArray(self.rows, self.cols, self.plane, self.polarity,
                             self.program.copy(), list(self.pairing))

    def lrs_cells(self) -> list[tuple[int, int]]:
        return [tuple(map(int, rc)) for rc in np.argwhere(self.program)]

    def __eq__(self, other):
        if not isinstance(other, CrossbarArray):
            return NotImplemented
        return (self.rows == other.rows and self.cols == other.cols
                and self.plane is other.plane and self.polarity is other.polarity
                and self.pairing == other.pairing
                and np.array_equal(self.program, other.program))


def complement_pairing(n_inputs: int, offset: int = 0) -> list[tuple[int, int]]:
    """Interleaved (t0, c0, t1, c1, ...) pairing starting at ``offset``."""
    return [(offset + 2 * i, offset + 2 * i + 1) for i in range(n_inputs)]


def single_pairing(n_inputs: int, offset: int = 0) -> list[tuple[int, None]]:
    return [(offset + i, None) for i in range(n_inputs)]


def drive_inputs(array: CrossbarArray, inputs) -> np.ndarray:
    """Expand logical input bits to wordline levels.

    ``inputs`` has shape ``(..., n_inputs)``; the result has shape
    ``(..., rows)``.  Unpaired wordlines sit at the plane's neutral level.
    """
    x = np.asarray(inputs, dtype=np.uint8)
    if x.shape[-1:] != (array.n_inputs,):
        raise CrossbarError(
            f"expected {array.n_inputs} input bits, got shape {x.shape}")
    levels = np.full(x.shape[:-1] + (array.rows,), array.plane.neutral, dtype=np.uint8)
    for i, (t, c) in enumerate(array.pairing):
        levels[..., t] = x[..., i]
        if c is not None:
            levels[..., c] = 1 - x[..., i]
    return levels


def evaluate(array: CrossbarArray, wl_levels, effective: Optional[np.ndarray] = None) -> np.ndarray:
    """Wired bitline values for the given wordline levels.

    ``effective`` overrides the programmed matrix (e.g. with faults applied);
    it defaults to ``array.program``.
    """
    cells = array.program if effective is None else np.asarray(effective, dtype=bool)
    if cells.shape != (array.rows, array.cols):
        raise CrossbarError(f"effective matrix shape {cells.shape} does not match array")
    wl = np.asarray(wl_levels)
    if wl.shape[-1:] != (array.rows,):
        raise CrossbarError(f"expected {array.rows} wordline levels, got shape {wl.shape}")
    conduct = cells.astype(np.float32)
    if array.plane is PlaneKind.AND:
        lows = (1 - wl.astype(np.float32)) @ conduct
        return (lows == 0).astype(np.uint8)
    highs = wl.astype(np.float32) @ conduct
    return (highs > 0).astype(np.uint8)


@dataclass
class SenseLatchBank:
    bits: np.ndarray
    enable: np.ndarray = None

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.enable is None:
            self.enable = np.ones(self.bits.shape[-1], dtype=bool)
        else:
            self.enable = np.asarray(self.enable, dtype=bool)

    @classmethod
    def zeros(cls, n: int, batch: Sequence[int] = ()) -> "SenseLatchBank":
        return cls(np.zeros(tuple(batch) + (n,), dtype=np.uint8))

    def __len__(self):
        return self.bits.shape[-1]


def sense(wired, polarity: SaPolarity, enable, bank: SenseLatchBank) -> SenseLatchBank:
    """Latch the sensed bitline values wherever ``enable`` is set."""
    wired = np.asarray(wired, dtype=np.uint8)
    enable = np.asarray(enable, dtype=bool)
    if wired.shape[-1] != len(bank) or enable.shape[-1] != len(bank):
        raise CrossbarError("wired bits, enable mask and bank lengths differ")
    value = 1 - wired if polarity is SaPolarity.INVERTING else wired
    return SenseLatchBank(np.where(enable, value, bank.bits).astype(np.uint8), enable)


def latch_shift(bank: SenseLatchBank, k: int, toward_higher: bool = True, fill: int = 0,
                span: Optional[tuple[int, int]] = None) -> SenseLatchBank:
    """Shift latch contents ``k`` places; vacated latches take ``fill``.

    ``span=(lo, hi)`` restricts the shift to latches ``lo..hi-1``, the rest
    of the bank is untouched.
    """
    lo, hi = (0, len(bank)) if span is None else span
    if not 0 <= lo <= hi <= len(bank):
        raise CrossbarError(f"bad shift span {span}")
    if not 0 <= k <= hi - lo:
        raise CrossbarError(f"shift count {k} out of range for length {hi - lo}")
    bits = bank.bits.copy()
    seg = bank.bits[..., lo:hi]
    out = np.full_like(seg, fill)
    if k == 0:
        out = seg.copy()
    elif toward_higher:
        out[..., k:] = seg[..., :hi - lo - k]
    else:
        out[..., :hi - lo - k] = seg[..., k:]
    bits[..., lo:hi] = out
    return SenseLatchBank(bits, bank.enable.copy())


def shifted_out(bank: SenseLatchBank, k: int, toward_higher: bool = True) -> np.ndarray:
    """Bits that a ``k``-place shift would push off the end of the bank."""
    if toward_higher:
        return bank.bits[..., len(bank) - k:]
    return bank.bits[..., :k]


def program_cell(array: CrossbarArray, row: int, col: int, state: CellState) -> CrossbarArray:
    if not (0 <= row < array.rows and 0 <= col < array.cols):
        raise CrossbarError(f"cell ({row}, {col}) outside {array.rows}x{array.cols} array")
    out = array.copy()
    out.program[row, col] = state is CellState.LRS
    return out


def hrs_fraction(program) -> float:
    program = np.asarray(program, dtype=bool)
    if program.size == 0:
        raise CrossbarError("empty program matrix")
    return float(np.count_nonzero(~program)) / program.size


def run_array(array: CrossbarArray, inputs, effective=None) -> np.ndarray:
    """Drive, evaluate and sense in one step (all latches enabled)."""
    wired = evaluate(array, drive_inputs(array, inputs), effective)
    return 1 - wired if array.polarity is SaPolarity.INVERTING else wired


# -- text format -------------------------------------------------------------

def dumps(array: CrossbarArray) -> str:
    lines = [f"plane={array.plane.value} polarity={array.polarity.value} "
             f"rows={array.rows} cols={array.cols}"]
    for r in range(array.rows):
        lines.append("".join("L" if v else "H" for v in array.program[r]))
    for i, (t, c) in enumerate(array.pairing):
        lines.append(f"input {i} = {t}" if c is None else f"input {i} = {t},{c}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> CrossbarArray:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CrossbarError("empty array description")
    try:
        header = dict(tok.split("=", 1) for tok in lines[0].split())
        plane = PlaneKind(header["plane"])
        polarity = SaPolarity(header["polarity"])
        rows, cols = int(header["rows"]), int(header["cols"])
    except (KeyError, ValueError) as exc:
        raise CrossbarError(f"bad header line {lines[0]!r}") from exc
    body = lines[1:1 + rows]
    if len(body) != rows or any(len(ln) != cols or set(ln) - {"H", "L"} for ln in body):
        raise CrossbarError("program rows malformed")
    program = np.array([[ch == "L" for ch in ln] for ln in body], dtype=bool).reshape(rows, cols)
    pairing = []
    for ln in lines[1 + rows:]:
        left, _, right = ln.partition("=")
        parts = left.split()
        if len(parts) != 2 or parts[0] != "input" or int(parts[1]) != len(pairing):
            raise CrossbarError(f"bad pairing line {ln!r}")
        wls = [int(w) for w in right.split(",")]
        pairing.append((wls[0], wls[1] if len(wls) > 1 else None))
    return CrossbarArray(rows, cols, plane, polarity, program, pairing)
