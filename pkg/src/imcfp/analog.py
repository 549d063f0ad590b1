"""Static resistive-divider model of one bitline, with an optional selector diode.

Every cell ties the bitline to its wordline voltage through its resistance.
The bitline settles where the node current vanishes.  A diode in series
blocks conduction until the voltage across the cell exceeds its threshold.
This is a DC proxy for the sense margin and only its trends are meaningful.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .crossbar import CellState, CrossbarArray, PlaneKind, drive_inputs

TOLERANCE = 10e-6
MAX_ITER = 60


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class DeviceParams:
    r_lrs: float = 58.9e3
    r_hrs: float = 6.68e6
    vdd: float = 1.2
    vref: Optional[float] = None   # None: midpoint of the fault-free worst cases
    diode_vth: Optional[float] = None
    rows: int = 64

    def __post_init__(self):
        if not self.r_hrs > self.r_lrs > 0:
            raise ValueError("need r_hrs > r_lrs > 0")
        if self.vdd <= 0:
            raise ValueError("vdd must be positive")
        if self.vref is not None and not 0 < self.vref < self.vdd:
            raise ValueError("vref must lie strictly between 0 and vdd")
        if self.diode_vth is not None and not 0 <= self.diode_vth < self.vdd:
            raise ValueError("diode threshold must lie in [0, vdd)")
        if self.rows < 2:
            raise ValueError("a worst-case column needs at least two rows")

    def with_diode(self, vth: Optional[float] = 0.5) -> "DeviceParams":
        return replace(self, diode_vth=vth)


@dataclass(frozen=True)
class VariationParams:
    """Lognormal spread of cell resistances (sigma of the natural log)."""

    sigma_lrs: float = 0.1
    sigma_hrs: float = math.log(10) / 3   # 3 sigma spans one decade
    seed: int = 0

    def __post_init__(self):
        if self.sigma_lrs < 0 or self.sigma_hrs < 0:
            raise ValueError("sigma must be >= 0")


def _node_current(v, g, vwl, vth):
    dv = vwl - v[..., None]
    if vth is not None:
        dv = np.sign(dv) * np.maximum(np.abs(dv) - vth, 0.0)
    return (g * dv).sum(axis=-1)


def solve_node(g, vwl, vdd: float, vth: Optional[float] = None,
               precharge_high: bool = True) -> np.ndarray:
    """Bisection for the bitline voltage; batched over leading axes.

    Node current is non-increasing in the bitline voltage.  Where it is zero
    over an interval (diode cutoff), the bitline stays at the end of the
    interval nearest its precharge level.
    """
    g = np.asarray(g, dtype=float)
    vwl = np.broadcast_to(np.asarray(vwl, dtype=float), g.shape)
    lo = np.zeros(g.shape[:-1])
    hi = np.full(g.shape[:-1], float(vdd))
    for _ in range(MAX_ITER):
        if np.all(hi - lo <= TOLERANCE):
            break
        mid = (lo + hi) / 2
        i = _node_current(mid, g, vwl, vth)
        up = i >= 0 if precharge_high else i > 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    else:
        raise ConvergenceError("bitline bisection did not converge")
    return (lo + hi) / 2


def _resistance(state, params: DeviceParams) -> float:
    if isinstance(state, CellState):
        return params.r_lrs if state is CellState.LRS else params.r_hrs
    if state in ("L", "H"):
        return params.r_lrs if state == "L" else params.r_hrs
    return float(state)


def bl_voltage(loads: Sequence[tuple], params: DeviceParams,
               plane: PlaneKind = PlaneKind.AND) -> float:
    """Settled bitline voltage for ``(state or ohms, wordline bit)`` cells."""
    if not loads:
        raise ValueError("a bitline needs at least one cell")
    g = np.array([1.0 / _resistance(s, params) for s, _ in loads])
    vwl = np.array([params.vdd if lvl else 0.0 for _, lvl in loads])
    v = solve_node(g[None], vwl[None], params.vdd, params.diode_vth, plane is PlaneKind.AND)
    return float(v[0])


def worst_case_column(k: int, params: DeviceParams, logic_one: bool = False):
    """States and wordline bits of a NAND bitline in its hardest case.

    Worst-case 0: one operand low, one operand high and ``k`` faulty cells
    pulled high.  Worst-case 1: both operands high, no faults.  The other
    cells are HRS, half on high wordlines and half on low ones; faults are
    taken from the high half first.
    """
    spare = params.rows - 2
    if not 0 <= k <= spare:
        raise ValueError(f"k must lie in [0, {spare}]")
    if logic_one and k:
        raise ValueError("the worst-case 1 column is fault-free")
    up, down = spare // 2, spare - spare // 2
    from_up = min(k, up)
    states = ["L", "L"] + ["L"] * k + ["H"] * (up - from_up) + ["H"] * (down - (k - from_up))
    levels = [1, 1 if logic_one else 0] + [1] * k + [1] * (up - from_up) + [0] * (down - (k - from_up))
    return states, levels


def default_vref(params: DeviceParams) -> float:
    """Midpoint of the fault-free worst-case 0 and 1 levels, without a diode."""
    plain = replace(params, diode_vth=None, vref=None)
    v0 = bl_voltage(list(zip(*worst_case_column(0, plain))), plain)
    v1 = bl_voltage(list(zip(*worst_case_column(0, plain, logic_one=True))), plain)
    return (v0 + v1) / 2


def _vref(params: DeviceParams) -> float:
    return params.vref if params.vref is not None else default_vref(params)


def worst_case_margin(k: int, params: DeviceParams) -> float:
    """``vref - V_BL`` in volts for the worst-case 0 with ``k`` faults.

    The margin is signed: a negative value means the bitline has crossed the
    reference and the SA reads the wrong value.
    """
    loads = list(zip(*worst_case_column(k, params)))
    return _vref(params) - bl_voltage(loads, params)


def sense_margin(array: CrossbarArray, col: int, inputs, params: DeviceParams,
                 k: int = 0, effective=None) -> float:
    """Signed margin in millivolts of an AND-plane bitline reading 0.

    ``k`` further intended-HRS cells on high wordlines are turned LRS, the
    worst placement for undesired-LRS faults.
    """
    if array.plane is not PlaneKind.AND:
        raise ValueError("sense margins are modelled for AND-plane bitlines")
    cells = array.program if effective is None else np.asarray(effective, dtype=bool)
    lrs = cells[:, col].copy()
    levels = drive_inputs(array, inputs)
    if levels.ndim != 1:
        raise ValueError("one input vector at a time")
    if not (lrs & (levels == 0)).any():
        raise ValueError("input does not drive the bitline to 0")
    candidates = np.flatnonzero(~lrs & (levels == 1))
    if k > len(candidates):
        raise ValueError(f"only {len(candidates)} HRS cells sit on high wordlines")
    lrs[candidates[:k]] = True
    loads = [("L" if s else "H", int(v)) for s, v in zip(lrs, levels)]
    return 1e3 * (_vref(params) - bl_voltage(loads, params))


def sm_vs_faults(k_range: Iterable[int], params: DeviceParams) -> list[tuple[int, float]]:
    """``(k, margin in mV)`` along the worst-case 0 fault sweep."""
    ks = list(k_range)
    if not ks:
        raise ValueError("empty k range")
    vref = _vref(params)
    fixed = replace(params, vref=vref)
    return [(k, 1e3 * worst_case_margin(k, fixed)) for k in ks]


def mc_sense_margin(params: DeviceParams, variation: VariationParams, k: int,
                    n: int) -> dict:
    """Margin statistics (mV) with every cell resistance drawn lognormally."""
    if n < 100:
        raise ValueError("need at least 100 samples")
    vref = _vref(params)
    states, levels = worst_case_column(k, params)
    lrs = np.array([s == "L" for s in states])
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([variation.seed, k])))
    sigma = np.where(lrs, variation.sigma_lrs, variation.sigma_hrs)
    nominal = np.where(lrs, params.r_lrs, params.r_hrs)
    r = nominal * np.exp(sigma * rng.standard_normal((n, len(states))))
    vwl = np.array(levels, dtype=float) * params.vdd
    v = solve_node(1.0 / r, vwl, params.vdd, params.diode_vth)
    sm = 1e3 * (vref - v)
    return {"k": k, "n": n, "mean": float(sm.mean()), "std": float(sm.std(ddof=1)),
            "min": float(sm.min())}


def curve_csv(rows: Sequence[tuple], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.6f}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()
