import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imcfp.analog import (TOLERANCE, DeviceParams, VariationParams, bl_voltage, curve_csv,
                          default_vref, mc_sense_margin, sense_margin, sm_vs_faults, solve_node,
                          worst_case_column, worst_case_margin)
from imcfp.crossbar import CrossbarArray, PlaneKind, SaPolarity, complement_pairing

P = DeviceParams()
PD = P.with_diode(0.5)


def divider(g, vwl):
    """Closed-form node voltage of a purely resistive star."""
    g, vwl = np.asarray(g, float), np.asarray(vwl, float)
    return float((g * vwl).sum() / g.sum())


def test_symmetric_divider_is_half_vdd():
    assert bl_voltage([("L", 1), ("L", 0)], P) == pytest.approx(0.6, abs=TOLERANCE)


@given(st.integers(1, 40))
def test_k_up_against_one_down(k):
    v = bl_voltage([("L", 1)] * k + [("L", 0)], P)
    assert v == pytest.approx(P.vdd * k / (k + 1), abs=TOLERANCE)


@given(st.lists(st.tuples(st.floats(1e3, 1e7), st.integers(0, 1)), min_size=1, max_size=20))
def test_bisection_matches_closed_form(cells):
    if all(lvl == cells[0][1] for _, lvl in cells):
        want = P.vdd * cells[0][1]
    else:
        want = divider([1 / r for r, _ in cells], [P.vdd * lvl for _, lvl in cells])
    assert bl_voltage(cells, P) == pytest.approx(want, abs=TOLERANCE)


def test_diode_cutoff():
    assert bl_voltage([("L", 0)], PD) == pytest.approx(0.5, abs=TOLERANCE)
    # precharged low, an OR-plane bitline stops rising vth below vdd
    assert bl_voltage([("L", 1)], PD, PlaneKind.OR) == pytest.approx(0.7, abs=TOLERANCE)


@given(st.floats(0.1, 0.6), st.integers(0, 62))
def test_diode_caps_the_pull_up(vth, k):
    # with vth <= vdd/2 the dead zone is [vth, vdd - vth] and precharge parks on top
    params = P.with_diode(vth)
    states, levels = worst_case_column(k, params)
    v = bl_voltage(list(zip(states, levels)), params)
    assert 0 <= v <= params.vdd
    assert v <= params.vdd - vth + TOLERANCE


def test_worst_case_column_layout():
    states, levels = worst_case_column(3, P)
    assert len(states) == len(levels) == 64
    assert states.count("L") == 5
    # operand high, three faults high, the rest of the 31 high cells stay HRS
    assert sum(levels) == 1 + 31
    with pytest.raises(ValueError):
        worst_case_column(63, P)
    with pytest.raises(ValueError):
        worst_case_column(1, P, logic_one=True)


def test_vref_sits_between_the_fault_free_levels():
    v0 = bl_voltage(list(zip(*worst_case_column(0, P))), P)
    v1 = bl_voltage(list(zip(*worst_case_column(0, P, logic_one=True))), P)
    vref = default_vref(P)
    assert v0 < vref < v1
    assert default_vref(PD) == vref


def test_margin_without_diode_strictly_decreases():
    curve = sm_vs_faults(range(31), P)
    sm = [m for _, m in curve]
    assert all(b < a for a, b in zip(sm, sm[1:]))
    assert sm[30] / sm[0] < 0.25


def test_diode_floor_and_relative_robustness():
    vref = default_vref(P)
    floor = 1e3 * (vref - (PD.vdd - PD.diode_vth))
    assert floor > 0
    sm = [m for _, m in sm_vs_faults(range(31), PD)]
    assert all(m >= floor - 1e3 * TOLERANCE for m in sm)
    plain = [m for _, m in sm_vs_faults(range(31), P)]
    assert sm[30] / sm[0] >= plain[30] / plain[0]


def test_k0_same_with_and_without_diode():
    assert worst_case_margin(0, PD) == pytest.approx(worst_case_margin(0, P), abs=2 * TOLERANCE)


def test_sense_margin_on_an_array():
    arr = CrossbarArray(64, 1, PlaneKind.AND, SaPolarity.INVERTING, pairing=complement_pairing(32))
    arr.program[0, 0] = arr.program[2, 0] = True
    x = np.zeros(32, int)
    x[0] = 1                     # one operand high, one low
    m0 = sense_margin(arr, 0, x, P)
    m5 = sense_margin(arr, 0, x, P, k=5)
    assert m5 < m0
    with pytest.raises(ValueError):
        sense_margin(arr, 0, np.ones(32, int), P)


def test_monte_carlo():
    zero = VariationParams(0.0, 0.0)
    stats = mc_sense_margin(P, zero, 10, 200)
    assert stats["std"] == pytest.approx(0.0, abs=1e-9)
    assert stats["mean"] == pytest.approx(dict(sm_vs_faults([10], P))[10], abs=0.05)
    var = VariationParams(seed=3)
    a = mc_sense_margin(P, var, 10, 400)
    assert a == mc_sense_margin(P, var, 10, 400)
    assert a["std"] > mc_sense_margin(PD, var, 10, 400)["std"]
    for k in (0, 20):
        assert mc_sense_margin(P, var, k, 400)["std"] > mc_sense_margin(PD, var, k, 400)["std"]
    with pytest.raises(ValueError):
        mc_sense_margin(P, var, 0, 10)


def test_solver_batches():
    g = np.array([[1.0, 1.0], [3.0, 1.0]])
    v = solve_node(g, [1.2, 0.0], 1.2)
    assert v == pytest.approx([0.6, 0.9], abs=TOLERANCE)


def test_parameter_validation():
    with pytest.raises(ValueError):
        DeviceParams(r_lrs=1e7)
    with pytest.raises(ValueError):
        DeviceParams(vref=2.0)
    with pytest.raises(ValueError):
        VariationParams(sigma_lrs=-1)


def test_curve_csv():
    text = curve_csv([(0, 1.5), (1, 0.25)], ["k", "sm_mv"])
    assert text == "k,sm_mv\n0,1.500000\n1,0.250000\n"
