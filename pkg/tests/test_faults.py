import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imcfp.crossbar import (CrossbarArray, PlaneKind, SaPolarity, complement_pairing,
                            run_array)
from imcfp.faults import (FaultError, FaultMap, MitigationError, SatoPreconditionError,
                          SliceLayout, YieldModel, activity_report, apply_ftg, apply_ftv,
                          apply_plan, apply_sato, consecutive_fault_prob, coverage_mc, diagnose,
                          dumps_faults, effective_matrix, fame_style_array, fault_free_prob,
                          golden_outputs, inject_count, inject_random, loads_faults,
                          locate_faults, plan_forcing, plan_ftg, plan_ftv, plan_sato,
                          screen_column, slice_periodicity, trial_rng, unfixable_witness)
from imcfp.sop import BoolFunc, Style, compile_function, input_space, replicate_slices

XOR = BoolFunc.from_callable(2, 1, lambda a, b: [a ^ b])


def literal_array(columns, n, plane=PlaneKind.AND, polarity=SaPolarity.INVERTING):
    """Array whose column j holds product literals ``columns[j]`` ('1', '0' or '-' per input)."""
    arr = CrossbarArray(2 * n, len(columns), plane, polarity, pairing=complement_pairing(n))
    for j, cube in enumerate(columns):
        for i, ch in enumerate(cube):
            if ch != "-":
                # an OR-plane literal on input i uses the opposite wordline of the pair
                want_true = (ch == "1") == (plane is PlaneKind.AND)
                arr.program[2 * i + (0 if want_true else 1), j] = True
    return arr


@st.composite
def well_formed(draw, max_inputs=4, max_cols=6):
    """Fully paired array where no bitline uses both wordlines of one input."""
    n = draw(st.integers(1, max_inputs))
    cols = draw(st.integers(1, max_cols))
    cubes = [draw(st.text("01-", min_size=n, max_size=n)) for _ in range(cols)]
    plane = draw(st.sampled_from(list(PlaneKind)))
    pol = draw(st.sampled_from(list(SaPolarity)))
    arr = literal_array(cubes, n, plane, pol)
    hrs = np.argwhere(~arr.program).tolist()
    faults = draw(st.lists(st.sampled_from(hrs), max_size=4, unique_by=tuple)) if hrs else []
    return arr, FaultMap.of(faults)


@st.composite
def sliced(draw):
    """Replicated bit slices of a small compiled function, with faults."""
    n = draw(st.integers(1, 2))
    table = draw(st.lists(st.lists(st.integers(0, 1), min_size=1, max_size=1),
                          min_size=1 << n, max_size=1 << n))
    f = BoolFunc(n, 1, np.array(table, np.uint8))
    style = draw(st.sampled_from(list(Style)))
    plan = compile_function(f, style)
    block = plan.first[0]
    count = draw(st.integers(2, max(2, 8 // block.n_inputs)))
    arr = replicate_slices(plan, count).first[0]
    layout = SliceLayout(block.cols, block.rows, count)
    hrs = np.argwhere(~arr.program).tolist()
    faults = draw(st.lists(st.sampled_from(hrs), max_size=4, unique_by=tuple)) if hrs else []
    return arr, layout, FaultMap.of(faults)


def all_inputs(arr):
    return input_space(arr.n_inputs)


# -- fault maps and injection ---------------------------------------------------

def test_trial_rng_is_keyed_by_seed_and_trial():
    a = trial_rng(7, 3).random(5)
    assert np.array_equal(a, trial_rng(7, 3).random(5))
    assert not np.array_equal(a, trial_rng(7, 4).random(5))
    assert not np.array_equal(a, trial_rng(8, 3).random(5))


def test_inject_random_mean_and_hrs_only():
    target = fame_style_array()
    model = YieldModel.from_yield(0.99)
    counts = []
    for t in range(400):
        faults = inject_random(target.array, model, trial_rng(1, t))
        faults.validate(target.array)
        counts.append(len(faults))
    hrs = int((~target.array.program).sum())
    assert abs(np.mean(counts) - 0.01 * hrs) < 4 * np.sqrt(0.01 * hrs / 400)


def test_inject_count_exact_and_distinct():
    target = fame_style_array()
    faults = inject_count(target.array, 30, trial_rng(0, 0))
    assert len(faults) == 30
    faults.validate(target.array)
    with pytest.raises(FaultError):
        inject_count(target.array, target.cells, trial_rng(0, 0))


def test_effective_matrix_contracts():
    arr = literal_array(["1-", "01"], 2)
    assert np.array_equal(effective_matrix(arr.program, FaultMap()), arr.program)
    eff = effective_matrix(arr.program, FaultMap.of([(2, 0)]))
    assert (eff != arr.program).sum() == 1
    with pytest.raises(FaultError):
        effective_matrix(arr.program, FaultMap.of([(0, 0)]))
    with pytest.raises(FaultError):
        effective_matrix(arr.program, FaultMap.of([(9, 0)]))


def test_fault_adds_an_unintended_conjunct():
    arr = literal_array(["1-", "-1"], 2)
    x = all_inputs(arr)
    # fault on the true wordline of input 1 in column 0
    got = run_array(arr, x, effective_matrix(arr.program, FaultMap.of([(2, 0)])))
    want = run_array(arr, x)
    assert np.array_equal(got[:, 0] != want[:, 0], (x[:, 0] == 1) & (x[:, 1] == 0))
    assert np.array_equal(got[:, 1], want[:, 1])


def test_fault_file_roundtrip():
    f = FaultMap.of([(3, 1), (0, 4)])
    assert loads_faults("# header\n" + dumps_faults(f)) == f
    with pytest.raises(FaultError):
        loads_faults("1 2 3\n")


# -- diagnosis -------------------------------------------------------------------

def test_screen_and_locate():
    arr = literal_array(["1-", "01", "--"], 2)
    faults = FaultMap.of([(3, 0), (2, 0), (1, 2)])
    assert screen_column(arr, faults, 0) and screen_column(arr, faults, 2)
    assert not screen_column(arr, faults, 1)
    assert locate_faults(arr, faults, 0) == [2, 3]
    assert locate_faults(arr, faults, 1) == []


@given(well_formed())
def test_diagnosis_finds_exactly_the_injected_faults(case):
    arr, faults = case
    d = diagnose(arr, faults)
    assert d.located == faults
    assert d.faulty_bitlines.tolist() == [c in faults.columns() for c in range(arr.cols)]
    assert d.steps == arr.cols + arr.rows * len(faults.columns())


def test_diagnosis_steps_on_64x32():
    target = fame_style_array()
    assert diagnose(target.array, FaultMap()).steps == 32
    hrs = np.argwhere(~target.array.program)
    cols = {}
    for r, c in hrs:
        if c in (2, 10, 17) and c not in cols:
            cols[c] = (r, c)
    d = diagnose(target.array, FaultMap.of(cols.values()))
    assert d.steps == 32 + 3 * 64


# -- forcing -----------------------------------------------------------------------

@given(well_formed())
def test_forcing_is_exact(case):
    arr, faults = case
    plan = plan_forcing(arr, diagnose(arr, faults))
    x = all_inputs(arr)
    golden = golden_outputs(arr, x)
    if plan.fixable:
        assert np.array_equal(apply_plan(arr, faults, plan, x), golden)
        assert unfixable_witness(arr, faults, plan) is None
    else:
        w = unfixable_witness(arr, faults, plan)
        assert w is not None
        with pytest.raises(MitigationError):
            apply_plan(arr, faults, plan, x)
    # cycle-1 bitlines are correct whether or not the plan is fixable
    merged = apply_plan(arr, faults, plan, x, check=False)
    assert np.array_equal(merged[:, list(plan.cycle1)], golden[:, list(plan.cycle1)])


def test_ftv_spectator_fault_is_fixable():
    arr = literal_array(["11--", "--1-"], 4)
    faults = FaultMap.of([(6, 0)])           # input 3 true line, not used by anyone
    plan = plan_ftv(arr, diagnose(arr, faults))
    assert plan.fixable and plan.cycle2 == (0,) and plan.forced_wordlines == (6,)
    x = all_inputs(arr)
    assert np.array_equal(apply_ftv(arr, faults, plan, x), golden_outputs(arr, x))


def test_ftv_contention_is_unfixable():
    # bitline 0's fault sits on in_m, which is an operand of faulty bitline m
    arr = literal_array(["1---", "--1-", "-1-1"], 4)
    faults = FaultMap.of([(6, 0), (4, 2)])
    plan = plan_ftv(arr, diagnose(arr, faults))
    assert not plan.fixable and 2 in plan.unfixable
    assert unfixable_witness(arr, faults, plan) is not None


def test_ftg_on_or_plane():
    arr = literal_array(["1-1", "-0-"], 3, PlaneKind.OR, SaPolarity.INVERTING)
    hrs = [tuple(rc) for rc in np.argwhere(~arr.program)]
    faults = FaultMap.of([hrs[0]])
    plan = plan_ftg(arr, diagnose(arr, faults))
    assert plan.force_level == 0
    x = all_inputs(arr)
    assert plan.fixable
    assert np.array_equal(apply_ftg(arr, faults, plan, x), golden_outputs(arr, x))
    with pytest.raises(MitigationError):
        plan_ftv(arr, diagnose(arr, faults))


def test_no_faults_is_single_cycle_identity():
    arr = literal_array(["10", "-1"], 2)
    plan = plan_forcing(arr, diagnose(arr, FaultMap()))
    assert plan.cycles == 1
    x = all_inputs(arr)
    assert np.array_equal(apply_ftv(arr, FaultMap(), plan, x), run_array(arr, x))


# -- SATO --------------------------------------------------------------------------

@given(sliced())
def test_sato_is_exact(case):
    arr, layout, faults = case
    plan = plan_sato(arr, diagnose(arr, faults), layout)
    x = all_inputs(arr)
    golden = golden_outputs(arr, x)
    if plan.fixable:
        assert np.array_equal(apply_sato(arr, faults, plan, x), golden)
    else:
        assert unfixable_witness(arr, faults, plan) is not None
        with pytest.raises(MitigationError):
            apply_sato(arr, faults, plan, x)
    merged = apply_sato(arr, faults, plan, x, check=False)
    assert np.array_equal(merged[:, list(plan.cycle1)], golden[:, list(plan.cycle1)])


def test_sato_single_bitline_slices():
    # four single-literal bitlines, one per wordline pair; bitline 0 faulty
    arr = literal_array(["1---", "-1--", "--1-", "---1"], 4)
    layout = SliceLayout(1, 2, 4)
    assert slice_periodicity(arr.program, layout) == (True, None)
    faults = FaultMap.of([(1, 0)])
    plan = plan_sato(arr, diagnose(arr, faults), layout)
    assert plan.remap == {0: 1} and plan.cycle2 == (1,)
    x = all_inputs(arr)
    assert np.array_equal(apply_sato(arr, faults, plan, x), golden_outputs(arr, x))


def test_sato_two_slice_xor():
    plan2 = replicate_slices(compile_function(XOR, Style.NAND_NAND), 2)
    arr = plan2.first[0]
    layout = SliceLayout(2, 4, 2)
    x = all_inputs(arr)
    faults = FaultMap.of([(1, 0)])
    plan = plan_sato(arr, diagnose(arr, faults), layout)
    assert plan.fixable and plan.latch_shifts == 2
    assert np.array_equal(apply_sato(arr, faults, plan, x), golden_outputs(arr, x))
    # the highest set has nowhere to go
    top = FaultMap.of([(5, 2)])
    assert not plan_sato(arr, diagnose(arr, top), layout).fixable


def test_sato_adjacent_sets_unfixable():
    target = fame_style_array()
    arr, lay = target.array, target.layout
    faults = FaultMap.of([(10, 0), (0, 3)])
    plan = plan_sato(arr, diagnose(arr, faults), lay, target.live)
    assert not plan.fixable and 0 in plan.unfixable
    ok = plan_sato(arr, diagnose(arr, FaultMap.of([(10, 0)])), lay, target.live)
    assert ok.fixable and ok.remap == {0: 1} and ok.latch_shifts == 3
    empty = plan_sato(arr, diagnose(arr, FaultMap()), lay, target.live)
    assert empty.cycles == 1


def test_sato_on_64x32_random_inputs(rng):
    target = fame_style_array()
    arr, lay = target.array, target.layout
    faults = FaultMap.of([(10, 0), (40, 15)])
    plan = plan_sato(arr, diagnose(arr, faults), lay, target.live)
    assert plan.fixable
    x = rng.integers(0, 2, (2000, arr.n_inputs))
    assert np.array_equal(apply_sato(arr, faults, plan, x), golden_outputs(arr, x, target.live))


def test_slice_periodicity():
    plan = replicate_slices(compile_function(XOR, Style.NAND_NAND), 3)
    assert slice_periodicity(plan.first[0].program, 2) == (True, None)
    prog = plan.first[0].program.copy()
    prog[0, 4] = True                       # slice 2 reaching into slice 0's wordlines
    ok, col = slice_periodicity(prog, 2)
    assert not ok and col == 4
    rand = np.random.default_rng(3).random((12, 6)) < 0.5
    assert not slice_periodicity(rand, 2)[0]
    arr = CrossbarArray(12, 6, PlaneKind.AND, SaPolarity.INVERTING, rand,
                        complement_pairing(6))
    with pytest.raises(SatoPreconditionError):
        plan_sato(arr, diagnose(arr, FaultMap()), 2)


# -- activity --------------------------------------------------------------------------

def test_activity_counts():
    target = fame_style_array(cols=32)
    base = activity_report(None, n_bitlines=32)
    assert base["sa_activations"] == 32 and base["cycles"] == 1
    arr = literal_array(["1-"] * 32, 2)
    faults = FaultMap.of([(2, c) for c in range(5)])
    ftv = activity_report(plan_ftv(arr, diagnose(arr, faults)))
    assert ftv["activations_per_cycle"] == [27, 5] and ftv["sa_activations"] == 32
    assert ftv["cycles"] == 2
    t = target.array
    one_set = FaultMap.of([(10, 0)])
    live = tuple(range(32))
    sato = activity_report(plan_sato(t, diagnose(t, one_set), target.layout, live))
    assert sato["sa_activations"] == 32 + 3 and sato["latch_shifts"] == 3
    assert sato["cycles"] == 2
    assert activity_report(None, n_ops=4, n_bitlines=32)["sa_activations"] == 128


# -- campaigns ---------------------------------------------------------------------------

def test_fame_style_array_layout():
    target = fame_style_array()
    assert (target.array.rows, target.array.cols) == (64, 32)
    assert target.layout == SliceLayout(3, 6, 10)
    assert target.live == tuple(range(30))
    assert slice_periodicity(target.array.program, target.layout)[0]


def test_perfect_yield_is_fully_covered():
    target = fame_style_array()
    for mit in ("SATO", "FTV"):
        rep = coverage_mc(target, mit, 20, seed=1, model=YieldModel.from_yield(1.0))
        assert rep.fixable_array_rate == 1.0 and rep.fixable_fault_rate == 1.0


def test_coverage_is_seed_deterministic_and_job_independent():
    target = fame_style_array()
    model = YieldModel.from_yield(0.995)
    a = coverage_mc(target, "SATO", 40, seed=5, model=model)
    b = coverage_mc(target, "SATO", 40, seed=5, model=model)
    c = coverage_mc(target, "SATO", 40, seed=5, model=model, jobs=2)
    assert a.to_json() == b.to_json() == c.to_json()
    assert a.to_csv() == c.to_csv()
    d = json.loads(a.to_json())
    assert d["schema_version"] == 1 and len(d["records"]) == 40
    assert all(r["diagnosis_exact"] for r in d["records"])
    assert coverage_mc(target, "SATO", 40, seed=6, model=model).to_json() != a.to_json()


def test_coverage_argument_errors():
    target = fame_style_array()
    with pytest.raises(ValueError):
        coverage_mc(target, "SATO", 0, count=3)
    with pytest.raises(ValueError):
        coverage_mc(target, "SATO", 5)
    with pytest.raises(ValueError):
        coverage_mc(target, "BOGUS", 5, count=3)


def test_consecutive_fault_prob_extremes():
    target = fame_style_array()
    assert consecutive_fault_prob(target, YieldModel.from_yield(1.0), 50).estimate == 0
    assert consecutive_fault_prob(target, YieldModel.from_yield(0.5), 50).estimate == 1


def test_fault_free_prob_closed_form():
    assert fault_free_prob(0.99, 2048) == pytest.approx(math.exp(2048 * math.log1p(-0.01)))
    assert 1.0e-9 <= fault_free_prob(0.99, 2048) <= 1.3e-9
    assert fault_free_prob(0.995, 2048) == pytest.approx(3.5e-5, rel=0.02)
    assert fault_free_prob(1.0, 12345) == 1.0
    with pytest.raises(ValueError):
        fault_free_prob(1.5, 3)


@given(st.floats(0.9, 1.0), st.integers(0, 256))
def test_fault_free_prob_is_power(y, n):
    assert fault_free_prob(y, n) == pytest.approx(y ** n)
