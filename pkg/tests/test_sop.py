import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imcfp.crossbar import PlaneKind, SaPolarity, program_cell, CellState
from imcfp.sop import (DC, MAX_EXACT_INPUTS, Budgets, BoolFunc, CapacityError, PlaParseError,
                       Style, compile_function, format_pla, input_space, load_plans, minimize,
                       parse_pla, partition, replicate_slices, save_plans, verify_mapping)

XOR = BoolFunc.from_callable(2, 1, lambda a, b: [a ^ b])
MAJ = BoolFunc.from_callable(3, 1, lambda a, b, c: [(a & b) | (a & c) | (b & c)])


@st.composite
def functions(draw, max_n=5, max_m=3, dont_cares=True):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    vals = [0, 1, DC] if dont_cares else [0, 1]
    table = draw(st.lists(st.lists(st.sampled_from(vals), min_size=m, max_size=m),
                          min_size=1 << n, max_size=1 << n))
    return BoolFunc(n, m, np.array(table, dtype=np.uint8))


def truth(f: BoolFunc, x) -> np.ndarray:
    idx = int("".join(str(int(b)) for b in x), 2)
    return f.table[idx]


def test_input_space_msb_first():
    assert input_space(2).tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]


def test_known_minimizations():
    assert sorted(minimize(XOR).cubes) == ["01", "10"]
    assert sorted(minimize(BoolFunc.from_callable(2, 1, lambda a, b: [a & b])).cubes) == ["11"]
    assert sorted(minimize(MAJ).cubes) == ["-11", "1-1", "11-"]


@given(functions())
def test_cover_is_exact_on_care_rows(f):
    cover = minimize(f)
    assert cover.matches(f)
    for x in input_space(f.n):
        want = truth(f, x)
        got = [int(any(all(ch == "-" or int(ch) == b for ch, b in zip(cube, x))
                       for cube, outs in zip(cover.cubes, cover.outputs) if j in outs))
               for j in range(f.m)]
        assert all(w == DC or w == g for w, g in zip(want, got))


@given(functions(max_n=4), st.sampled_from(list(Style)))
def test_compiled_plans_verify_exhaustively(f, style):
    plan = compile_function(f, style)
    assert verify_mapping(plan, f).ok


@given(functions(max_n=4, dont_cares=False))
def test_both_styles_agree(f):
    x = input_space(f.n)
    a = compile_function(f, Style.NAND_NAND).evaluate(x)
    b = compile_function(f, Style.NOR_NOR).evaluate(x)
    assert np.array_equal(a, b)
    assert np.array_equal(a, f.table)


def test_xor_nand_layout():
    plan = compile_function(XOR, Style.NAND_NAND)
    first = plan.first[0]
    assert (first.rows, first.cols) == (4, 2)
    assert first.plane is PlaneKind.AND and first.polarity is SaPolarity.INVERTING
    cells = {tuple(sorted(np.flatnonzero(first.program[:, c]).tolist())) for c in range(2)}
    # x~y uses t0,c1 = rows 0,3 ; ~xy uses c0,t1 = rows 1,2
    assert cells == {(0, 3), (1, 2)}


def test_nor_style_uses_or_planes():
    plan = compile_function(MAJ, Style.NOR_NOR)
    assert all(a.plane is PlaneKind.OR for a in plan.arrays())


def test_constant_outputs():
    one = BoolFunc(2, 1, np.ones((4, 1), np.uint8))
    zero = BoolFunc(2, 1, np.zeros((4, 1), np.uint8))
    for f in (one, zero):
        for style in Style:
            assert verify_mapping(compile_function(f, style), f).ok


def test_broken_plan_gives_counterexample():
    plan = compile_function(MAJ, Style.NAND_NAND)
    first = plan.first[0]
    r, c = map(int, np.argwhere(first.program)[0])
    plan.first[0] = program_cell(first, r, c, CellState.HRS)
    res = verify_mapping(plan, MAJ)
    assert not res.ok
    x, want, got = res.counterexample
    assert list(want) == truth(MAJ, x).tolist() and want != got


def test_partition_order_preserving():
    f = BoolFunc.from_vectorized(5, 1, lambda x: (x.sum(axis=1) % 2)[:, None])
    cover = minimize(f)
    parts = partition(cover, 3)
    assert [c for p in parts for c in p.cubes] == cover.cubes
    assert all(len(p) <= 3 for p in parts)
    assert len(partition(cover, 64)) == 1


def test_capacity_split_and_no_partition_error():
    f = BoolFunc.from_vectorized(5, 1, lambda x: (x.sum(axis=1) % 2)[:, None])  # 16 terms
    plan = compile_function(f, Style.NAND_NAND, Budgets(first=(64, 10), second=(64, 64)))
    assert len(plan.first) == 2 and verify_mapping(plan, f).ok
    with pytest.raises(CapacityError):
        compile_function(f, Style.NAND_NAND,
                         Budgets(first=(64, 10), second=(64, 64), allow_partition=False))


def test_too_many_inputs_rejected():
    n = MAX_EXACT_INPUTS + 1
    f = BoolFunc(n, 1, np.zeros((1 << n, 1), np.uint8))
    with pytest.raises(CapacityError):
        minimize(f)


def test_replicated_slices_are_periodic_and_correct():
    plan = compile_function(XOR, Style.NAND_NAND)
    rep = replicate_slices(plan, 3)
    a = rep.first[0]
    assert np.array_equal(a.program[0:4, 0:2], a.program[4:8, 2:4])
    x = input_space(6)
    got = rep.evaluate(x)
    want = np.stack([x[:, 2 * k] ^ x[:, 2 * k + 1] for k in range(3)], axis=1)
    assert np.array_equal(got, want)
    assert replicate_slices(plan, 1).first[0] == plan.first[0]
    with pytest.raises(CapacityError):
        replicate_slices(plan, 40, max_cols=64)


def test_deterministic_compilation():
    a = compile_function(MAJ, Style.NOR_NOR)
    b = compile_function(MAJ, Style.NOR_NOR)
    assert [x == y for x, y in zip(a.arrays(), b.arrays())] == [True] * len(a.arrays())


@given(functions(max_n=4))
def test_pla_roundtrip(f):
    g = parse_pla(format_pla(f))
    assert np.array_equal(g.table, f.table)


def test_pla_cube_expansion_and_errors():
    f = parse_pla(".i 3\n.o 1\n1-1 1\n.e\n")
    assert [int(v) for v in f.table[:, 0]] == [0, 0, 0, 0, 0, 1, 0, 1]
    for bad in (".i 2\n.o 1\n1x 1\n", ".o 1\n11 1\n", ".i 2\n.o 1\n111 1\n"):
        with pytest.raises(PlaParseError):
            parse_pla(bad)


def test_save_load_plans(tmp_path):
    plans = {"Fraction Addition": [compile_function(MAJ, Style.NAND_NAND, name="maj")],
             "Right Shift": [compile_function(XOR, Style.NOR_NOR, name="xor")]}
    save_plans(plans, str(tmp_path))
    back = load_plans(str(tmp_path))
    for stage, ps in plans.items():
        for p, q in zip(ps, back[stage]):
            x = input_space(p.n_inputs)
            assert np.array_equal(p.evaluate(x), q.evaluate(x))
            assert all(a == b for a, b in zip(p.arrays(), q.arrays()))
