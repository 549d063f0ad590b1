"""Compile XOR onto a NAND-NAND crossbar, break it, find the fault and repair it.

    python demos/xor_fault_walkthrough.py
"""
import numpy as np

from imcfp.crossbar import run_array
from imcfp.faults import (FaultMap, SliceLayout, apply_ftv, apply_sato, diagnose, effective_matrix,
                          golden_outputs, plan_ftv, plan_sato)
from imcfp.sop import BoolFunc, Style, compile_function, input_space, replicate_slices

xor = BoolFunc.from_callable(2, 1, lambda a, b: [a ^ b])
plan = compile_function(xor, Style.NAND_NAND, name="xor")
first = plan.first[0]
print("first-level array (rows = wordlines t0 c0 t1 c1, 1 = LRS):")
print(first.program.astype(int))

# two copies of the XOR slice side by side, as in a bit-sliced datapath
sliced = replicate_slices(plan, 2).first[0]
layout = SliceLayout(first.cols, first.rows, 2)
x = input_space(sliced.n_inputs)

faults = FaultMap.of([(1, 0)])              # complement of input 0 leaks into bitline 0
broken = run_array(sliced, x, effective_matrix(sliced.program, faults))
golden = golden_outputs(sliced, x)
print(f"\nwith fault {sorted(faults.cells)}: {int((broken != golden).any(axis=1).sum())} of "
      f"{len(x)} input vectors give a wrong product term")

diag = diagnose(sliced, faults)
print(f"diagnosis: faulty bitlines {np.flatnonzero(diag.faulty_bitlines).tolist()}, "
      f"located {sorted(diag.located.cells)}, {diag.steps} test steps")

ftv = plan_ftv(sliced, diag)
print(f"\nFTV: fixable={ftv.fixable} {ftv.reason}".rstrip())
sato = plan_sato(sliced, diag, layout)
print(f"SATO: remap {sato.remap}, {sato.latch_shifts} latch shifts")
print("SATO merged output correct on all inputs:",
      np.array_equal(apply_sato(sliced, faults, sato, x), golden))

spectator = FaultMap.of([(5, 0)])           # a wordline of the other slice
ftv = plan_ftv(sliced, diagnose(sliced, spectator))
print(f"\nfault on a wordline bitline 0 never reads: FTV forces {list(ftv.forced_wordlines)} high,",
      "correct:", np.array_equal(apply_ftv(sliced, spectator, ftv, x), golden))
