"""Add a few floats through the crossbar-mapped datapath and watch the pipeline slow down.

    python demos/fp_adder_tour.py
"""
import numpy as np

from imcfp.datapath import fp_add, pipeline_run, stage_names
from imcfp.datapath.fp32 import Rounding, bits_to_float, float_to_bits

pairs = [(1.5, 2.25, "add"), (1.0, 1.0, "sub"), (3.4e38, 3.4e38, "add"),
         (1.0, 2.0 ** -24, "add"), (1.5 * 2.0 ** -126, 2.0 ** -126, "sub")]
for a, b, op in pairs:
    for mode in Rounding:
        word, flags = fp_add(float_to_bits(a), float_to_bits(b), op, mode, fidelity="mapped")
        print(f"{a:>12.6g} {op} {b:<12.6g} [{mode.value:8s}] -> {bits_to_float(word):<14.8g} "
              f"{word:08x} flags={flags}")

ops = [(float_to_bits(float(i)), float_to_bits(0.25), "add") for i in range(32)]
base = pipeline_run(ops)
print(f"\nstages: {', '.join(stage_names(Rounding.RNE))}")
print(f"baseline: {base.cycles} cycles for {len(ops)} ops, interval {base.measured_interval:.2f}")
for mitigated in (["Fraction Addition"], stage_names(Rounding.RNE)):
    run = pipeline_run(ops, mitigated)
    print(f"two-cycle mitigation on {len(mitigated)} stage(s): {run.cycles} cycles, "
          f"interval {run.measured_interval:.2f}")
assert np.array_equal([o[0] for o in run.outputs], [o[0] for o in base.outputs])
