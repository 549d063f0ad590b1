"""Sense margin of a 64-row NAND bitline as undesired-LRS faults pile up.

    python demos/sense_margin_sweep.py
"""
from imcfp.analog import DeviceParams, VariationParams, default_vref, mc_sense_margin, sm_vs_faults

plain = DeviceParams()
diode = plain.with_diode(0.5)
print(f"reference voltage {default_vref(plain):.4f} V, "
      f"diode floor {1e3 * (default_vref(plain) - (diode.vdd - diode.diode_vth)):.1f} mV")
print(f"{'k':>3} {'no diode (mV)':>14} {'diode (mV)':>11}")
for (k, sm), (_, smd) in zip(sm_vs_faults(range(0, 31, 3), plain), sm_vs_faults(range(0, 31, 3), diode)):
    print(f"{k:>3} {sm:>14.1f} {smd:>11.1f}")

var = VariationParams(seed=1)
for name, params in (("no diode", plain), ("diode", diode)):
    s = mc_sense_margin(params, var, 10, 2000)
    print(f"k=10 under variation, {name}: mean {s['mean']:.1f} mV, std {s['std']:.2f} mV, "
          f"min {s['min']:.1f} mV")
