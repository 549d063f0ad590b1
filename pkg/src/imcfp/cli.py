"""Command-line front end.

Exit codes: 0 success, 1 result mismatch, 2 usage or parse error,
3 contract violation.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .config import SCHEMA_VERSION, ConfigError, load_config, parse_overrides, preset_names
from .crossbar import CrossbarError, loads as load_array

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_CONTRACT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _write(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _report(command: str, config: dict, results: dict, started: float) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "tool_version": __version__, "command": command,
           "config": config, "results": results, "wall_clock_s": round(time.time() - started, 3)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


# -- compile -------------------------------------------------------------------

def cmd_compile(args) -> int:
    from .sop import Style, compile_function, parse_pla, save_plans, verify_mapping
    style = Style(args.style)
    if args.fame:
        from .datapath.fp32 import Rounding
        from .datapath.inventory import datapath_inventory
        inv = datapath_inventory(Rounding(args.mode), style)
        print(inv.table())
        return EXIT_OK
    if not args.pla:
        raise UsageError("compile needs a PLA file or --fame")
    f = parse_pla(_read(args.pla))
    name = os.path.splitext(os.path.basename(args.pla))[0]
    plan = compile_function(f, style, name=name)
    for c in plan.capacity:
        flag = "ok" if c.ok else "OVER"
        print(f"{c.name}: {c.rows}x{c.cols} of {c.budget_rows}x{c.budget_cols} {flag}")
    result = verify_mapping(plan, f)
    if args.out:
        save_plans({name: [plan]}, args.out)
        print(f"wrote {len(plan.arrays())} arrays to {args.out}")
    if not result.ok:
        x, want, got = result.counterexample
        print(f"verification FAILED at input {x}: expected {want}, got {got}")
        return EXIT_MISMATCH
    print("verification passed")
    return EXIT_OK


# -- fp --------------------------------------------------------------------------

def cmd_fp(args) -> int:
    from .datapath import fp_add_batch
    from .datapath.fp32 import Rounding
    from .datapath.vectors import format_results, parse_vectors, run_vectors
    from .sop import Style
    mode, style = Rounding(args.mode), Style(args.style)
    if args.random:
        rng = np.random.Generator(np.random.Philox(args.seed))
        a = rng.integers(0, 1 << 32, args.random, dtype=np.uint64)
        b = rng.integers(0, 1 << 32, args.random, dtype=np.uint64)
        sub = rng.integers(0, 2, args.random).astype(bool)
        wf, ff = fp_add_batch(a, b, sub, mode, "functional")
        wm, fm = fp_add_batch(a, b, sub, mode, "mapped", style)
        bad = int(((wf != wm) | (ff != fm)).sum())
        print(f"mapped vs functional on {args.random} random pairs: {bad} mismatches")
        return EXIT_MISMATCH if bad else EXIT_OK
    if not args.vectors:
        raise UsageError("fp needs a vector file or --random N")
    results = run_vectors(parse_vectors(_read(args.vectors)), mode, args.fidelity, style)
    _write(args.out, format_results(results))
    bad = [r for r in results if r.mismatch]
    for r in bad:
        print(f"MISMATCH {r.line()}", file=sys.stderr)
    print(f"{len(results)} vectors, {len(bad)} mismatches", file=sys.stderr)
    return EXIT_MISMATCH if bad else EXIT_OK


# -- coverage --------------------------------------------------------------------

def _config(args, **flags) -> dict:
    overrides = parse_overrides(args.overrides)
    for key, value in flags.items():
        if value is not None:
            overrides[key] = value
    return load_config(args.config, args.preset, overrides)


def cmd_coverage(args) -> int:
    from .faults import YieldModel, consecutive_fault_prob, coverage_mc, fame_style_array
    from .sop import Style
    started = time.time()
    cfg = _config(args, seed=args.seed, trials=args.trials, jobs=args.jobs, out=args.out)
    target = fame_style_array(cfg["rows"], cfg["cols"], cfg["slice_width"], Style(cfg["style"]))
    kw = ({"count": cfg["fault_count"]} if cfg["fault_count"] is not None
          else {"model": YieldModel.from_yield(cfg["cell_yield"], cfg["seed"])})
    report = coverage_mc(target, cfg["mitigation"], cfg["trials"], cfg["seed"], jobs=cfg["jobs"], **kw)
    print(report.summary())
    results = json.loads(report.to_json())
    if cfg["fault_count"] is None:
        est = consecutive_fault_prob(target, YieldModel.from_yield(cfg["cell_yield"]),
                                     cfg["trials"], cfg["seed"])
        results["adjacent_faulty_sets"] = {"estimate": est.estimate, "ci": list(est.ci)}
        print(f"  adjacent faulty sets {est.estimate:.4f} [{est.ci[0]:.4f}, {est.ci[1]:.4f}]")
    if cfg["out"]:
        _write(cfg["out"], _report("coverage", cfg, results, started))
    if cfg["csv"]:
        _write(cfg["csv"], report.to_csv())
    return EXIT_OK


# -- diagnose --------------------------------------------------------------------

def cmd_diagnose(args) -> int:
    from .faults import diagnose, loads_faults
    array = load_array(_read(args.array))
    faults = loads_faults(_read(args.faults))
    faults.validate(array)
    d = diagnose(array, faults)
    doc = {"schema_version": SCHEMA_VERSION,
           "faulty_bitlines": np.flatnonzero(d.faulty_bitlines).tolist(),
           "faulty_wordlines": np.flatnonzero(d.faulty_wordlines).tolist(),
           "located": [list(c) for c in d.located], "steps": d.steps,
           "step_formula": array.cols + array.rows * int(d.faulty_bitlines.sum())}
    _write(args.out, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if d.located == faults else EXIT_MISMATCH


# -- analog ----------------------------------------------------------------------

def cmd_analog(args) -> int:
    from .analog import DeviceParams, VariationParams, curve_csv, mc_sense_margin, sm_vs_faults
    cfg = _config(args, seed=args.seed, out=args.out)
    params = DeviceParams(cfg["r_lrs"], cfg["r_hrs"], cfg["vdd"], cfg["vref"], cfg["diode_vth"],
                          cfg["rows"])
    ks = range(cfg["k_max"] + 1)
    if cfg["mc_samples"]:
        var = VariationParams(cfg["sigma_lrs"], cfg["sigma_hrs"], cfg["seed"])
        rows = [tuple(mc_sense_margin(params, var, k, cfg["mc_samples"])[c]
                      for c in ("k", "mean", "std", "min")) for k in ks]
        text = curve_csv(rows, ["k", "mean", "std", "min"])
    else:
        text = curve_csv(sm_vs_faults(ks, params), ["k", "sm_mv"])
    _write(cfg["out"], text)
    return EXIT_OK


# -- yieldmath -------------------------------------------------------------------

def cmd_yieldmath(args) -> int:
    from .faults import binomial_sigma, fault_free_mc, fault_free_prob
    if not 0 <= args.cell_yield <= 1 or args.cells < 0:
        raise UsageError("yield must lie in [0, 1] and cells must be >= 0")
    print(f"exact   P(all {args.cells} cells healthy) = {fault_free_prob(args.cell_yield, args.cells):.6e}")
    if args.mc_trials:
        p = fault_free_prob(args.cell_yield, args.mc_cells)
        est = fault_free_mc(args.cell_yield, args.mc_cells, args.mc_trials, args.seed)
        z = (est.estimate - p) / max(binomial_sigma(p, args.mc_trials), 1e-300)
        print(f"MC      {args.mc_trials} trials on {args.mc_cells} cells: {est.estimate:.6e} "
              f"(exact {p:.6e}, {z:+.2f} sigma)")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="imcfp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a PLA to crossbar arrays, or show the datapath inventory")
    c.add_argument("pla", nargs="?")
    c.add_argument("--style", choices=["nand-nand", "nor-nor"], default="nand-nand")
    c.add_argument("--out", help="directory for array files and index.txt")
    c.add_argument("--fame", action="store_true", help="print the FP datapath array inventory")
    c.add_argument("--mode", choices=["rne", "truncate"], default="truncate")
    c.set_defaults(fn=cmd_compile)

    f = sub.add_parser("fp", help="run add/sub test vectors")
    f.add_argument("vectors", nargs="?")
    f.add_argument("--mode", choices=["rne", "truncate"], default="rne")
    f.add_argument("--fidelity", choices=["functional", "mapped"], default="functional")
    f.add_argument("--style", choices=["nand-nand", "nor-nor"], default="nand-nand")
    f.add_argument("--random", type=int, default=0, metavar="N",
                   help="compare mapped against functional on N random pairs")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out")
    f.set_defaults(fn=cmd_fp)

    for name, fn, helptext in (("coverage", cmd_coverage, "Monte Carlo mitigation coverage"),
                               ("analog", cmd_analog, "sense-margin curves as CSV")):
        s = sub.add_parser(name, help=helptext,
                           epilog="any config key can be overridden with --key=value")
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--preset", help=f"named preset ({', '.join(preset_names())})")
        s.add_argument("--seed", type=int)
        s.add_argument("--out")
        if name == "coverage":
            s.add_argument("--trials", type=int)
            s.add_argument("--jobs", type=int)
        s.set_defaults(fn=fn)

    d = sub.add_parser("diagnose", help="run the built-in test on an array with a fault file")
    d.add_argument("array")
    d.add_argument("faults")
    d.add_argument("--out")
    d.set_defaults(fn=cmd_diagnose)

    y = sub.add_parser("yieldmath", help="probability that a block of cells is fault-free")
    y.add_argument("cell_yield", type=float)
    y.add_argument("cells", type=int)
    y.add_argument("--mc-trials", type=int, default=0)
    y.add_argument("--mc-cells", type=int, default=256)
    y.add_argument("--seed", type=int, default=0)
    y.set_defaults(fn=cmd_yieldmath)
    return p


def main(argv=None) -> int:
    from .datapath.vectors import VectorParseError
    from .faults import FaultError, MitigationError
    from .sop import CapacityError, PlaParseError
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command in ("coverage", "analog"):
        args.overrides = extra
    elif extra:
        print(f"imcfp: unrecognized arguments: {' '.join(extra)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except (UsageError, ConfigError, PlaParseError, VectorParseError) as exc:
        print(f"imcfp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FaultError, MitigationError, CapacityError, CrossbarError) as exc:
        print(f"imcfp: contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
