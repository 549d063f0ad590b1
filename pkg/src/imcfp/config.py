"""Experiment configuration: JSON files, named presets and ``--key=value`` overrides."""
from __future__ import annotations

import json
import math
from importlib import resources
from typing import Iterable, Optional

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


# key -> (default, allowed types, check or None)
_FIELDS = {
    "schema_version": (SCHEMA_VERSION, (int,), lambda v: v == SCHEMA_VERSION),
    "rows": (64, (int,), lambda v: v >= 2),
    "cols": (32, (int,), lambda v: v >= 1),
    "slice_width": (3, (int,), lambda v: v >= 1),
    "cell_yield": (0.995, (float, int), lambda v: 0 <= v <= 1),
    "fault_count": (None, (int, type(None)), lambda v: v is None or v >= 0),
    "mitigation": ("SATO", (str,), lambda v: v in ("SATO", "FTV")),
    "trials": (1000, (int,), lambda v: v >= 1),
    "seed": (0, (int,), lambda v: v >= 0),
    "jobs": (1, (int,), lambda v: v >= 1),
    "style": ("nand-nand", (str,), lambda v: v in ("nand-nand", "nor-nor")),
    "mode": ("rne", (str,), lambda v: v in ("rne", "truncate")),
    "fidelity": ("functional", (str,), lambda v: v in ("functional", "mapped")),
    "r_lrs": (58.9e3, (float, int), lambda v: v > 0),
    "r_hrs": (6.68e6, (float, int), lambda v: v > 0),
    "vdd": (1.2, (float, int), lambda v: v > 0),
    "vref": (None, (float, int, type(None)), None),
    "diode_vth": (None, (float, int, type(None)), lambda v: v is None or v >= 0),
    "k_max": (30, (int,), lambda v: v >= 0),
    "sigma_lrs": (0.1, (float, int), lambda v: v >= 0),
    "sigma_hrs": (math.log(10) / 3, (float, int), lambda v: v >= 0),
    "mc_samples": (0, (int,), lambda v: v == 0 or v >= 100),
    "out": (None, (str, type(None)), None),
    "csv": (None, (str, type(None)), None),
}


def defaults() -> dict:
    return {k: v[0] for k, v in _FIELDS.items()}


def validate(cfg: dict) -> dict:
    unknown = sorted(set(cfg) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    out = defaults()
    out.update(cfg)
    for key, (_, types, check) in _FIELDS.items():
        v = out[key]
        if isinstance(v, bool) or not isinstance(v, types):
            raise ConfigError(f"{key}: bad type {type(v).__name__}")
        if check is not None and not check(v):
            raise ConfigError(f"{key}: value {v!r} out of range")
    if out["r_hrs"] <= out["r_lrs"]:
        raise ConfigError("r_hrs must exceed r_lrs")
    if out["vref"] is not None and not 0 < out["vref"] < out["vdd"]:
        raise ConfigError("vref must lie strictly between 0 and vdd")
    if out["diode_vth"] is not None and out["diode_vth"] >= out["vdd"]:
        raise ConfigError("diode_vth must be below vdd")
    return out


def _coerce(key: str, text: str):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key: {key}")
    if text.lower() in ("null", "none"):
        return None
    types = _FIELDS[key][1]
    if str in types:
        return text
    try:
        v = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r}") from exc
    if float in types and isinstance(v, int):
        v = float(v)
    return v


def parse_overrides(items: Iterable[str]) -> dict:
    out = {}
    for item in items:
        if not item.startswith("--") or "=" not in item:
            raise ConfigError(f"expected --key=value, got {item!r}")
        key, text = item[2:].split("=", 1)
        key = key.replace("-", "_")
        out[key] = _coerce(key, text)
    return out


def preset_names() -> list[str]:
    files = resources.files("imcfp").joinpath("presets").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def load_preset(name: str) -> dict:
    path = resources.files("imcfp").joinpath("presets", f"{name}.json")
    if not path.is_file():
        raise ConfigError(f"no preset named {name!r}; known: {', '.join(preset_names())}")
    return json.loads(path.read_text())


def load_config(path: Optional[str] = None, preset: Optional[str] = None,
                overrides: Optional[dict] = None) -> dict:
    cfg = {}
    if preset:
        cfg.update(load_preset(preset))
    if path:
        try:
            with open(path) as fh:
                cfg.update(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    cfg.update(overrides or {})
    return validate(cfg)
