"""Two-level logic compiler targeting NAND-NAND / NOR-NOR crossbar pairs."""
from .boolfunc import DC, BoolFunc, PlaParseError, format_pla, input_space, parse_pla
from .mapping import (Budgets, CapacityEntry, MappingPlan, Style, VerifyResult, compile_function,
                      load_plans, map_two_level, partition, place, replicate_slices, save_plans,
                      verify_mapping)
from .qm import MAX_EXACT_INPUTS, CapacityError, CubeCover, minimize

__all__ = [
    "DC", "BoolFunc", "PlaParseError", "format_pla", "input_space", "parse_pla",
    "Budgets", "CapacityEntry", "MappingPlan", "Style", "VerifyResult", "compile_function",
    "load_plans", "map_two_level", "partition", "place", "replicate_slices", "save_plans",
    "verify_mapping", "MAX_EXACT_INPUTS", "CapacityError", "CubeCover", "minimize",
]
