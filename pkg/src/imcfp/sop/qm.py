"""Quine-McCluskey prime generation with a deterministic greedy cover."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boolfunc import DC, BoolFunc, input_space

MAX_EXACT_INPUTS = 12


class CapacityError(ValueError):
    """A function or cover is too large for the requested operation."""


@dataclass
class CubeCover:
    """Product terms over ``n`` inputs; ``outputs[k]`` lists the outputs using cube ``k``."""

    n: int
    m: int
    cubes: list[str] = field(default_factory=list)
    outputs: list[frozenset] = field(default_factory=list)

    def __len__(self):
        return len(self.cubes)

    def term_values(self, x: np.ndarray) -> np.ndarray:
        """``(N, n)`` bits -> ``(N, len(cubes))`` cube values."""
        x = np.asarray(x, dtype=np.uint8)
        vals = np.ones((x.shape[0], len(self.cubes)), dtype=bool)
        for k, cube in enumerate(self.cubes):
            for i, ch in enumerate(cube):
                if ch != "-":
                    vals[:, k] &= x[:, i] == int(ch)
        return vals

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        terms = self.term_values(x)
        out = np.zeros((terms.shape[0], self.m), dtype=np.uint8)
        for k, outs in enumerate(self.outputs):
            for j in outs:
                out[:, j] |= terms[:, k]
        return out

    def matches(self, f: BoolFunc) -> bool:
        got = self.evaluate(input_space(f.n))
        care = f.table != DC
        return bool(np.array_equal(got[care], f.table[care]))


def _cube_string(value: int, mask: int, n: int) -> str:
    chars = []
    for i in range(n):
        bit = 1 << (n - 1 - i)
        chars.append("-" if mask & bit else ("1" if value & bit else "0"))
    return "".join(chars)


def prime_implicants(n: int, on: set[int], dc: set[int]) -> list[tuple[int, int]]:
    """All prime implicants as ``(value, dc_mask)`` pairs."""
    current = {(v, 0) for v in on | dc}
    primes = set()
    while current:
        merged = set()
        nxt = set()
        for value, mask in current:
            for b in range(n):
                bit = 1 << b
                if mask & bit or value & bit:
                    continue
                partner = (value | bit, mask)
                if partner in current:
                    nxt.add((value, mask | bit))
                    merged.add((value, mask))
                    merged.add(partner)
        primes |= current - merged
        current = nxt
    return sorted(primes)


def _covered(value: int, mask: int, n: int) -> list[int]:
    free = [1 << b for b in range(n) if mask & (1 << b)]
    out = []
    for k in range(1 << len(free)):
        v = value
        for j, bit in enumerate(free):
            if k >> j & 1:
                v |= bit
        out.append(v)
    return out


def minimize_single(n: int, on: set[int], dc: set[int]) -> list[str]:
    if not on:
        return []
    primes = prime_implicants(n, on, dc)
    covers = {}
    for value, mask in primes:
        hit = frozenset(m for m in _covered(value, mask, n) if m in on)
        if hit:
            covers[_cube_string(value, mask, n)] = hit
    uncovered = set(on)
    chosen = []
    while uncovered:
        # most new minterms, then larger cube, then lexicographically smallest
        best = min(covers, key=lambda c: (-len(covers[c] & uncovered), -c.count("-"), c))
        chosen.append(best)
        uncovered -= covers.pop(best)
    return chosen


def minimize(f: BoolFunc) -> CubeCover:
    """Per-output exact primes + greedy cover; identical cubes shared across outputs."""
    if f.n > MAX_EXACT_INPUTS:
        raise CapacityError(
            f"{f.n} inputs exceeds the exact-minimization limit of {MAX_EXACT_INPUTS}; "
            "decompose the function first")
    tags: dict[str, set] = {}
    for j in range(f.m):
        col = f.table[:, j]
        on = set(np.flatnonzero(col == 1).tolist())
        dc = set(np.flatnonzero(col == DC).tolist())
        for cube in minimize_single(f.n, on, dc):
            tags.setdefault(cube, set()).add(j)
    cubes = sorted(tags, reverse=True)
    return CubeCover(f.n, f.m, cubes, [frozenset(tags[c]) for c in cubes])
