"""Cycle-level stage scheduling with sense-amp latches between stages."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional


@dataclass
class _Slot:
    item: int
    state: object
    remaining: int


@dataclass
class PipelineRun:
    outputs: list
    cycles: int
    completion_cycles: list[int]
    stage_cycles: list[int]

    @property
    def depth(self) -> int:
        return len(self.stage_cycles)

    @property
    def initiation_interval(self) -> int:
        """Steady-state cycles between completions (the slowest stage)."""
        return max(self.stage_cycles)

    @property
    def measured_interval(self) -> Optional[float]:
        c = self.completion_cycles
        if len(c) < 2:
            return None
        return (c[-1] - c[0]) / (len(c) - 1)


@dataclass
class Pipeline:
    """Stages advance on explicit :meth:`step` calls.

    A stage holds one operation for ``stage_cycles[i]`` cycles (2 when a
    two-cycle fault mitigation runs on its arrays) and hands it on only when
    the next stage's latch is free.
    """

    stages: list[tuple[str, Callable]]
    stage_cycles: list[int] = None
    cycle: int = 0
    slots: list = field(default_factory=list)
    _pending: deque = field(default_factory=deque)
    _done: list = field(default_factory=list)

    def __post_init__(self):
        if self.stage_cycles is None:
            self.stage_cycles = [1] * len(self.stages)
        if len(self.stage_cycles) != len(self.stages):
            raise ValueError("one cycle count per stage required")
        self.slots = [None] * len(self.stages)

    @classmethod
    def with_mitigation(cls, stages, mitigated: Iterable[str] | Mapping[str, bool] = ()):
        names = set(k for k, v in mitigated.items() if v) if isinstance(mitigated, Mapping) \
            else set(mitigated)
        return cls(stages, [2 if name in names else 1 for name, _ in stages])

    @property
    def occupancy(self) -> list[bool]:
        return [s is not None for s in self.slots]

    def issue(self, state) -> None:
        self._pending.append(state)

    def busy(self) -> bool:
        return bool(self._pending) or any(self.occupancy)

    def step(self) -> None:
        last = len(self.slots) - 1
        for i in range(last, -1, -1):
            slot = self.slots[i]
            if slot is None or slot.remaining:
                continue
            if i == last:
                self._done.append((slot.item, slot.state, self.cycle))
                self.slots[i] = None
            elif self.slots[i + 1] is None:
                self.slots[i + 1] = self._enter(i + 1, slot.item, slot.state)
                self.slots[i] = None
        if self.slots[0] is None and self._pending:
            item, state = self._pending.popleft()
            self.slots[0] = self._enter(0, item, state)
        for slot in self.slots:
            # a finished operation waiting on a busy successor stays at zero
            if slot is not None and slot.remaining:
                slot.remaining -= 1
        self.cycle += 1

    def _enter(self, i, item, state) -> _Slot:
        return _Slot(item, self.stages[i][1](state), self.stage_cycles[i])

    def run(self, states: Iterable) -> PipelineRun:
        for k, s in enumerate(states):
            self.issue((k, s))
        if not self._pending:
            raise ValueError("empty operation stream")
        while self.busy():
            self.step()
        done = sorted(self._done, key=lambda d: d[0])
        # an operation leaves at the start of the cycle after its last busy cycle
        finish = [c for _, _, c in done]
        return PipelineRun([s for _, s, _ in done], max(finish), finish, list(self.stage_cycles))
