"""Query metering and structured experiment reports."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field


class QueryMeter:
    """Per-experiment accumulator of symbolic oracle-query counts.

    Queries are counted symbolically (each use of an oracle unitary, its
    inverse, or a controlled version increments a counter) rather than by
    gate compilation; complexity claims here are query counts.
    """

    def __init__(self):
        self.counts: dict[str, int] = {}
        self._stage_t0: float | None = None
        self.timings_ms: dict[str, float] = {}

    def add(self, oracle: str, n: int = 1) -> None:
        self.counts[oracle] = self.counts.get(oracle, 0) + int(n)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def start_stage(self) -> None:
        self._stage_t0 = time.perf_counter()

    def end_stage(self, name: str) -> None:
        if self._stage_t0 is not None:
            self.timings_ms[name] = 1e3 * (time.perf_counter() - self._stage_t0)
            self._stage_t0 = None

    def merged(self, other: "QueryMeter") -> "QueryMeter":
        out = QueryMeter()
        for src in (self, other):
            for k, v in src.counts.items():
                out.add(k, v)
            out.timings_ms.update(src.timings_ms)
        return out


@dataclass
class SimReport:
    """Record of query counts, degrees, measured errors, timings for one run."""

    queries: int
    degrees: list[int]
    error_measured: float
    eps_requested: float
    t: float = 0.0
    alpha: float = 0.0
    timings_ms: dict = field(default_factory=dict)
    instance: dict = field(default_factory=dict)
    query_breakdown: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.error_measured <= self.eps_requested

    def to_json(self) -> dict:
        return {
            "queries": int(self.queries),
            "degrees": [int(v) for v in self.degrees],
            "error_measured": float(self.error_measured),
            "eps_requested": float(self.eps_requested),
            "t": float(self.t),
            "alpha": float(self.alpha),
            "timings_ms": {k: float(v) for k, v in self.timings_ms.items()},
            "instance": self.instance,
            "query_breakdown": {k: int(v) for k, v in self.query_breakdown.items()},
            "passed": bool(self.passed),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)
