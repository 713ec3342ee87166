"""Operation counting shared by the interpreter and the factor engine.

Counters are per-invocation state: callers that want accumulated numbers pass
one counter through a whole pipeline, everything else creates a fresh one.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class CostCounter:
    """Scalar multiply-add count plus the largest table materialized so far."""

    muladds: int = 0
    max_table: int = 0

    def count(self, muladds: int = 0, table: int | None = None) -> None:
        self.muladds += muladds
        if table is not None and table > self.max_table:
            self.max_table = table

    def merge(self, other: "CostCounter") -> None:
        self.muladds += other.muladds
        if other.max_table > self.max_table:
            self.max_table = other.max_table


DEFAULT_WEB_CAP = 2**20
