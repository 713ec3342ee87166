"""Elimination orders over a term's internal variables."""

from __future__ import annotations

import random

from .denote import DenoteContext
from .factors import factors_of
from .syntax import LetTerm, Variable, pattern_fv


def elimination_candidates(term: LetTerm) -> list[Variable]:
    """Positive defined variables outside the output, in name order."""
    out = pattern_fv(term.output)
    return sorted(
        (v for v in term.defined_vars() if not v.is_arrow and v not in out),
        key=lambda v: v.name,
    )


def min_degree_order(term: LetTerm, ctx: DenoteContext | None = None) -> list[Variable]:
    """Greedy order: repeatedly pick the candidate with the fewest neighbours
    in the interaction graph of the factors, connecting its neighbours as if
    eliminated. Ties break by name."""
    adj: dict[Variable, set[Variable]] = {}
    for f in factors_of(term, ctx).factors:
        for v in f.vars:
            adj.setdefault(v, set()).update(u for u in f.vars if u != v)
    remaining = set(elimination_candidates(term))
    for v in remaining:
        adj.setdefault(v, set())
    order: list[Variable] = []
    while remaining:
        pick = min(remaining, key=lambda v: (len(adj[v]), v.name))
        neighbours = adj.pop(pick)
        for u in neighbours:
            adj[u].discard(pick)
            adj[u].update(w for w in neighbours if w != u)
        remaining.remove(pick)
        order.append(pick)
    return order


def random_order(term: LetTerm, seed: int) -> list[Variable]:
    order = elimination_candidates(term)
    random.Random(seed).shuffle(order)
    return order
