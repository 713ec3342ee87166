"""Shared builders and frozen expected values for the test suite.

The numeric constants here were produced by independent hand calculation or
exhaustive enumeration before the library code was run on the same inputs;
tests compare against them rather than against the library's own output.
"""

from __future__ import annotations

import numpy as np

from lve.syntax import (
    BOOL,
    LetTerm,
    MatApp,
    Pair,
    PLeaf,
    PPair,
    StochasticMatrix,
    Var,
    Variable,
    check_stochastic,
)

# Joint distribution of samples/sixnode.lve over (x3, x6), web order
# (t,t), (t,f), (f,t), (f,f): frozen from an exhaustive enumeration over all
# 64 assignments of x1..x6 done with pencil-and-spreadsheet arithmetic.
SIXNODE_JOINT = (0.170571125, 0.320928875, 0.17440725, 0.33409275)

# Elimination orders used by the cost checks and the table sizes the classical
# route reaches under each: forward peaks at the x2 step (product over
# x2,x3,x5,x6), reverse at the x5 step (product over x2,x3,x4,x5,x6).
SIXNODE_ORDER_FWD = ("x1", "x2", "x4", "x5")
SIXNODE_ORDER_REV = ("x5", "x4", "x2", "x1")
SIXNODE_MAX_TABLE_FWD = 16
SIXNODE_MAX_TABLE_REV = 32

# The full rule sequence eliminating x1, x2, x4, x5 in that order, one tuple
# (rule, definition index, eliminated variable or None) per step.
SIXNODE_GOLDEN_STEPS = (
    ("mult", 0, None),
    ("elim", 0, "x1"),
    ("swap2", 3, None),
    ("swap1", 2, None),
    ("mult", 1, None),
    ("mult", 0, None),
    ("elim", 0, "x2"),
    ("mult", 1, None),
    ("elim", 1, "x4"),
    ("swap2", 0, None),
    ("mult", 2, None),
    ("elim", 2, "x5"),
    ("swap3", 1, None),
    ("swap3", 0, None),
)


def bvar(name: str) -> Variable:
    return Variable(name, BOOL)


def matrix(name: str, n_slots: int, rows, out=BOOL, stochastic: bool = True) -> StochasticMatrix:
    m = StochasticMatrix(name, (BOOL,) * n_slots, out, np.asarray(rows, dtype=float))
    return check_stochastic(m) if stochastic else m


def coin_matrix(p: float = 0.3, name: str = "Coin") -> StochasticMatrix:
    return matrix(name, 0, [[p, 1.0 - p]])


def coin_copy_term(p: float = 0.3) -> LetTerm:
    """let v = Coin in let v' = v in (v, v')"""
    v, v2 = bvar("v"), bvar("v'")
    coin = coin_matrix(p)
    return LetTerm(
        ((PLeaf(v), MatApp(coin, ())), (PLeaf(v2), Var(v))),
        PPair(PLeaf(v), PLeaf(v2)),
    )


def coin_pair_expr(p: float = 0.3) -> Pair:
    """(Coin, Coin): two independent draws of the same biased coin."""
    coin = coin_matrix(p)
    return Pair(MatApp(coin, ()), MatApp(coin, ()))


# Expected joints for the 0.3-biased coin, web order (t,t), (t,f), (f,t), (f,f).
COIN_COPY_JOINT = (0.3, 0.0, 0.0, 0.7)
COIN_PAIR_JOINT = (0.09, 0.21, 0.21, 0.49)


def order_by_name(term: LetTerm, names) -> list[Variable]:
    by = {v.name: v for v in term.defined_vars()}
    return [by[n] for n in names]
