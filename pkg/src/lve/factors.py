"""Factors over finite-web variables and variable elimination on factor sets.

A factor pairs a variable set with a nonnegative table over that set's web;
tables are dense numpy arrays with one axis per variable, axes sorted by
variable name, so the C-order flattening is the canonical web enumeration.
Elimination of a variable multiplies the factors mentioning it and sums it
out; a let-term induces a factor set with one factor per definition (arrow
variables are folded away eagerly) plus a constant factor on the output
variables, and the term's denotation is recovered by multiplying everything
and summing the internal variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cost import DEFAULT_WEB_CAP, CostCounter
from .denote import DenoteContext, Relation, denote
from .errors import (
    BinderCapture,
    NotCanonicalized,
    SharedVarTypeMismatch,
    UnknownVariable,
    WebCapExceeded,
)
from .syntax import (
    Expr,
    LetTerm,
    Pattern,
    Variable,
    free_vars,
    pattern_fv,
    pattern_split,
    pattern_type,
    pattern_vars,
    web_size,
)
from .webs import (
    Assignment,
    VarSpace,
    check_web_cap,
    element_index,
    pattern_digits,
    pattern_index,
    sorted_vars,
)


@dataclass(frozen=True, eq=False)
class Factor:
    """A variable set with a table over its web; axes follow sorted names."""

    vars: tuple[Variable, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        assert list(self.vars) == sorted(self.vars, key=lambda v: v.name)
        arr = np.asarray(self.table, dtype=float)
        assert arr.shape == tuple(web_size(v.ty) for v in self.vars)
        arr.flags.writeable = False
        object.__setattr__(self, "table", arr)

    @property
    def degree(self) -> int:
        return len(self.vars)

    @property
    def base(self) -> int:
        return max((web_size(v.ty) for v in self.vars), default=1)

    def value(self, asg: Assignment) -> float:
        idx = tuple(element_index(v.ty, asg.get(v)) for v in self.vars)
        return float(self.table[idx])

    def flat(self) -> np.ndarray:
        """Table values in canonical web order."""
        return self.table.reshape(-1)


def constant_factor(vars: Iterable[Variable], value: float = 1.0) -> Factor:
    vs = sorted_vars(vars)
    dims = tuple(web_size(v.ty) for v in vs)
    return Factor(vs, np.full(dims, value))


@dataclass
class VefStep:
    """Cost record of one elimination step."""

    var: Variable
    group_size: int
    product_table: int
    muladds: int


@dataclass
class FactorSet:
    """An ordered multiset of factors plus accumulated operation counts."""

    factors: list[Factor]
    counter: CostCounter = field(default_factory=CostCounter)
    steps: list[VefStep] = field(default_factory=list)

    def vars(self) -> frozenset[Variable]:
        out: set[Variable] = set()
        for f in self.factors:
            out.update(f.vars)
        return frozenset(out)

    def __len__(self) -> int:
        return len(self.factors)


# ---------------------------------------------------------------- factor algebra


def _merge_vars(a: tuple[Variable, ...], b: tuple[Variable, ...]) -> tuple[Variable, ...]:
    byname: dict[str, Variable] = {v.name: v for v in a}
    for v in b:
        old = byname.get(v.name)
        if old is not None and old.ty != v.ty:
            raise SharedVarTypeMismatch(f"variable {v.name} carried two types")
        byname[v.name] = v
    return sorted_vars(byname.values())


def product(
    f: Factor,
    g: Factor,
    counter: CostCounter | None = None,
    cap: int = DEFAULT_WEB_CAP,
) -> Factor:
    """Pointwise product over the union of the variable sets."""
    union = _merge_vars(f.vars, g.vars)
    size = 1
    for v in union:
        size *= web_size(v.ty)
    check_web_cap(size, cap)
    fshape = tuple(web_size(v.ty) if v in f.vars else 1 for v in union)
    gshape = tuple(web_size(v.ty) if v in g.vars else 1 for v in union)
    table = f.table.reshape(fshape) * g.table.reshape(gshape)
    if counter is not None:
        counter.count(muladds=table.size, table=table.size)
    return Factor(union, table)


def sum_out(
    f: Factor,
    vs: Iterable[Variable],
    counter: CostCounter | None = None,
    cap: int = DEFAULT_WEB_CAP,
) -> Factor:
    """Sum the given variables out of a factor; absent variables are ignored."""
    drop = set(vs) & set(f.vars)
    if not drop:
        return f
    axes = tuple(i for i, v in enumerate(f.vars) if v in drop)
    table = f.table.sum(axis=axes)
    if counter is not None:
        counter.count(muladds=f.table.size, table=table.size)
    return Factor(tuple(v for v in f.vars if v not in drop), table)


def big_product(
    factors: Sequence[Factor],
    counter: CostCounter | None = None,
    cap: int = DEFAULT_WEB_CAP,
) -> Factor:
    """Product of a multiset of factors; empty product is the scalar 1."""
    acc = constant_factor((), 1.0) if not factors else factors[0]
    for f in factors[1:]:
        acc = product(acc, f, counter, cap)
    return acc


def partition(factors: Sequence[Factor], vs: Iterable[Variable]) -> tuple[list[Factor], list[Factor]]:
    """Split into (factors meeting vs, the rest), preserving order."""
    touch = set(vs)
    hit = [f for f in factors if touch & set(f.vars)]
    miss = [f for f in factors if not (touch & set(f.vars))]
    return hit, miss


def contract(
    f: Factor,
    g: Factor,
    drop: Iterable[Variable],
    counter: CostCounter | None = None,
    cap: int = DEFAULT_WEB_CAP,
) -> Factor:
    """Product with the dropped variables summed out, without materializing
    the product table. Arrow variable webs grow with the abstracted web, so
    the cap applies to the result only; the multiply count still reflects
    the full product."""
    union = _merge_vars(f.vars, g.vars)
    dropped = set(drop)
    keep = tuple(v for v in union if v not in dropped)
    out_size = conceptual = 1
    for v in keep:
        out_size *= web_size(v.ty)
    for v in union:
        conceptual *= web_size(v.ty)
    check_web_cap(out_size, cap)
    labels = {v.name: chr(ord("a") + i) for i, v in enumerate(union)}
    if len(union) > 26:
        raise WebCapExceeded(f"contraction over {len(union)} variables")
    spec = (
        "".join(labels[v.name] for v in f.vars)
        + ","
        + "".join(labels[v.name] for v in g.vars)
        + "->"
        + "".join(labels[v.name] for v in keep)
    )
    table = np.einsum(spec, f.table, g.table)
    if counter is not None:
        counter.count(muladds=conceptual, table=out_size)
    return Factor(keep, table)


# ---------------------------------------------------------------- factors of a let-term


def definition_factor(
    binder: Pattern,
    bound: Expr,
    ctx: DenoteContext | None = None,
    counter: CostCounter | None = None,
) -> Factor:
    """The factor of one definition: its variables are the free variables of
    the expression plus the binder's variables, its value the denotation entry."""
    if ctx is None:
        ctx = DenoteContext()
    fve = free_vars(bound)
    pv = pattern_fv(binder)
    if fve & pv:
        raise BinderCapture(
            f"binder variables {sorted(v.name for v in fve & pv)} occur free in the definition"
        )
    rel = denote(bound, ctx)
    union = sorted_vars(fve | pv)
    space = VarSpace(union, cap=ctx.web_cap)
    rowmap = space.restriction_map(ctx.space(rel.vars))
    colmap = pattern_index(binder, {v.name: space.digit(v) for v in pattern_vars(binder)})
    flat = rel.matrix[rowmap, colmap]
    if counter is not None:
        counter.count(table=flat.size)
    return Factor(union, flat.reshape(tuple(web_size(v.ty) for v in union)))


def _check_binder_convention(term: LetTerm) -> None:
    fv_names = {v.name for v in free_vars(term)}
    seen: set[str] = set()
    for binder, _ in term.defs:
        for v in pattern_vars(binder):
            if v.name in seen:
                raise NotCanonicalized(f"binder variable {v.name} bound twice")
            if v.name in fv_names:
                raise NotCanonicalized(f"binder variable {v.name} shadows a free variable")
            seen.add(v.name)


def factors_of(term: LetTerm, ctx: DenoteContext | None = None) -> FactorSet:
    """The factor multiset of a let-term.

    One factor per definition, processed back to front; a definition binding an
    arrow variable that the output does not mention is folded into the unique
    factor consuming that arrow, summing the arrow variable out on the spot.
    """
    if ctx is None:
        ctx = DenoteContext()
    _check_binder_convention(term)
    counter = CostCounter()
    out_fv = pattern_fv(term.output)
    facts: list[Factor] = [constant_factor(out_fv)]
    for binder, bound in reversed(term.defs):
        fac = definition_factor(binder, bound, ctx, counter)
        arrow, _ = pattern_split(binder)
        if arrow is not None and arrow not in out_fv:
            hit, miss = partition(facts, {arrow})
            if len(hit) != 1:
                raise NotCanonicalized(
                    f"arrow variable {arrow.name} consumed by {len(hit)} factors"
                )
            merged = contract(fac, hit[0], {arrow}, counter, ctx.web_cap)
            facts = [merged] + miss
        else:
            facts = [fac] + facts
    return FactorSet(facts, counter)


def check_factor_vars(term: LetTerm, ctx: DenoteContext | None = None) -> bool:
    """Verify the variable census of a term's factor set: free variables, plus
    arrow variables of the output not free in the term, plus the positive
    variables of every binder, as a disjoint union."""
    fs = factors_of(term, ctx)
    seen = fs.vars()
    fv = free_vars(term)
    out_arrows = frozenset(v for v in pattern_fv(term.output) if v.is_arrow) - fv
    parts: list[frozenset[Variable]] = [fv, out_arrows]
    for binder, _ in term.defs:
        arrow, positive = pattern_split(binder)
        parts.append(pattern_fv(positive) if positive is not None else frozenset())
    total = 0
    union: set[Variable] = set()
    for p in parts:
        total += len(p)
        union.update(p)
    return len(union) == total and seen == frozenset(union)


def relation_from_factors(term: LetTerm, ctx: DenoteContext | None = None) -> Relation:
    """Rebuild a let-term's denotation from its factor set alone.

    Rows where a variable shared between the free variables and the output
    disagrees are zero; all other entries come from the factor product with
    the internal variables summed out.
    """
    if ctx is None:
        ctx = DenoteContext()
    fs = factors_of(term, ctx)
    fv = free_vars(term)
    out_vars = pattern_fv(term.output)
    internal = fs.vars() - (fv | out_vars)
    g = sum_out(big_product(fs.factors, fs.counter, ctx.web_cap), internal, fs.counter, ctx.web_cap)
    assert set(g.vars) == set(fv | out_vars)

    rspace = VarSpace(sorted_vars(fv), cap=ctx.web_cap)
    out_ty = pattern_type(term.output)
    n_cols = web_size(out_ty)
    col_dig = pattern_digits(term.output, np.arange(n_cols))
    gspace = VarSpace(g.vars, cap=ctx.web_cap)

    gidx = np.zeros((rspace.size, n_cols), dtype=np.int64)
    mask = np.ones((rspace.size, n_cols), dtype=bool)
    for k, v in enumerate(gspace.vars):
        if v in fv:
            gidx += rspace.digit(v)[:, None] * gspace.strides[k]
            if v in out_vars:
                mask &= rspace.digit(v)[:, None] == col_dig[v.name][None, :]
        else:
            gidx += np.asarray(col_dig[v.name])[None, :] * gspace.strides[k]
    matrix = g.flat()[gidx] * mask
    fs.counter.count(table=matrix.size)
    ctx.counter.merge(fs.counter)
    return Relation(rspace.vars, out_ty, matrix)


# ---------------------------------------------------------------- elimination


def eliminate(
    fs: FactorSet,
    order: Sequence[Variable],
    cap: int = DEFAULT_WEB_CAP,
) -> FactorSet:
    """Variable elimination on a factor set, one variable at a time.

    Each step multiplies the factors mentioning the variable and sums it out;
    the result set carries fresh counters and one cost record per step.
    """
    factors = list(fs.factors)
    counter = CostCounter()
    steps: list[VefStep] = []
    for v in order:
        present = set()
        for f in factors:
            present.update(f.vars)
        if v not in present:
            raise UnknownVariable(f"variable {v.name} not present in the factor set")
        hit, miss = partition(factors, {v})
        before = counter.muladds
        prod = big_product(hit, counter, cap)
        summed = sum_out(prod, {v}, counter, cap)
        steps.append(VefStep(v, len(hit), prod.table.size, counter.muladds - before))
        factors = [summed] + miss
    return FactorSet(factors, counter, steps)


def marginal(
    fs: FactorSet,
    output: Pattern,
    cap: int = DEFAULT_WEB_CAP,
) -> np.ndarray:
    """Distribution over the output pattern's web read off a factor set."""
    out_vars = pattern_fv(output)
    g = sum_out(
        big_product(fs.factors, fs.counter, cap), fs.vars() - out_vars, fs.counter, cap
    )
    assert set(g.vars) <= out_vars
    n_cols = web_size(pattern_type(output))
    col_dig = pattern_digits(output, np.arange(n_cols))
    gspace = VarSpace(g.vars, cap=cap)
    gidx = np.zeros(n_cols, dtype=np.int64)
    for k, v in enumerate(gspace.vars):
        gidx += np.asarray(col_dig[v.name]) * gspace.strides[k]
    return g.flat()[gidx].copy()


# ---------------------------------------------------------------- comparison and dumps


def factors_allclose(a: Factor, b: Factor, tol: float = 1e-9) -> bool:
    return a.vars == b.vars and bool(np.max(np.abs(a.table - b.table), initial=0.0) <= tol)


def factor_sets_equal(xs: FactorSet | Sequence[Factor], ys: FactorSet | Sequence[Factor], tol: float = 1e-9) -> bool:
    """Multiset equality: match factors by variable set, then tables within tol."""
    left = list(xs.factors if isinstance(xs, FactorSet) else xs)
    right = list(ys.factors if isinstance(ys, FactorSet) else ys)
    if len(left) != len(right):
        return False
    for f in left:
        match = next((i for i, g in enumerate(right) if factors_allclose(f, g, tol)), None)
        if match is None:
            return False
        right.pop(match)
    return True


def dump_factors(fs: FactorSet | Sequence[Factor]) -> str:
    """Stable text rendering: one header line and one value line per factor."""
    from .syntax import type_str

    factors = fs.factors if isinstance(fs, FactorSet) else list(fs)
    lines = []
    for f in factors:
        head = " ".join(f"{v.name}:{type_str(v.ty)}" for v in f.vars)
        lines.append(f"factor {head if head else '(scalar)'}")
        lines.append("  " + " ".join(format(x, ".12g") for x in f.flat()))
    return "\n".join(lines)
