"""Abstract syntax for the linear let-calculus.

Types split into positive types (Bool and tensors of positives), arrow types
(positive input, arbitrary result), and mixed tensors (positive left, arbitrary
right); a tensor is positive exactly when its right component is. Variables
carry their type inline, Church-style, so a term determines its typing without
a context; a global consistency pass rejects one name used at two types.

Terms are expressions: variables, matrix applications M(x...), arrow-variable
applications f x..., pairs, lambdas over positive patterns, and lets binding a
pattern. A let-term is the special shape "p1 = e1; ...; pn = en in out" used by
factor extraction and rewriting; it converts to a nested expression on demand.

Linearity discipline: positive variables may be shared, arrow variables are
linear. Binary typing rules require the free arrow variables of their premises
to be disjoint, and a let binding an arrow variable requires that variable free
in its body.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    ApplicationMismatch,
    ArrowSharing,
    InconsistentVariableTypes,
    InvalidPattern,
    NonPositiveLamParam,
    PatternTypeMismatch,
    TypeCheckError,
    UnusedArrowBinder,
)


# ---------------------------------------------------------------- types


class Ty:
    """Base class of types."""

    @property
    def is_positive(self) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class Bool(Ty):
    @property
    def is_positive(self) -> bool:
        return True


BOOL = Bool()


@dataclass(frozen=True)
class Tensor(Ty):
    """Tensor with a positive left component; positive iff the right one is."""

    left: Ty
    right: Ty

    def __post_init__(self) -> None:
        if not self.left.is_positive:
            raise TypeCheckError("tensor left component must be positive")

    @property
    def is_positive(self) -> bool:
        return self.right.is_positive


@dataclass(frozen=True)
class Arrow(Ty):
    """Linear function type with a positive input."""

    input: Ty
    result: Ty

    def __post_init__(self) -> None:
        if not self.input.is_positive:
            raise TypeCheckError("arrow input type must be positive")

    @property
    def is_positive(self) -> bool:
        return False


def web_size(t: Ty) -> int:
    """Number of web elements of a type: 2 for Bool, product for both pairs and arrows."""
    if isinstance(t, Bool):
        return 2
    if isinstance(t, Tensor):
        return web_size(t.left) * web_size(t.right)
    if isinstance(t, Arrow):
        return web_size(t.input) * web_size(t.result)
    raise TypeError(f"not a type: {t!r}")


def type_str(t: Ty) -> str:
    """Concrete syntax for a type, reparsable by the frontend."""
    if isinstance(t, Bool):
        return "Bool"
    if isinstance(t, Tensor):
        return f"({type_str(t.left)} * {type_str(t.right)})"
    if isinstance(t, Arrow):
        return f"({type_str(t.input)} -o {type_str(t.result)})"
    raise TypeError(f"not a type: {t!r}")


# ---------------------------------------------------------------- variables and patterns


@dataclass(frozen=True)
class Variable:
    """A named variable; its type must be positive or an arrow."""

    name: str
    ty: Ty

    def __post_init__(self) -> None:
        if not (self.ty.is_positive or isinstance(self.ty, Arrow)):
            raise TypeCheckError(f"variable {self.name} has mixed-tensor type {type_str(self.ty)}")

    @property
    def is_arrow(self) -> bool:
        return isinstance(self.ty, Arrow)


class Pattern:
    """A tree of pairwise-distinct variables."""


@dataclass(frozen=True)
class PLeaf(Pattern):
    var: Variable


@dataclass(frozen=True)
class PPair(Pattern):
    left: Pattern
    right: Pattern

    def __post_init__(self) -> None:
        lnames = {v.name for v in pattern_vars(self.left)}
        rnames = {v.name for v in pattern_vars(self.right)}
        if lnames & rnames:
            raise InvalidPattern(f"pattern repeats {sorted(lnames & rnames)}")


def pattern_vars(p: Pattern) -> tuple[Variable, ...]:
    """Pattern variables, left to right."""
    if isinstance(p, PLeaf):
        return (p.var,)
    assert isinstance(p, PPair)
    return pattern_vars(p.left) + pattern_vars(p.right)


def pattern_fv(p: Pattern) -> frozenset[Variable]:
    return frozenset(pattern_vars(p))


def pattern_type(p: Pattern) -> Ty:
    """Type of a pattern; rejects arrow variables in pair-left position."""
    if isinstance(p, PLeaf):
        return p.var.ty
    assert isinstance(p, PPair)
    lt = pattern_type(p.left)
    if not lt.is_positive:
        raise InvalidPattern("arrow variable must be rightmost in a pattern")
    return Tensor(lt, pattern_type(p.right))


def pattern_split(p: Pattern) -> tuple[Variable | None, Pattern | None]:
    """Split off the arrow variable: returns (arrow or None, positive residual or None)."""
    arrows = [v for v in pattern_vars(p) if v.is_arrow]
    if not arrows:
        return None, p
    if len(arrows) > 1:
        raise InvalidPattern("pattern holds more than one arrow variable")
    return arrows[0], pattern_remove(p, arrows[0])


def pattern_remove(p: Pattern, v: Variable) -> Pattern | None:
    """Remove one variable, collapsing emptied pairs; None when nothing remains."""
    if isinstance(p, PLeaf):
        return None if p.var == v else p
    assert isinstance(p, PPair)
    if v in pattern_fv(p.left):
        left = pattern_remove(p.left, v)
        return p.right if left is None else PPair(left, p.right)
    if v in pattern_fv(p.right):
        right = pattern_remove(p.right, v)
        return p.left if right is None else PPair(p.left, right)
    return p


def nest_vars(vs: Iterable[Variable]) -> Pattern:
    """Right-nested pattern over the given variables (must be nonempty)."""
    vs = list(vs)
    if not vs:
        raise InvalidPattern("cannot build an empty pattern")
    p: Pattern = PLeaf(vs[-1])
    for v in reversed(vs[:-1]):
        p = PPair(PLeaf(v), p)
    return p


# ---------------------------------------------------------------- stochastic matrices


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """A named nonnegative table from a product of positive slots to a positive type.

    Rows enumerate the joint slot web left-major; columns enumerate the output
    web. `stochastic` records that every row was verified to sum to one.
    """

    name: str
    slots: tuple[Ty, ...]
    out: Ty
    entries: np.ndarray
    stochastic: bool = False

    def __post_init__(self) -> None:
        for s in self.slots:
            if not s.is_positive:
                raise TypeCheckError(f"matrix {self.name}: slot {type_str(s)} not positive")
        if not self.out.is_positive:
            raise TypeCheckError(f"matrix {self.name}: output {type_str(self.out)} not positive")
        rows = 1
        for s in self.slots:
            rows *= web_size(s)
        arr = np.asarray(self.entries, dtype=float)
        if arr.shape != (rows, web_size(self.out)):
            raise TypeCheckError(
                f"matrix {self.name}: table shape {arr.shape} != ({rows}, {web_size(self.out)})"
            )
        if (arr < 0).any():
            raise TypeCheckError(f"matrix {self.name}: negative entry")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)


def check_stochastic(m: StochasticMatrix, tol: float = 1e-9) -> StochasticMatrix:
    """Return a copy flagged stochastic; raises if some row does not sum to one."""
    sums = m.entries.sum(axis=1)
    bad = np.abs(sums - 1.0).max(initial=0.0)
    if bad > tol:
        raise TypeCheckError(f"matrix {m.name}: row sums deviate from 1 by {bad:.3g}")
    return StochasticMatrix(m.name, m.slots, m.out, m.entries, stochastic=True)


# ---------------------------------------------------------------- expressions


class Expr:
    """Base class of expressions."""


@dataclass(frozen=True)
class Var(Expr):
    var: Variable


@dataclass(frozen=True)
class MatApp(Expr):
    matrix: StochasticMatrix
    args: tuple[Variable, ...]


@dataclass(frozen=True)
class ArrowApp(Expr):
    fn: Variable
    args: Pattern


@dataclass(frozen=True)
class Pair(Expr):
    fst: Expr
    snd: Expr


@dataclass(frozen=True)
class Lam(Expr):
    param: Pattern
    body: Expr


@dataclass(frozen=True)
class Let(Expr):
    binder: Pattern
    bound: Expr
    body: Expr


def pattern_to_expr(p: Pattern) -> Expr:
    if isinstance(p, PLeaf):
        return Var(p.var)
    assert isinstance(p, PPair)
    return Pair(pattern_to_expr(p.left), pattern_to_expr(p.right))


def expr_to_pattern(e: Expr) -> Pattern | None:
    """Inverse of pattern_to_expr when the expression is a pure variable tree."""
    if isinstance(e, Var):
        return PLeaf(e.var)
    if isinstance(e, Pair):
        left = expr_to_pattern(e.fst)
        right = expr_to_pattern(e.snd)
        if left is not None and right is not None:
            try:
                return PPair(left, right)
            except InvalidPattern:
                return None
    return None


@dataclass(frozen=True)
class LetTerm:
    """A chain of definitions ending in an output pattern."""

    defs: tuple[tuple[Pattern, Expr], ...]
    output: Pattern

    def to_expr(self) -> Expr:
        e = pattern_to_expr(self.output)
        for binder, bound in reversed(self.defs):
            e = Let(binder, bound, e)
        return e

    @property
    def is_positive(self) -> bool:
        return all(not v.is_arrow for v in pattern_vars(self.output))

    def defined_vars(self) -> frozenset[Variable]:
        out: set[Variable] = set()
        for binder, _ in self.defs:
            out.update(pattern_vars(binder))
        return frozenset(out)

    def tail(self) -> "LetTerm":
        return LetTerm(self.defs[1:], self.output)


Term = Expr | LetTerm


# ---------------------------------------------------------------- free variables


def free_vars(t: Term) -> frozenset[Variable]:
    if isinstance(t, LetTerm):
        return free_vars(t.to_expr())
    if isinstance(t, Var):
        return frozenset((t.var,))
    if isinstance(t, MatApp):
        return frozenset(t.args)
    if isinstance(t, ArrowApp):
        return pattern_fv(t.args) | {t.fn}
    if isinstance(t, Pair):
        return free_vars(t.fst) | free_vars(t.snd)
    if isinstance(t, Lam):
        return free_vars(t.body) - pattern_fv(t.param)
    if isinstance(t, Let):
        return free_vars(t.bound) | (free_vars(t.body) - pattern_fv(t.binder))
    raise TypeError(f"not a term: {t!r}")


def free_arrow_vars(t: Term) -> frozenset[Variable]:
    return frozenset(v for v in free_vars(t) if v.is_arrow)


# ---------------------------------------------------------------- size


def pattern_size(p: Pattern) -> int:
    return len(pattern_vars(p))


def size(t: Term) -> int:
    """Syntactic size: one per variable occurrence, one per application head."""
    if isinstance(t, LetTerm):
        total = pattern_size(t.output)
        for binder, bound in t.defs:
            total += pattern_size(binder) + size(bound)
        return total
    if isinstance(t, Var):
        return 1
    if isinstance(t, MatApp):
        return 1 + len(t.args)
    if isinstance(t, ArrowApp):
        return 1 + pattern_size(t.args)
    if isinstance(t, Pair):
        return size(t.fst) + size(t.snd)
    if isinstance(t, Lam):
        return pattern_size(t.param) + size(t.body)
    if isinstance(t, Let):
        return pattern_size(t.binder) + size(t.bound) + size(t.body)
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------- type checking


def _collect_types(t: Term, seen: dict[str, Ty]) -> None:
    if isinstance(t, LetTerm):
        for binder, bound in t.defs:
            _collect_types(bound, seen)
            for v in pattern_vars(binder):
                _note_type(v, seen)
        for v in pattern_vars(t.output):
            _note_type(v, seen)
        return
    if isinstance(t, Var):
        _note_type(t.var, seen)
    elif isinstance(t, MatApp):
        for v in t.args:
            _note_type(v, seen)
    elif isinstance(t, ArrowApp):
        _note_type(t.fn, seen)
        for v in pattern_vars(t.args):
            _note_type(v, seen)
    elif isinstance(t, Pair):
        _collect_types(t.fst, seen)
        _collect_types(t.snd, seen)
    elif isinstance(t, Lam):
        for v in pattern_vars(t.param):
            _note_type(v, seen)
        _collect_types(t.body, seen)
    elif isinstance(t, Let):
        _collect_types(t.bound, seen)
        for v in pattern_vars(t.binder):
            _note_type(v, seen)
        _collect_types(t.body, seen)
    else:
        raise TypeError(f"not a term: {t!r}")


def _note_type(v: Variable, seen: dict[str, Ty]) -> None:
    old = seen.get(v.name)
    if old is None:
        seen[v.name] = v.ty
    elif old != v.ty:
        raise InconsistentVariableTypes(
            f"variable {v.name} used at {type_str(old)} and {type_str(v.ty)}"
        )


def _check(e: Expr) -> tuple[Ty, frozenset[Variable], frozenset[Variable]]:
    """Returns (type, free variables, free arrow variables)."""
    if isinstance(e, Var):
        fv = frozenset((e.var,))
        return e.var.ty, fv, (fv if e.var.is_arrow else frozenset())
    if isinstance(e, MatApp):
        if len(set(e.args)) != len(e.args):
            raise InvalidPattern(f"matrix {e.matrix.name} applied to repeated variables")
        if len(e.args) != len(e.matrix.slots):
            raise ApplicationMismatch(
                f"matrix {e.matrix.name} expects {len(e.matrix.slots)} arguments, got {len(e.args)}"
            )
        for v, s in zip(e.args, e.matrix.slots):
            if v.ty != s:
                raise ApplicationMismatch(
                    f"matrix {e.matrix.name}: argument {v.name} has type "
                    f"{type_str(v.ty)}, slot wants {type_str(s)}"
                )
        return e.matrix.out, frozenset(e.args), frozenset()
    if isinstance(e, ArrowApp):
        if not e.fn.is_arrow:
            raise ApplicationMismatch(f"{e.fn.name} applied but not arrow-typed")
        at = pattern_type(e.args)
        if not at.is_positive:
            raise ApplicationMismatch("application argument pattern must be positive")
        assert isinstance(e.fn.ty, Arrow)
        if at != e.fn.ty.input:
            raise ApplicationMismatch(
                f"{e.fn.name} wants {type_str(e.fn.ty.input)}, argument has {type_str(at)}"
            )
        return e.fn.ty.result, pattern_fv(e.args) | {e.fn}, frozenset((e.fn,))
    if isinstance(e, Pair):
        t1, fv1, fa1 = _check(e.fst)
        t2, fv2, fa2 = _check(e.snd)
        if not t1.is_positive:
            raise TypeCheckError("first pair component must have positive type")
        if fa1 & fa2:
            raise ArrowSharing(f"arrow variables shared across a pair: {sorted(v.name for v in fa1 & fa2)}")
        return Tensor(t1, t2), fv1 | fv2, fa1 | fa2
    if isinstance(e, Lam):
        pt = pattern_type(e.param)
        if not pt.is_positive:
            raise NonPositiveLamParam("lambda parameter pattern must be positive")
        bt, fv, fa = _check(e.body)
        pv = pattern_fv(e.param)
        return Arrow(pt, bt), fv - pv, fa - pv
    if isinstance(e, Let):
        bt, bfv, bfa = _check(e.bound)
        pt = pattern_type(e.binder)
        if pt != bt:
            raise PatternTypeMismatch(
                f"binder has type {type_str(pt)}, bound expression has {type_str(bt)}"
            )
        yt, yfv, yfa = _check(e.body)
        if bfa & yfa:
            raise ArrowSharing(
                f"arrow variables shared across a let: {sorted(v.name for v in bfa & yfa)}"
            )
        pv = pattern_fv(e.binder)
        for v in pv:
            if v.is_arrow and v not in yfa:
                raise UnusedArrowBinder(f"bound arrow variable {v.name} unused in body")
        return yt, bfv | (yfv - pv), bfa | (yfa - pv)
    raise TypeError(f"not an expression: {e!r}")


def typecheck(t: Term) -> Ty:
    """Type of a term; raises a TypeCheckError subclass on failure."""
    seen: dict[str, Ty] = {}
    _collect_types(t, seen)
    e = t.to_expr() if isinstance(t, LetTerm) else t
    ty, _, _ = _check(e)
    return ty


# ---------------------------------------------------------------- renaming


class FreshNames:
    """Deterministic fresh-name supply: base__k with the smallest free k."""

    def __init__(self, used: Iterable[str] = ()):  # noqa: D107
        self.used = set(used)

    def reserve(self, name: str) -> None:
        self.used.add(name)

    def fresh(self, base: str) -> str:
        k = 1
        while f"{base}__{k}" in self.used:
            k += 1
        name = f"{base}__{k}"
        self.used.add(name)
        return name


def collect_names(t: Term) -> set[str]:
    """All variable names occurring in a term, free or bound."""
    out: set[str] = set()

    def walk(e: Expr) -> None:
        if isinstance(e, Var):
            out.add(e.var.name)
        elif isinstance(e, MatApp):
            out.update(v.name for v in e.args)
        elif isinstance(e, ArrowApp):
            out.add(e.fn.name)
            out.update(v.name for v in pattern_vars(e.args))
        elif isinstance(e, Pair):
            walk(e.fst)
            walk(e.snd)
        elif isinstance(e, Lam):
            out.update(v.name for v in pattern_vars(e.param))
            walk(e.body)
        elif isinstance(e, Let):
            walk(e.bound)
            out.update(v.name for v in pattern_vars(e.binder))
            walk(e.body)

    walk(t.to_expr() if isinstance(t, LetTerm) else t)
    return out


def _rename_pattern(p: Pattern, env: dict[str, Variable], names: FreshNames) -> Pattern:
    if isinstance(p, PLeaf):
        v = p.var
        if v.name in names.used:
            v2 = Variable(names.fresh(v.name), v.ty)
        else:
            names.reserve(v.name)
            v2 = v
        env[p.var.name] = v2
        return PLeaf(v2)
    assert isinstance(p, PPair)
    return PPair(_rename_pattern(p.left, env, names), _rename_pattern(p.right, env, names))


def _rename_expr(e: Expr, env: dict[str, Variable], names: FreshNames) -> Expr:
    if isinstance(e, Var):
        return Var(env.get(e.var.name, e.var))
    if isinstance(e, MatApp):
        return MatApp(e.matrix, tuple(env.get(v.name, v) for v in e.args))
    if isinstance(e, ArrowApp):
        return ArrowApp(env.get(e.fn.name, e.fn), _map_pattern(e.args, env))
    if isinstance(e, Pair):
        return Pair(_rename_expr(e.fst, env, names), _rename_expr(e.snd, env, names))
    if isinstance(e, Lam):
        inner = dict(env)
        param = _rename_pattern(e.param, inner, names)
        return Lam(param, _rename_expr(e.body, inner, names))
    if isinstance(e, Let):
        bound = _rename_expr(e.bound, env, names)
        inner = dict(env)
        binder = _rename_pattern(e.binder, inner, names)
        return Let(binder, bound, _rename_expr(e.body, inner, names))
    raise TypeError(f"not an expression: {e!r}")


def _map_pattern(p: Pattern, env: dict[str, Variable]) -> Pattern:
    if isinstance(p, PLeaf):
        return PLeaf(env.get(p.var.name, p.var))
    assert isinstance(p, PPair)
    return PPair(_map_pattern(p.left, env), _map_pattern(p.right, env))


def canonicalize(t: LetTerm) -> LetTerm:
    """Alpha-rename so every binder variable is globally unique.

    Free variables keep their names; colliding binders get base__k suffixes,
    assigned left to right. Idempotent, and the result is alpha-equivalent to
    the input.
    """
    names = FreshNames(v.name for v in free_vars(t))
    env: dict[str, Variable] = {}
    defs: list[tuple[Pattern, Expr]] = []
    for binder, bound in t.defs:
        bound2 = _rename_expr(bound, env, names)
        binder2 = _rename_pattern(binder, env, names)
        defs.append((binder2, bound2))
    return LetTerm(tuple(defs), _map_pattern(t.output, env))


def subst_free_vars(e: Expr, sub: dict[str, Variable]) -> Expr:
    """Replace free variables by variables; binders shadow, capture raises."""
    if not sub:
        return e
    if isinstance(e, Var):
        return Var(sub.get(e.var.name, e.var))
    if isinstance(e, MatApp):
        return MatApp(e.matrix, tuple(sub.get(v.name, v) for v in e.args))
    if isinstance(e, ArrowApp):
        return ArrowApp(sub.get(e.fn.name, e.fn), _map_pattern(e.args, sub))
    if isinstance(e, Pair):
        return Pair(subst_free_vars(e.fst, sub), subst_free_vars(e.snd, sub))
    if isinstance(e, Lam):
        inner = _shadow(sub, e.param)
        return Lam(e.param, subst_free_vars(e.body, inner))
    if isinstance(e, Let):
        bound = subst_free_vars(e.bound, sub)
        inner = _shadow(sub, e.binder)
        return Let(e.binder, bound, subst_free_vars(e.body, inner))
    raise TypeError(f"not an expression: {e!r}")


def _shadow(sub: dict[str, Variable], binder: Pattern) -> dict[str, Variable]:
    names = {v.name for v in pattern_vars(binder)}
    targets = {v.name for k, v in sub.items() if k not in names}
    if targets & names:
        raise InvalidPattern(f"substitution would capture {sorted(targets & names)}")
    return {k: v for k, v in sub.items() if k not in names}


# ---------------------------------------------------------------- alpha equivalence


class _AlphaEnv:
    def __init__(self) -> None:
        self.l2r: dict[str, str] = {}
        self.r2l: dict[str, str] = {}

    def child(self) -> "_AlphaEnv":
        c = _AlphaEnv()
        c.l2r = dict(self.l2r)
        c.r2l = dict(self.r2l)
        return c

    def bind(self, a: Variable, b: Variable) -> bool:
        if a.ty != b.ty:
            return False
        self.l2r[a.name] = b.name
        self.r2l[b.name] = a.name
        return True

    def match(self, a: Variable, b: Variable) -> bool:
        if a.ty != b.ty:
            return False
        if a.name in self.l2r or b.name in self.r2l:
            return self.l2r.get(a.name) == b.name and self.r2l.get(b.name) == a.name
        return a.name == b.name


def _alpha_pattern(a: Pattern, b: Pattern, env: _AlphaEnv) -> bool:
    if isinstance(a, PLeaf) and isinstance(b, PLeaf):
        return env.bind(a.var, b.var)
    if isinstance(a, PPair) and isinstance(b, PPair):
        return _alpha_pattern(a.left, b.left, env) and _alpha_pattern(a.right, b.right, env)
    return False


def _alpha_args(a: Pattern, b: Pattern, env: _AlphaEnv) -> bool:
    if isinstance(a, PLeaf) and isinstance(b, PLeaf):
        return env.match(a.var, b.var)
    if isinstance(a, PPair) and isinstance(b, PPair):
        return _alpha_args(a.left, b.left, env) and _alpha_args(a.right, b.right, env)
    return False


def _alpha_expr(a: Expr, b: Expr, env: _AlphaEnv) -> bool:
    if isinstance(a, Var) and isinstance(b, Var):
        return env.match(a.var, b.var)
    if isinstance(a, MatApp) and isinstance(b, MatApp):
        return (
            a.matrix.name == b.matrix.name
            and len(a.args) == len(b.args)
            and all(env.match(x, y) for x, y in zip(a.args, b.args))
        )
    if isinstance(a, ArrowApp) and isinstance(b, ArrowApp):
        return env.match(a.fn, b.fn) and _alpha_args(a.args, b.args, env)
    if isinstance(a, Pair) and isinstance(b, Pair):
        return _alpha_expr(a.fst, b.fst, env) and _alpha_expr(a.snd, b.snd, env)
    if isinstance(a, Lam) and isinstance(b, Lam):
        inner = env.child()
        return _alpha_pattern(a.param, b.param, inner) and _alpha_expr(a.body, b.body, inner)
    if isinstance(a, Let) and isinstance(b, Let):
        if not _alpha_expr(a.bound, b.bound, env):
            return False
        inner = env.child()
        return _alpha_pattern(a.binder, b.binder, inner) and _alpha_expr(a.body, b.body, inner)
    return False


def alpha_eq(a: Term, b: Term) -> bool:
    """Structural equality up to consistent renaming of bound variables."""
    ea = a.to_expr() if isinstance(a, LetTerm) else a
    eb = b.to_expr() if isinstance(b, LetTerm) else b
    return _alpha_expr(ea, eb, _AlphaEnv())
