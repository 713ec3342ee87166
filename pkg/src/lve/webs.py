"""Webs: the finite sets of outcomes underlying types and variable sets.

The web of Bool is {t, f} in that order; the web of a tensor or arrow is the
cartesian product of the component webs, enumerated left-major. The web of a
set of variables is the product of the variables' webs with the variables
sorted by name, again left-major. Throughout the numeric core web elements are
handled as integer indices into these canonical enumerations; WebElem trees
and Assignments are the readable boundary representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .cost import DEFAULT_WEB_CAP
from .errors import NotPositive, WebCapExceeded
from .syntax import (
    Arrow,
    Bool,
    PLeaf,
    PPair,
    Pattern,
    Tensor,
    Ty,
    Variable,
    pattern_type,
    web_size,
)


class WebElem:
    """Base class of web elements."""


@dataclass(frozen=True)
class WebBool(WebElem):
    bit: bool

    def __str__(self) -> str:
        return "t" if self.bit else "f"


@dataclass(frozen=True)
class WebPair(WebElem):
    left: WebElem
    right: WebElem

    def __str__(self) -> str:
        return f"({self.left},{self.right})"


TRUE = WebBool(True)
FALSE = WebBool(False)


@lru_cache(maxsize=None)
def enumerate_web(t: Ty) -> tuple[WebElem, ...]:
    """All web elements of a type in canonical order."""
    if isinstance(t, Bool):
        return (TRUE, FALSE)
    assert isinstance(t, (Tensor, Arrow))
    left, right = (t.left, t.right) if isinstance(t, Tensor) else (t.input, t.result)
    return tuple(WebPair(a, b) for a in enumerate_web(left) for b in enumerate_web(right))


def element_at(t: Ty, idx: int) -> WebElem:
    if isinstance(t, Bool):
        return TRUE if idx == 0 else FALSE
    left, right = (t.left, t.right) if isinstance(t, Tensor) else (t.input, t.result)
    n = web_size(right)
    return WebPair(element_at(left, idx // n), element_at(right, idx % n))


def element_index(t: Ty, el: WebElem) -> int:
    if isinstance(t, Bool):
        assert isinstance(el, WebBool)
        return 0 if el.bit else 1
    left, right = (t.left, t.right) if isinstance(t, Tensor) else (t.input, t.result)
    assert isinstance(el, WebPair)
    return element_index(left, el.left) * web_size(right) + element_index(right, el.right)


def dim(t: Ty) -> int:
    """Web size of a positive type."""
    if not t.is_positive:
        raise NotPositive("dim is defined on positive types only")
    return web_size(t)


def ht(t: Ty) -> int:
    """Total mass of a closed term of this type when all matrices are stochastic."""
    if t.is_positive:
        return 1
    if isinstance(t, Arrow):
        return dim(t.input) * ht(t.result)
    assert isinstance(t, Tensor)
    return ht(t.right)


# ---------------------------------------------------------------- assignments


@dataclass(frozen=True)
class Assignment:
    """A finite map from variables to web elements, stored sorted by name."""

    items: tuple[tuple[Variable, WebElem], ...]

    @staticmethod
    def of(pairs: Iterable[tuple[Variable, WebElem]]) -> "Assignment":
        return Assignment(tuple(sorted(pairs, key=lambda p: p[0].name)))

    def get(self, v: Variable) -> WebElem:
        for w, el in self.items:
            if w == v:
                return el
        raise KeyError(v.name)

    def restrict(self, vs: Iterable[Variable]) -> "Assignment":
        keep = set(vs)
        return Assignment(tuple(p for p in self.items if p[0] in keep))

    def union(self, other: "Assignment") -> "Assignment":
        mine = dict(self.items)
        for v, el in other.items:
            if v in mine and mine[v] != el:
                raise ValueError(f"assignments disagree on {v.name}")
            mine[v] = el
        return Assignment.of(mine.items())

    def __str__(self) -> str:
        return "{" + ", ".join(f"{v.name}={el}" for v, el in self.items) + "}"


STAR = Assignment(())


def sorted_vars(vs: Iterable[Variable]) -> tuple[Variable, ...]:
    return tuple(sorted(vs, key=lambda v: v.name))


def check_web_cap(n: int, cap: int = DEFAULT_WEB_CAP) -> None:
    if n > cap:
        raise WebCapExceeded(f"web of size {n} exceeds cap {cap}")


def enumerate_assignments(vs: Iterable[Variable], cap: int = DEFAULT_WEB_CAP) -> list[Assignment]:
    """All assignments of a variable set, sorted-name left-major order."""
    space = VarSpace(sorted_vars(vs), cap=cap)
    return [space.assignment_at(i) for i in range(space.size)]


class VarSpace:
    """Index arithmetic over the web of a sorted variable tuple.

    Flat indices are mixed-radix numerals: the first (alphabetically least)
    variable is the most significant digit.
    """

    def __init__(self, vars: tuple[Variable, ...], cap: int = DEFAULT_WEB_CAP):
        assert list(vars) == sorted(vars, key=lambda v: v.name), "VarSpace wants sorted vars"
        self.vars = vars
        self.dims = tuple(web_size(v.ty) for v in vars)
        size = 1
        for d in self.dims:
            size *= d
        check_web_cap(size, cap)
        self.size = size
        strides: list[int] = []
        acc = 1
        for d in reversed(self.dims):
            strides.append(acc)
            acc *= d
        self.strides = tuple(reversed(strides))
        self._digits: dict[str, np.ndarray] = {}

    def digit(self, v: Variable) -> np.ndarray:
        """Element index of one variable for every flat index, shape (size,)."""
        arr = self._digits.get(v.name)
        if arr is None:
            k = self.vars.index(v)
            arr = (np.arange(self.size) // self.strides[k]) % self.dims[k]
            arr.flags.writeable = False
            self._digits[v.name] = arr
        return arr

    def restriction_map(self, sub: "VarSpace") -> np.ndarray:
        """For each flat index here, the flat index of its restriction in sub."""
        out = np.zeros(self.size, dtype=np.int64)
        for k, v in enumerate(sub.vars):
            out += self.digit(v) * sub.strides[k]
        return out

    def assignment_at(self, idx: int) -> Assignment:
        pairs = []
        for v, d, s in zip(self.vars, self.dims, self.strides):
            pairs.append((v, element_at(v.ty, (idx // s) % d)))
        return Assignment.of(pairs)

    def index_of(self, asg: Assignment) -> int:
        idx = 0
        for v, s in zip(self.vars, self.strides):
            idx += element_index(v.ty, asg.get(v)) * s
        return idx


# ---------------------------------------------------------------- pattern web bridging


def pattern_index(p: Pattern, digit: dict[str, np.ndarray | int]):
    """Web index of a pattern's type from per-variable element indices."""
    if isinstance(p, PLeaf):
        return digit[p.var.name]
    assert isinstance(p, PPair)
    return pattern_index(p.left, digit) * web_size(pattern_type(p.right)) + pattern_index(
        p.right, digit
    )


def pattern_digits(p: Pattern, idx) -> dict[str, np.ndarray | int]:
    """Per-variable element indices from a web index of the pattern's type."""
    if isinstance(p, PLeaf):
        return {p.var.name: idx}
    assert isinstance(p, PPair)
    n = web_size(pattern_type(p.right))
    out = pattern_digits(p.left, idx // n)
    out.update(pattern_digits(p.right, idx % n))
    return out


def pattern_read(p: Pattern, asg: Assignment) -> WebElem:
    """The web element of a pattern's type induced by an assignment."""
    if isinstance(p, PLeaf):
        return asg.get(p.var)
    assert isinstance(p, PPair)
    return WebPair(pattern_read(p.left, asg), pattern_read(p.right, asg))


def pattern_bind(p: Pattern, el: WebElem) -> Assignment:
    """Split a web element of the pattern's type into an assignment."""
    pairs: list[tuple[Variable, WebElem]] = []

    def walk(q: Pattern, e: WebElem) -> None:
        if isinstance(q, PLeaf):
            pairs.append((q.var, e))
            return
        assert isinstance(q, PPair) and isinstance(e, WebPair)
        walk(q.left, e.left)
        walk(q.right, e.right)

    walk(p, el)
    return Assignment.of(pairs)
