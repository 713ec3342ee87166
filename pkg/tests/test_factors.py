"""Factor algebra, factor sets of terms, and classical variable elimination."""

from __future__ import annotations

import numpy as np
import pytest

from lve.cost import CostCounter
from lve.denote import DenoteContext, denote
from lve.errors import (
    BinderCapture,
    NotCanonicalized,
    SharedVarTypeMismatch,
    UnknownVariable,
    WebCapExceeded,
)
from lve.factors import (
    Factor,
    big_product,
    check_factor_vars,
    constant_factor,
    contract,
    definition_factor,
    dump_factors,
    eliminate,
    factor_sets_equal,
    factors_allclose,
    factors_of,
    marginal,
    partition,
    product,
    relation_from_factors,
    sum_out,
)
from lve.syntax import BOOL, LetTerm, MatApp, PLeaf, PPair, Var
from lve.webs import enumerate_assignments
from helpers import (
    SIXNODE_JOINT,
    SIXNODE_MAX_TABLE_FWD,
    SIXNODE_MAX_TABLE_REV,
    SIXNODE_ORDER_FWD,
    SIXNODE_ORDER_REV,
    bvar,
    coin_copy_term,
    matrix,
    order_by_name,
)

A, B, C = bvar("a"), bvar("b"), bvar("c")


def rng_factor(rng, vs) -> Factor:
    dims = tuple(2 for _ in vs)
    return Factor(tuple(vs), rng.random(dims))


def same_function(f: Factor, g: Factor, tol: float = 1e-9) -> bool:
    """Equality as functions of the union variables, order-independent."""
    union = set(f.vars) | set(g.vars)
    return all(
        abs(f.value(asg.restrict(f.vars)) - g.value(asg.restrict(g.vars))) <= tol
        for asg in enumerate_assignments(union)
    )


def test_factor_axes_must_be_sorted():
    with pytest.raises(AssertionError):
        Factor((B, A), np.ones((2, 2)))
    with pytest.raises(AssertionError):
        Factor((A,), np.ones(3))


def test_factor_table_is_readonly():
    f = constant_factor([A, B])
    with pytest.raises(ValueError):
        f.table[0, 0] = 2.0


def test_constant_factor():
    f = constant_factor([B, A], 3.0)
    assert f.vars == (A, B)
    assert f.degree == 2
    assert np.all(f.table == 3.0)
    scalar = constant_factor([])
    assert scalar.vars == () and scalar.flat().shape == (1,)


def test_product_values():
    rng = np.random.default_rng(0)
    f = rng_factor(rng, [A])
    g = rng_factor(rng, [A, B])
    h = product(f, g)
    assert h.vars == (A, B)
    for asg in enumerate_assignments([A, B]):
        expected = f.value(asg.restrict([A])) * g.value(asg)
        assert h.value(asg) == pytest.approx(expected, abs=1e-12)


def test_product_counts_cost():
    counter = CostCounter()
    product(constant_factor([A]), constant_factor([B]), counter)
    assert counter.muladds == 4
    assert counter.max_table == 4


def test_product_web_cap():
    vs = [bvar(f"v{i}") for i in range(6)]
    with pytest.raises(WebCapExceeded):
        product(constant_factor(vs[:3]), constant_factor(vs[3:]), cap=32)


def test_product_rejects_type_clash():
    from lve.syntax import Tensor, Variable

    a2 = Variable("a", Tensor(BOOL, BOOL))
    with pytest.raises(SharedVarTypeMismatch):
        product(constant_factor([A]), constant_factor([a2]))


def test_sum_out_values():
    rng = np.random.default_rng(1)
    f = rng_factor(rng, [A, B, C])
    g = sum_out(f, [B])
    assert g.vars == (A, C)
    for asg in enumerate_assignments([A, C]):
        total = sum(
            f.value(asg.union(basg)) for basg in enumerate_assignments([B])
        )
        assert g.value(asg) == pytest.approx(total, abs=1e-12)


def test_sum_out_no_overlap_is_identity():
    f = constant_factor([A])
    assert sum_out(f, [B]) is f


def test_contract_equals_product_then_sum():
    rng = np.random.default_rng(2)
    for _ in range(50):
        f = rng_factor(rng, [A, B])
        g = rng_factor(rng, [B, C])
        direct = contract(f, g, [B])
        staged = sum_out(product(f, g), [B])
        assert direct.vars == staged.vars
        assert np.allclose(direct.table, staged.table, atol=1e-12)


def test_contract_caps_result_not_product():
    vs = [bvar(f"v{i}") for i in range(4)]
    f = constant_factor(vs[:3])
    g = constant_factor(vs[1:])
    # The product web has 16 entries, above the cap, but the contracted
    # result (everything summed) is a scalar and passes.
    out = contract(f, g, vs, cap=8)
    assert out.vars == ()
    with pytest.raises(WebCapExceeded):
        product(f, g, cap=8)


def test_big_product():
    rng = np.random.default_rng(3)
    fs = [rng_factor(rng, [A]), rng_factor(rng, [B]), rng_factor(rng, [A, C])]
    acc = big_product(fs)
    assert acc.vars == (A, B, C)
    empty = big_product([])
    assert empty.vars == () and empty.flat()[0] == 1.0


def test_partition():
    f, g = constant_factor([A]), constant_factor([B])
    hit, miss = partition([f, g], [A])
    assert hit == [f] and miss == [g]


def test_definition_factor_values():
    m = matrix("M", 1, [[0.8, 0.2], [0.1, 0.9]])
    x, y = bvar("x"), bvar("y")
    fac = definition_factor(PLeaf(y), MatApp(m, (x,)))
    assert fac.vars == (x, y)
    for asg in enumerate_assignments([x, y]):
        row = 0 if str(asg.get(x)) == "t" else 1
        col = 0 if str(asg.get(y)) == "t" else 1
        assert fac.value(asg) == pytest.approx(m.entries[row, col])


def test_definition_factor_duplication():
    x, y = bvar("x"), bvar("y")
    fac = definition_factor(PLeaf(y), Var(x))
    assert same_function(fac, Factor((x, y), np.eye(2)))


def test_definition_factor_rejects_capture():
    x = bvar("x")
    with pytest.raises(BinderCapture):
        definition_factor(PLeaf(x), Var(x))


def test_factors_of_sixnode(sixnode_term):
    fs = factors_of(sixnode_term)
    assert len(fs) == 7  # one per definition plus the output constant
    assert check_factor_vars(sixnode_term)
    by_vars = {tuple(v.name for v in f.vars) for f in fs.factors}
    assert ("x1",) in by_vars
    assert ("x3", "x4", "x5") in by_vars
    assert ("x3", "x6") in by_vars  # the output constant


def test_factors_of_rejects_shadowing():
    m = matrix("M", 0, [[0.5, 0.5]])
    x = bvar("x")
    term = LetTerm(((PLeaf(x), MatApp(m, ())), (PLeaf(x), MatApp(m, ()))), PLeaf(x))
    with pytest.raises(NotCanonicalized):
        factors_of(term)


def test_relation_from_factors_matches_denote(sixnode_term):
    ctx = DenoteContext()
    direct = denote(sixnode_term, ctx)
    rebuilt = relation_from_factors(sixnode_term, ctx)
    assert rebuilt.vars == direct.vars
    assert rebuilt.ty == direct.ty
    assert np.allclose(rebuilt.matrix, direct.matrix, atol=1e-9)


def test_relation_from_factors_open_term():
    # y = M(x) with x free: the rebuilt relation is the matrix itself.
    m = matrix("M", 1, [[0.8, 0.2], [0.1, 0.9]])
    x, y = bvar("x"), bvar("y")
    term = LetTerm(((PLeaf(y), MatApp(m, (x,))),), PLeaf(y))
    rel = relation_from_factors(term)
    assert rel.vars == (x,)
    assert np.allclose(rel.matrix, [[0.8, 0.2], [0.1, 0.9]])


def test_eliminate_marginal_invariant_under_order(sixnode_term):
    fs0 = factors_of(sixnode_term)
    results = []
    for names in (SIXNODE_ORDER_FWD, SIXNODE_ORDER_REV, ("x4", "x1", "x5", "x2")):
        fs = eliminate(fs0, order_by_name(sixnode_term, names))
        results.append(marginal(fs, sixnode_term.output))
    for got in results:
        assert np.allclose(got, SIXNODE_JOINT, atol=1e-9)


def test_eliminate_records_steps_and_cost(sixnode_term):
    fs = eliminate(factors_of(sixnode_term), order_by_name(sixnode_term, SIXNODE_ORDER_FWD))
    assert [s.var.name for s in fs.steps] == list(SIXNODE_ORDER_FWD)
    assert fs.counter.max_table == SIXNODE_MAX_TABLE_FWD
    for st in fs.steps:
        assert st.muladds <= 2 * st.group_size * st.product_table
    rev = eliminate(factors_of(sixnode_term), order_by_name(sixnode_term, SIXNODE_ORDER_REV))
    assert rev.counter.max_table == SIXNODE_MAX_TABLE_REV


def test_eliminate_unknown_variable(sixnode_term):
    with pytest.raises(UnknownVariable):
        eliminate(factors_of(sixnode_term), [bvar("nope")])


def test_eliminate_leaves_input_untouched(sixnode_term):
    fs0 = factors_of(sixnode_term)
    n = len(fs0)
    eliminate(fs0, order_by_name(sixnode_term, SIXNODE_ORDER_FWD))
    assert len(fs0) == n
    assert fs0.steps == []


def test_marginal_without_elimination(sixnode_term):
    values = marginal(factors_of(sixnode_term), sixnode_term.output)
    assert np.allclose(values, SIXNODE_JOINT, atol=1e-9)


def test_marginal_of_sub_pattern(sixnode_term):
    out = sixnode_term.output
    assert isinstance(out, PPair)
    fs = factors_of(sixnode_term)
    x3_only = marginal(fs, out.left)
    joint = np.asarray(SIXNODE_JOINT).reshape(2, 2)
    assert np.allclose(x3_only, joint.sum(axis=1), atol=1e-9)


def test_factors_allclose():
    f = constant_factor([A])
    g = constant_factor([A], 1.0 + 5e-10)
    h = constant_factor([B])
    assert factors_allclose(f, g)
    assert not factors_allclose(f, h)
    assert not factors_allclose(f, constant_factor([A], 2.0))


def test_factor_sets_equal_is_multiset_equality():
    f, g = constant_factor([A]), constant_factor([B], 2.0)
    assert factor_sets_equal([f, g], [g, f])
    assert not factor_sets_equal([f, g], [f, f])
    assert not factor_sets_equal([f], [f, g])


def test_dump_factors_stable():
    f = Factor((A, B), np.array([[0.25, 0.75], [1.0, 0.0]]))
    text = dump_factors([f, constant_factor([])])
    assert text == (
        "factor a:Bool b:Bool\n"
        "  0.25 0.75 1 0\n"
        "factor (scalar)\n"
        "  1"
    )


def test_coin_copy_factors():
    term = coin_copy_term()
    fs = factors_of(term)
    assert len(fs) == 3
    values = marginal(fs, term.output)
    assert np.allclose(values, [0.3, 0.0, 0.0, 0.7], atol=1e-12)
