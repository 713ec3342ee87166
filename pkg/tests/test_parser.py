"""Surface syntax: parsing, printing, and their round trips."""

from __future__ import annotations

import numpy as np
import pytest

from lve.denote import denote, joint_vector
from lve.errors import ParseError, UndeclaredArrowVariable, UndeclaredMatrix
from lve.parser import parse_program
from lve.printer import expr_str, matrix_decl_str, pattern_str, program_str, term_str
from lve.syntax import (
    BOOL,
    Arrow,
    PLeaf,
    PPair,
    Tensor,
    alpha_eq,
    pattern_vars,
    typecheck,
)
from helpers import SIXNODE_JOINT, bvar


def test_sixnode_parses(sixnode):
    assert sorted(sixnode.matrices) == ["M1", "M2", "M3", "M4", "M5", "M6"]
    assert all(m.stochastic for m in sixnode.matrices.values())
    term = sixnode.term
    assert len(term.defs) == 6
    assert [v.name for v in pattern_vars(term.output)] == ["x3", "x6"]
    assert typecheck(term) == Tensor(BOOL, BOOL)


def test_matrix_decl_details(sixnode):
    m5 = sixnode.matrices["M5"]
    assert m5.slots == (BOOL, BOOL)
    assert m5.out == BOOL
    assert m5.entries.shape == (4, 2)
    assert m5.entries[2, 0] == 0.55  # row for (f, t), column t


def test_sixnode_round_trip(sixnode_text, sixnode):
    text = program_str(sixnode.term)
    reparsed = parse_program(text)
    assert alpha_eq(reparsed.term, sixnode.term)
    assert program_str(reparsed.term) == text  # printing is a fixed point
    values = joint_vector(denote(reparsed.term))
    assert np.allclose(values, SIXNODE_JOINT, atol=1e-12)


def test_comments_and_whitespace():
    prog = parse_program(
        """
        # leading comment
        matrix C : -> Bool = [0.5, 0.5];  # trailing comment
        x = C;
        in x  # done
        """
    )
    assert len(prog.term.defs) == 1


def test_apostrophe_identifiers():
    prog = parse_program(
        "matrix C : -> Bool = [0.5, 0.5];\nv = C;\nv' = v;\nin (v, v')"
    )
    names = [v.name for v in pattern_vars(prog.term.output)]
    assert names == ["v", "v'"]


def test_nary_tuples_nest_right():
    prog = parse_program(
        "matrix C : -> Bool = [0.5, 0.5];\na = C;\nb = C;\nc = C;\nin (a, b, c)"
    )
    out = prog.term.output
    assert isinstance(out, PPair)
    assert isinstance(out.left, PLeaf)
    assert isinstance(out.right, PPair)


def test_pattern_binders():
    prog = parse_program(
        "matrix D : -> (Bool * Bool) = [0.1, 0.2, 0.3, 0.4];\n(a, b) = D;\nin (b, a)"
    )
    binder = prog.term.defs[0][0]
    assert [v.name for v in pattern_vars(binder)] == ["a", "b"]


def test_nested_let_and_lambda():
    prog = parse_program(
        "matrix C : -> Bool = [0.5, 0.5];\n"
        "matrix M : Bool -> Bool = [0.8, 0.2; 0.1, 0.9];\n"
        "var f : Bool -o Bool;\n"
        "y = let x = C in (let f = \\z. M(z) in f(x));\n"
        "in y"
    )
    assert typecheck(prog.term) == BOOL
    values = joint_vector(denote(prog.term))
    assert np.allclose(values, [0.45, 0.55], atol=1e-12)


def test_var_decl_controls_type():
    prog = parse_program("var p : Bool * Bool;\nmatrix C : (Bool * Bool) -> Bool = "
                         "[1, 0; 1, 0; 1, 0; 0, 1];\ny = C(p);\nin y")
    assert prog.var_types["p"] == Tensor(BOOL, BOOL)
    (free,) = {v for v in prog.term.defs[0][1].args}
    assert free.ty == Tensor(BOOL, BOOL)


def test_undeclared_positive_vars_default_to_bool():
    prog = parse_program("matrix M : Bool -> Bool = [1, 0; 0, 1];\ny = M(x);\nin y")
    (arg,) = prog.term.defs[0][1].args
    assert arg.ty == BOOL


def test_undeclared_matrix():
    with pytest.raises(UndeclaredMatrix):
        parse_program("y = Zap(x);\nin y")


def test_undeclared_arrow_variable():
    with pytest.raises(UndeclaredArrowVariable):
        parse_program("y = f(x);\nin y")


def test_declared_arrow_variable_ok():
    prog = parse_program("var f : Bool -o Bool;\ny = f(x);\nin y")
    assert prog.var_types["f"] == Arrow(BOOL, BOOL)


def test_stochastic_flag_detection():
    good = parse_program("matrix C : -> Bool = [0.25, 0.75];\nx = C;\nin x")
    assert good.matrices["C"].stochastic
    bad = parse_program("matrix C : -> Bool = [0.25, 0.5];\nx = C;\nin x")
    assert not bad.matrices["C"].stochastic


def test_matrix_shape_checked():
    with pytest.raises(Exception):
        parse_program("matrix C : -> Bool = [0.5, 0.25, 0.25];\nx = C;\nin x")


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_program("matrix C : -> Bool = [0.5, 0.5]\nx = C;\nin x")
    assert "2:" in str(err.value)  # the missing semicolon surfaces on line 2


def test_parse_error_on_garbage():
    with pytest.raises(ParseError):
        parse_program("matrix C : -> Bool = [0.5, 0.5];\nx = C;\nin x; y")
    with pytest.raises(ParseError):
        parse_program("")
    with pytest.raises(ParseError):
        parse_program("x = @;\nin x")


def test_matapp_args_must_be_bare_variables():
    with pytest.raises(ParseError):
        parse_program(
            "matrix M : Bool -> Bool = [1, 0; 0, 1];\ny = M((a, b));\nin y"
        )


def test_printer_pattern_and_expr():
    a, b, c = bvar("a"), bvar("b"), bvar("c")
    p = PPair(PLeaf(a), PPair(PLeaf(b), PLeaf(c)))
    assert pattern_str(p) == "(a, b, c)"  # right spines print flat


def test_printer_round_trips_golden_fixtures(golden_dir):
    for name in ("after_x1", "after_x2", "after_x4", "after_x5"):
        text = (golden_dir / f"{name}.lve").read_text()
        prog = parse_program(text)
        again = parse_program(program_str(prog.term))
        assert alpha_eq(again.term, prog.term), name


def test_matrix_decl_str(sixnode):
    line = matrix_decl_str(sixnode.matrices["M2"])
    assert line == "matrix M2 : Bool -> Bool = [0.8, 0.2; 0.1, 0.9];"
    nullary = matrix_decl_str(sixnode.matrices["M1"])
    assert nullary == "matrix M1 : -> Bool = [0.3, 0.7];"


def test_term_str_round_trip(sixnode):
    text = term_str(sixnode.term)
    assert text.startswith("x1 = M1;")
    assert text.endswith("in (x3, x6)")


def test_expr_str_application():
    prog = parse_program(
        "matrix M : Bool * Bool -> Bool = [1, 0; 1, 0; 1, 0; 0, 1];\ny = M(a, b);\nin y"
    )
    assert expr_str(prog.term.defs[0][1]) == "M(a, b)"
