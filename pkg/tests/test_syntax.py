import random

import pytest
from hypothesis import given, settings, strategies as st

from krivine_automata.syntax import *

from corpus import random_ground_formula


def test_parse_ex1(ex1_hfl):
    f = ex1_hfl
    assert f.kind == APP
    assert f.left.kind == MU
    assert f.left.var_type == make_type([PR])
    assert f.right.kind == NEGPROP and f.right.name == 'P'
    assert typecheck(TypingContext(), f) == PR
    assert formula_order(f) == 1


def test_types():
    t = parse_type('(Pr -> Pr) -> Pr -> Pr')
    assert t.arity == 2
    assert t.order == 2
    assert t.operands == [make_type([PR]), PR]
    assert format_type(t) == '(Pr -> Pr) -> Pr -> Pr'
    assert parse_type(format_type(t)) == t
    assert PR.order == 0


def test_name_resolution():
    f = parse('mu X:Pr. P \\/ (Q /\\ <> X) \\/ y')
    assert f.kind == MU
    kinds = [node.kind for node in f.walk()]
    assert FIXVAR in kinds and VAR in kinds and PROP in kinds
    free_l, free_x = free_variables(f)
    assert free_l == {'y'}
    assert free_x == set()
    assert subformulas(f)[0] is f
    assert len(subformulas(f, proper=True)) == len(subformulas(f)) - 1


def test_precedence():
    f = parse('A /\\ B \\/ C')
    assert f.kind == OR and f.left.kind == AND
    f = parse('<> A \\/ B')
    assert f.kind == DIAMOND and f.child.kind == OR
    f = parse('A \\/ B \\/ C')
    assert f.kind == OR and f.right.kind == OR


def test_parse_error_position():
    with pytest.raises(ParseError) as excinfo:
        parse('P \\/\n  ) Q')
    assert excinfo.value.line == 2
    assert excinfo.value.column is not None


def test_type_errors():
    with pytest.raises(TypeMismatch):
        typecheck(TypingContext(), parse('(P Q)'))
    with pytest.raises(TypeMismatch):
        typecheck(TypingContext(), parse('mu X:Pr -> Pr. P'))
    with pytest.raises(UnboundVariable):
        typecheck(TypingContext(), parse('<> x'))
    with pytest.raises(DialectViolation):
        typecheck(TypingContext(), parse('\\x:Pr. x'), dialect='apka-body')


def test_format_minimal_parentheses(ex1_hfl):
    assert format_formula(parse('P \\/ Q \\/ R')) == 'P \\/ Q \\/ R'
    assert format_formula(parse('<> (P \\/ Q)')) == '<> (P \\/ Q)'
    assert format_formula(parse('! P')) == '! P'
    assert structurally_equal(parse(format_formula(ex1_hfl)), ex1_hfl)


def test_dualize():
    f = parse('mu X:Pr. P \\/ [] X')
    g = dualize(f)
    assert g.kind == NU
    assert g.body.kind == AND
    assert g.body.left.kind == NEGPROP
    assert g.body.right.kind == DIAMOND
    assert structurally_equal(dualize(g), f)
    h = dualize(f, fixpoints=False)
    assert h.kind == MU


def test_substitute_respects_binders():
    f = parse('P \\/ (mu X:Pr. X) \\/ X', ctx=TypingContext(fixpoints={'X': PR}))
    g = substitute(f, fix_map={'X': parse('Q')})
    assert format_formula(g) == 'P \\/ (mu X:Pr. X) \\/ Q'


def test_binding_report():
    f = parse('mu X:Pr. <> (nu Y:Pr. X /\\ [] Y)')
    report = analyze_binding(f)
    assert report.well_named
    assert report.closed
    assert report.fp('Y').kind == NU
    assert report.outermore('X', 'Y')
    assert not report.outermore('Y', 'X')
    assert report.outermost() == ['X']

    g = parse('(mu X:Pr. X) \\/ (mu X:Pr. X)')
    assert not analyze_binding(g).well_named


@given(st.integers(min_value=0, max_value=2**32))
@settings(max_examples=50)
def test_format_parse_round_trip(seed):
    f = random_ground_formula(random.Random(seed), depth=4)
    g = parse(format_formula(f))
    assert structurally_equal(f, g)
    assert typecheck(TypingContext(), g) == PR
