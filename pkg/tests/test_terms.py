from fractions import Fraction

import pytest
from hypothesis import given, settings

from mathspec import terms
from mathspec.terms import (
    REAL,
    UNKNOWN,
    App,
    IntervalOpen,
    ListTerm,
    NumConst,
    ParseError,
    TermTypeError,
    TypeContext,
    Var,
    adapt_term_to_type,
    infer_bindings,
    num,
    parse_item,
    parse_term,
    render,
    substitute,
)

from gen import term_strategy, typed_context

CTX = TypeContext({n: REAL for n in ["r", "u", "v", "A", "x", "y", "α", "ε", "π"]},
                  "Diff_App")


def test_parse_literal():
    assert parse_term("7", CTX) == NumConst(Fraction(7))


def test_parse_decimal_is_exact():
    assert parse_term("0.5", CTX) == NumConst(Fraction(1, 2))


def test_parse_extremum_equation():
    t = parse_term("A = 2 * u * v - u ^ 2", CTX)
    expected = App("=", (
        Var("A", REAL),
        App("-", (
            App("*", (App("*", (num(2), Var("u", REAL))), Var("v", REAL))),
            App("^", (Var("u", REAL), num(2))),
        )),
    ))
    assert t == expected


def test_parse_truncated_item_position():
    # hand-traced: "Constants [r = " fails right after the '=' token
    with pytest.raises(ParseError) as ei:
        parse_term("Constants [r = ", CTX)
    assert ei.value.pos.line == 1
    assert ei.value.pos.col == 15


def test_parse_interval():
    t = parse_term("{0 <..< r}", CTX)
    assert t == IntervalOpen(num(0), Var("r", REAL))


def test_parse_list_of_equalities():
    t = parse_term("[r = 7]", CTX)
    assert t == ListTerm((App("=", (Var("r", REAL), num(7))),))


def test_parse_annotation():
    t = parse_term("(u::real) / 2", TypeContext())
    assert t == App("/", (Var("u", REAL), num(2)))


def test_parse_greek_ascii_normalises_to_unicode():
    assert parse_term("alpha", CTX) == Var("α", REAL)
    assert parse_term("pi / 2", CTX) == App("/", (Var("π", REAL), num(2)))
    assert parse_term("α", CTX) == parse_term("alpha", CTX)


def test_parse_item_splits_head():
    head, value, pos = parse_item("Constants [r = 7]", CTX)
    assert head == "Constants"
    assert value == ListTerm((App("=", (Var("r", REAL), num(7))),))
    assert pos.col == 1


def test_parse_item_bare_term():
    head, value, _ = parse_item("x + 1", CTX)
    assert head is None
    assert value == App("+", (Var("x", REAL), num(1)))


def test_parse_item_empty_value():
    head, value, _ = parse_item("Constants", CTX)
    assert head == "Constants"
    assert value is None


def test_precedence_pow_before_mul():
    assert parse_term("2 * u ^ 2", CTX) == App(
        "*", (num(2), App("^", (Var("u", REAL), num(2)))))


def test_unary_minus_binds_looser_than_pow():
    t = parse_term("-x ^ 2", CTX)
    assert t == App("neg", (App("^", (Var("x", REAL), num(2))),))


def test_constant_division_folds():
    assert parse_term("1/2", CTX) == NumConst(Fraction(1, 2))
    assert parse_term("u/2", CTX) == App("/", (Var("u", REAL), num(2)))


def test_chained_comparison_rejected():
    with pytest.raises(ParseError):
        parse_term("a = b = c", CTX)


def test_nested_list_rejected():
    with pytest.raises(ParseError):
        parse_term("[[a], b]", CTX)


def test_solve_call():
    t = parse_term("solve (12 - 6*x = 0, x)", CTX)
    assert isinstance(t, App) and t.op == "solve"
    assert len(t.args) == 2
    assert t.args[1] == Var("x", REAL)


def test_render_literal():
    assert render(NumConst(Fraction(7))) == "7"


def test_render_extremum():
    t = parse_term("A = 2 * u * v - u ^ 2", CTX)
    assert render(t) == "A = 2 * u * v - u ^ 2"


def test_render_item():
    t = parse_term("Constants [r = (7::real)]", CTX)
    assert render(t) == "Constants [r = 7]"


def test_render_interval_verbatim():
    assert render(parse_term("{0 <..< pi / 2}", CTX)) == "{0 <..< π / 2}"


def test_render_sin_application():
    assert render(parse_term("r * sin alpha", CTX)) == "r * sin α"


@settings(max_examples=120)
@given(term_strategy())
def test_render_parse_round_trip(t):
    ctx = typed_context(t)
    assert parse_term(render(t), ctx) == t


@settings(max_examples=300)
@given(term_strategy())
def test_substitute_homomorphism(t):
    env = {"u": num(3), "x": App("+", (Var("y", REAL), num(1)))}
    if isinstance(t, App):
        assert substitute(env, t) == App(
            t.op, tuple(substitute(env, a) for a in t.args))


def test_substitute_examples():
    fixes = ListTerm((App("=", (Var("r", REAL), num(7))),))
    out = substitute({"fixes": fixes}, parse_term("Constants fixes", CTX))
    assert render(out) == "Constants [r = 7]"

    t = parse_term("Maximum maxx", CTX)
    assert render(substitute({"maxx": Var("A", REAL)}, t)) == "Maximum A"

    anything = parse_term("A = 2 * u * v - u ^ 2", CTX)
    assert substitute({}, anything) == anything


def test_adapt_resolves_from_context():
    t = parse_term("u / 2", TypeContext())
    adapted = adapt_term_to_type(TypeContext({"u": REAL}), t)
    assert adapted == App("/", (Var("u", REAL), num(2)))


def test_adapt_idempotent_on_annotated():
    t = parse_term("(u::real) / 2", TypeContext())
    assert adapt_term_to_type(TypeContext(), t) == t
    adapted = adapt_term_to_type(CTX, parse_term("u + v", CTX))
    assert adapt_term_to_type(CTX, adapted) == adapted


def test_adapt_unresolvable_raises():
    t = parse_term("x + y", TypeContext())
    with pytest.raises(TermTypeError) as ei:
        adapt_term_to_type(TypeContext(), t)
    assert ei.value.name == "x"


def test_infer_bindings_from_arithmetic_use():
    ts = [parse_term("A = 2 * u * v - u ^ 2", TypeContext()),
          parse_term("Maximum A", TypeContext())]
    bound = infer_bindings(ts)
    assert bound["A"] == REAL and bound["u"] == REAL and bound["v"] == REAL


def test_infer_bindings_hint_fallback():
    ts = [parse_term("Solutions sols", TypeContext())]
    bound = infer_bindings(ts, hints={"sols": terms.list_of(REAL)})
    assert bound["sols"] == terms.list_of(REAL)


def test_parse_error_positions_in_bounds():
    bad = ["", "(", "1 +", "Constants [", "a ~ b", "] x", "{0 <..<", "sin"]
    for src in bad:
        with pytest.raises(ParseError) as ei:
            parse_term(src, CTX)
        pos = ei.value.pos
        lines = src.split("\n")
        assert 1 <= pos.line <= max(1, len(lines))
        assert 1 <= pos.col <= len(lines[pos.line - 1]) + 1
