from fractions import Fraction

import pytest

from mathspec.imodel import (
    Cor,
    IModel,
    IModelItem,
    Inc,
    Sup,
    Syn,
    build_o_model,
    check_input,
    check_preconds,
    classify,
    init_o_model,
    is_complete,
    make_environments,
    variant_assignment,
)
from mathspec.knowledge import Precond
from mathspec.rewrite import EVAL_RLS, NORM_RLS, equivalent
from mathspec.terms import SrcPos, parse_term, render

POS = SrcPos(1, 1, 0)


def _enter(texts_fields, om, mp, ctx, im=None, live=None):
    im = im or IModel()
    for i, (field, text) in enumerate(texts_fields):
        out = check_input(text, SrcPos(i + 1, 1, len(text)), om, mp, im, ctx,
                          m_field=field, live=live, entry_id=i)
        im, live = out.imodel, out.live
    return im, live


def fig2_items():
    return [
        ("Given", "Constants [r = 7]"),
        ("Find", "Maximum A"),
        ("Find", "AdditionalValues [u, v]"),
        ("Relate", "Extremum (A = 2 * u * v - u ^ 2)"),
        ("Relate", "SideConditions [(u / 2) ^ 2 + (v / 2) ^ 2 = r ^ 2]"),
    ]


# ---------------------------------------------------------------------------
# variants / O-model


def test_variant_assignment_demo(coil):
    assignment, total = variant_assignment(coil)
    assert total == 3
    by_desc = {}
    for idx, item in enumerate(coil.parsed):
        by_desc.setdefault(item.descriptor, []).append(assignment[idx])
    assert by_desc["Constants"] == [frozenset({1, 2, 3})]
    assert by_desc["SideConditions"] == [frozenset({1}), frozenset({2, 3})]
    assert by_desc["FunctionVariable"] == [
        frozenset({1}), frozenset({2}), frozenset({3})]
    assert by_desc["Domain"] == [frozenset({1}), frozenset({2, 3})]


def test_o_model_problem_side_conditions(coil, coil_problem):
    om = init_o_model(coil, coil_problem, coil.ctx)
    side = om.candidates("SideConditions")
    v1 = next(it for it in side if 1 in it.variants)
    v2 = next(it for it in side if 2 in it.variants)
    assert [render(t) for t in v1.values] == ["(u / 2) ^ 2 + (v / 2) ^ 2 = r ^ 2"]
    assert [render(t) for t in v2.values] == ["u / 2 = r * sin α", "v / 2 = r * cos α"]
    assert all(it.m_field == "Relate" for it in side)


def test_o_model_method_function_variable(coil, coil_method):
    om = build_o_model(coil, coil_method.guard)
    fv = om.candidates("FunctionVariable")
    staged = {min(it.variants): render(it.values[0]) for it in fv}
    assert staged == {1: "u", 2: "v", 3: "α"}
    assert all(it.m_field == "Given" for it in fv)
    # the same item sits under Relate in the problem but Given in the method
    assert om.candidates("Extremum")[0].m_field == "Given"


def test_single_variant_formalisation(store):
    f = store.lookup_example("Equations/solve-demo")
    _, total = variant_assignment(f)
    assert total == 1
    eq_problem = store.lookup_problem("univariate/equation")
    om = init_o_model(f, eq_problem, f.ctx)
    assert all(it.variants == frozenset({1}) for it in om.items)


# ---------------------------------------------------------------------------
# classification


@pytest.fixture()
def demo_om(coil, coil_problem):
    return init_o_model(coil, coil_problem, coil.ctx)


def test_cor_fresh_additional_values(coil, coil_problem, demo_om):
    im, live = _enter([("Find", "AdditionalValues [u, v]")],
                      demo_om, coil_problem.model, coil.ctx)
    item = im.items[0]
    assert isinstance(item.feedback, Cor)
    assert item.feedback.descriptor == "AdditionalValues"
    assert live == frozenset({1, 2, 3})


def test_inc_proper_subset(coil, coil_problem, demo_om):
    im, _ = _enter([("Find", "AdditionalValues [u]")],
                   demo_om, coil_problem.model, coil.ctx)
    fb = im.items[0].feedback
    assert isinstance(fb, Inc)
    assert [render(v) for v in fb.values] == ["u"]


def test_empty_value_is_incomplete(coil, coil_problem, demo_om):
    im, _ = _enter([("Given", "Constants")], demo_om, coil_problem.model, coil.ctx)
    fb = im.items[0].feedback
    assert isinstance(fb, Inc) and fb.values == ()


def test_superfluous_after_competing_variant(coil, coil_problem, demo_om):
    im, live = _enter([
        ("Relate", "SideConditions [(u / 2) ^ 2 + (v / 2) ^ 2 = r ^ 2]"),
        ("Relate", "SideConditions [v = sin alpha]"),
    ], demo_om, coil_problem.model, coil.ctx)
    assert live == frozenset({1})
    first, second = im.items
    assert isinstance(first.feedback, Cor)
    assert isinstance(second.feedback, Sup)


def test_equivalent_input_is_correct_for_variant_one(coil, coil_problem, demo_om):
    im, live = _enter([("Relate", "SideConditions [u^2 + v^2 = 4*r^2]")],
                      demo_om, coil_problem.model, coil.ctx)
    item = im.items[0]
    assert isinstance(item.feedback, Cor)
    assert item.variants == frozenset({1})
    assert live == frozenset({1})


def test_syntax_error_becomes_syn(coil, coil_problem, demo_om):
    im, _ = _enter([("Given", "Constants [r = ")],
                   demo_om, coil_problem.model, coil.ctx)
    fb = im.items[0].feedback
    assert isinstance(fb, Syn) and fb.raw == "Constants [r = "


def test_unknown_descriptor_is_superfluous(coil, coil_problem, demo_om):
    im, _ = _enter([("Given", "x + 1")], demo_om, coil_problem.model, coil.ctx)
    assert isinstance(im.items[0].feedback, Sup)


def test_wrong_field_is_superfluous(coil, coil_problem, demo_om):
    im, _ = _enter([("Given", "Maximum A")], demo_om, coil_problem.model, coil.ctx)
    assert isinstance(im.items[0].feedback, Sup)


def test_resubmission_is_idempotent(coil, coil_problem, demo_om):
    once, live1 = _enter(fig2_items(), demo_om, coil_problem.model, coil.ctx)
    twice, live2 = _enter(fig2_items() + [fig2_items()[-1]],
                          demo_om, coil_problem.model, coil.ctx)
    assert live1 == live2
    assert [(it.m_field, it.feedback) for it in once.items] == \
        [(it.m_field, it.feedback) for it in twice.items]


def test_equivalence_insensitive_classification(coil, coil_problem, demo_om):
    a = "SideConditions [(u / 2) ^ 2 + (v / 2) ^ 2 = r ^ 2]"
    b = "SideConditions [u^2 + v^2 = 4*r^2]"
    assert equivalent(NORM_RLS, parse_term(a.split(" ", 1)[1], coil.ctx),
                      parse_term(b.split(" ", 1)[1], coil.ctx))
    im_a, _ = _enter([("Relate", a)], demo_om, coil_problem.model, coil.ctx)
    im_b, _ = _enter([("Relate", b)], demo_om, coil_problem.model, coil.ctx)
    fa, fb = im_a.items[0].feedback, im_b.items[0].feedback
    assert type(fa) is type(fb) is Cor
    assert fa.descriptor == fb.descriptor
    assert im_a.items[0].variants == im_b.items[0].variants


def test_variant_narrowing_is_monotone(coil, coil_method):
    om = build_o_model(coil, coil_method.guard)
    seen = frozenset(range(1, om.total_variants + 1))
    im, live = IModel(), seen
    for i, text in enumerate(["Constants [r = 7]", "FunctionVariable v",
                              "ErrorBound (epsilon = 0)"]):
        out = check_input(text, SrcPos(i + 1, 1, 1), om, coil_method.guard,
                          im, coil.ctx, m_field="Given", live=live, entry_id=i)
        assert out.live <= live
        im, live = out.imodel, out.live
    assert live == frozenset({2})


# ---------------------------------------------------------------------------
# environments


def test_make_environments_demo(coil, coil_problem, demo_om):
    im, _ = _enter(fig2_items(), demo_om, coil_problem.model, coil.ctx)
    envs = make_environments(coil_problem.model, im)
    assert envs.complete
    assert render(envs.env_subst["fixes"]) == "[r = 7]"
    assert render(envs.env_subst["maxx"]) == "A"
    assert render(envs.env_subst["vals"]) == "[u, v]"
    assert render(envs.env_subst["extr"]) == "A = 2 * u * v - u ^ 2"
    assert envs.env_eval == {"r": Fraction(7)}


def test_make_environments_positional_indexing(coil_problem):
    im, _ = _enter_raw_cor("Constants [s = 1, t = 2]", coil_problem)
    envs = make_environments(coil_problem.model, im)
    assert envs.env_eval == {"s": Fraction(1), "t": Fraction(2)}


def _enter_raw_cor(text, problem):
    # bypass O-model matching: build an I-model holding the item as Correct
    head, value = text.split(" ", 1)
    term = parse_term(value)
    values = term.elems if hasattr(term, "elems") else (term,)
    item = IModelItem(frozenset({1}), "Given", Cor(head, tuple(values)), POS)
    return IModel([item]), frozenset({1})


def test_make_environments_reports_missing(coil, coil_problem, demo_om):
    im, _ = _enter(fig2_items()[:2], demo_om, coil_problem.model, coil.ctx)
    envs = make_environments(coil_problem.model, im)
    assert "AdditionalValues" in envs.missing
    assert "SideConditions" in envs.missing


# ---------------------------------------------------------------------------
# preconditions and completeness


def test_check_preconds_demo(coil, coil_problem, demo_om):
    im, _ = _enter(fig2_items(), demo_om, coil_problem.model, coil.ctx)
    checked = check_preconds(EVAL_RLS, coil_problem.where_,
                             coil_problem.model, im)
    assert checked.all_true
    assert len(checked.items) == 1
    assert checked.items[0].holds
    assert render(checked.items[0].pred) == "0 < 7"


def test_check_preconds_empty_where():
    checked = check_preconds(EVAL_RLS, (), None or _empty_pattern(), IModel())
    assert checked.all_true and checked.items == []


def _empty_pattern():
    from mathspec.knowledge import ModelPattern

    return ModelPattern(())


def test_check_preconds_zero_radius(coil_problem):
    im, _ = _enter_raw_cor("Constants [r = 0]", coil_problem)
    checked = check_preconds(EVAL_RLS, coil_problem.where_,
                             coil_problem.model, im)
    assert not checked.all_true
    assert render(checked.items[0].pred) == "0 < 0"


def test_check_preconds_unground_counts_as_failed(coil_problem):
    checked = check_preconds(EVAL_RLS, coil_problem.where_,
                             coil_problem.model, IModel())
    assert not checked.all_true
    assert checked.items[0].note == "not ground"


def test_is_complete_fig2(coil, coil_problem, demo_om):
    im, _ = _enter(fig2_items(), demo_om, coil_problem.model, coil.ctx)
    checked = check_preconds(EVAL_RLS, coil_problem.where_,
                             coil_problem.model, im)
    assert is_complete(coil_problem.model, im, checked)


def test_is_complete_empty_false(coil_problem):
    checked = check_preconds(EVAL_RLS, (), coil_problem.model, IModel())
    assert not is_complete(coil_problem.model, IModel(), checked)


def test_is_complete_needs_preconds(coil, coil_problem, demo_om):
    im, _ = _enter(fig2_items(), demo_om, coil_problem.model, coil.ctx)
    failed = check_preconds(
        EVAL_RLS, (Precond(parse_term("0 < 0"), POS),),
        coil_problem.model, im)
    assert not is_complete(coil_problem.model, im, failed)


def test_no_cross_variant_completion(coil, coil_method):
    om = build_o_model(coil, coil_method.guard)
    items = [
        ("Given", "Constants [r = 7]"),
        ("Given", "Extremum (A = 2 * u * v - u ^ 2)"),
        ("Given", "SideConditions [(u / 2) ^ 2 + (v / 2) ^ 2 = r ^ 2]"),
        ("Given", "FunctionVariable alpha"),  # variant 3: clashes with Pythagoras
        ("Given", "Domain {0 <..< r}"),
        ("Given", "ErrorBound (epsilon = 0)"),
        ("Find", "Maximum A"),
        ("Find", "AdditionalValues [u, v]"),
    ]
    im, live = _enter(items, om, coil_method.guard, coil.ctx)
    assert not im.cor_for("FunctionVariable")  # classified Sup, variants clash
    checked = check_preconds(EVAL_RLS, (), coil_method.guard, im)
    assert not is_complete(coil_method.guard, im, checked)
