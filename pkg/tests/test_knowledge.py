import pytest

from mathspec import knowledge
from mathspec.knowledge import (
    AuthoringError,
    DESCRIPTORS,
    NotFoundError,
    adapt_to_type,
    join_path,
    load_builtin,
    load_text,
    split_path,
)
from mathspec.terms import REAL, TypeContext, render


@pytest.fixture(scope="module")
def store():
    return load_builtin()


def test_load_demo_problem(store):
    p = store.lookup_problem("univariate_calculus/Optimisation")
    given = [it for it in p.model.items if it.m_field == "Given"]
    assert [it.descriptor.name for it in given] == ["Constants"]
    assert render(p.where_[0].term) == "0 < fixes"
    assert p.where_rls == "eval_rls"
    assert p.solve_mets == ("Optimisation/by_univariate_calculus",)


def test_pattern_order_matches_declaration(store):
    p = store.lookup_problem("univariate_calculus/Optimisation")
    assert p.model.descriptor_names() == [
        "Constants", "Maximum", "AdditionalValues", "Extremum", "SideConditions"]
    m = store.lookup_method("Optimisation/by_univariate_calculus")
    assert m.guard.descriptor_names() == [
        "Constants", "Extremum", "SideConditions", "FunctionVariable",
        "Domain", "ErrorBound", "Maximum", "AdditionalValues"]


def test_lookup_by_path_segments(store):
    p = store.lookup_problem(["univariate_calculus", "Optimisation"])
    assert p.guh == "univariate_calculus/Optimisation"
    linear = store.lookup_problem(["univariate", "equation", "linear"])
    assert linear.guh == "univariate/equation/linear"


def test_lookup_empty_path_not_found(store):
    with pytest.raises(NotFoundError):
        store.lookup_problem([])


def test_equation_children_in_order(store):
    kids = store.problem_children("univariate/equation")
    assert kids == [
        "univariate/equation/linear",
        "univariate/equation/root",
        "univariate/equation/polynomial",
        "univariate/equation/rational",
    ]


def test_example_items_preparsed(store):
    f = store.lookup_example("Diff_App/coil-kernel")
    assert f.refs == ("Diff_App", "univariate_calculus/Optimisation",
                      "Optimisation/by_univariate_calculus")
    constants = [i for i in f.parsed if i.descriptor == "Constants"]
    assert len(constants) == 1
    assert render(constants[0].values[0]) == "r = 7"
    side = [i for i in f.parsed if i.descriptor == "SideConditions"]
    assert len(side) == 2
    assert len(side[1].values) == 2  # the two angle equations, unwrapped
    assert f.ctx.bindings["A"] == REAL
    assert f.ctx.bindings["α"] == REAL


def test_load_empty_text_gives_empty_store():
    store = load_text("")
    assert store.iter_problems() == []
    assert store.iter_examples() == []


def test_where_placeholder_must_be_in_model():
    bad = """
theory "T"
problem "p/q" =
  eval_rls
  Given: "Constants fixes"
  Where: "0 < bound"
  Find: "Maximum maxx"
"""
    with pytest.raises(AuthoringError) as ei:
        load_text(bad)
    assert "bound" in str(ei.value)


def test_duplicate_id_rejected():
    bad = """
theory "T"
problem "p/q" =
  Given: "Constants fixes"
problem "p/q" =
  Given: "Constants fixes"
"""
    with pytest.raises(AuthoringError) as ei:
        load_text(bad)
    assert "duplicate" in str(ei.value)


def test_unresolved_method_ref_rejected():
    bad = """
theory "T"
problem "p/q" =
  Method_Ref: "no/such"
  Given: "Constants fixes"
"""
    with pytest.raises(AuthoringError):
        load_text(bad)


def test_unparsable_item_rejected():
    bad = """
theory "T"
problem "p/q" =
  Given: "Constants [r = "
"""
    with pytest.raises(AuthoringError):
        load_text(bad)


def test_example_descriptor_must_match_some_pattern():
    bad = """
theory "T"
problem "p/q" =
  Method_Ref: "m/n"
  Given: "Constants fixes"
method "m/n" =
  Given: "Constants fixes"
example "T/e" =
  Item: "Maximum A"
  Refs: "T" "p/q" "m/n"
"""
    with pytest.raises(AuthoringError) as ei:
        load_text(bad)
    assert "Maximum" in str(ei.value)


def test_path_split_join_round_trip():
    for s in ["univariate", "univariate/equation/linear", "a/b"]:
        assert join_path(split_path(s)) == s
    with pytest.raises(ValueError):
        split_path("a//b")


def test_adapt_to_type_idempotent(store):
    p = store.lookup_problem("univariate_calculus/Optimisation")
    ctx = TypeContext({}, "Diff_App")
    once = adapt_to_type(ctx, p.model)
    assert adapt_to_type(ctx, once) == once


def test_descriptor_templates():
    assert DESCRIPTORS["Constants"].template == "[__=__, __=__]"
    assert DESCRIPTORS["AdditionalValues"].template == "[__, __]"
    assert DESCRIPTORS["Maximum"].template == "__"


def test_store_is_treated_as_immutable(store):
    # lookups never mutate: repeated queries observe identical objects
    a = store.lookup_problem("univariate/equation")
    b = store.lookup_problem("univariate/equation")
    assert a is b
