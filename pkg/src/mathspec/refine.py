"""Problem refinement: search the problem tree for the most specific node
whose instantiated preconditions hold.

The search descends greedily: at each level the children are checked in
declaration order and the first holding child becomes the new frontier, so
the trail reproduces the documented linear -> root -> polynomial -> rational
checking order and the matched node is always the last holding trail entry.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import rewrite
from .imodel import IModel, PreCondsChecked, check_preconds
from .knowledge import Store
from .rewrite import register_evaluator
from .terms import App, ListTerm, IntervalOpen, Term, Var, occurs


@dataclass
class RefineResult:
    matched: Optional[str]
    trail: list[tuple[str, PreCondsChecked]]


def refine_problem(store: Store, start: str, im: IModel) -> RefineResult:
    """Search from ``start``; descends only into children of holding nodes.

    Peers of a holding node are not inspected further, which keeps the
    matched node the deepest one along a chain of holding ancestors, with
    first-in-order tie-breaks between siblings.
    """
    root = store.lookup_problem(start)  # raises NotFoundError
    trail: list[tuple[str, PreCondsChecked]] = []
    checked = _check_node(root, im)
    trail.append((start, checked))
    if not checked.all_true:
        return RefineResult(None, trail)
    matched = start
    while True:
        advanced = False
        for child_path in store.problem_children(matched):
            try:
                child = store.lookup_problem(child_path)
            except Exception:
                continue
            child_checked = _check_node(child, im)
            trail.append((child_path, child_checked))
            if child_checked.all_true:
                matched = child_path
                advanced = True
                break
        if not advanced:
            return RefineResult(matched, trail)


def refine_tacitly(store: Store, start: str, im: IModel) -> RefineResult:
    """Engine-invoked refinement; the trail stays out of the student's view
    (the caller records it in the session history only)."""
    result = refine_problem(store, start, im)
    return RefineResult(result.matched, [])


def _check_node(defn, im: IModel) -> PreCondsChecked:
    rs = rewrite.lookup_rule_set(defn.where_rls)
    return check_preconds(rs, defn.where_, defn.model, im)


# ---------------------------------------------------------------------------
# builtin structural predicates
#
# All of them decide on the normalized difference of the equation's sides,
# so syntactic noise (2x vs x+x) cannot change the verdict.


def _as_equation(t: Term) -> Optional[tuple[Term, Term]]:
    if isinstance(t, App) and t.op == "=" and len(t.args) == 2:
        return t.args[0], t.args[1]
    return None


def _unknown_name(x: Term) -> Optional[str]:
    return x.name if isinstance(x, Var) else None


def _split_sides(e: Term):
    sides = _as_equation(e)
    if sides is None:
        return None
    atoms = rewrite._Atoms()
    try:
        diff = rewrite.rf_sub(rewrite.to_rf(sides[0], atoms),
                              rewrite.to_rf(sides[1], atoms))
    except rewrite.UnsupportedTermError:
        return None
    return diff, atoms


def _var_key(atoms, name: str) -> Optional[str]:
    for key, term in atoms.by_key.items():
        if isinstance(term, Var) and term.name == name:
            return key
    return None


def _opaque_atoms_contain(atoms, name: str) -> bool:
    for key, term in atoms.by_key.items():
        if isinstance(term, Var):
            continue
        if occurs(name, term):
            return True
    return False


def has_equality(e: Term) -> bool:
    return _as_equation(e) is not None


def is_linear_in(e: Term, x: Term) -> bool:
    name = _unknown_name(x)
    split = _split_sides(e)
    if name is None or split is None:
        return False
    diff, atoms = split
    if _opaque_atoms_contain(atoms, name):
        return False
    key = _var_key(atoms, name)
    if key is None:
        return False
    if rewrite.p_degree_in(diff.den, key) > 0:
        return False
    return rewrite.p_degree_in(diff.num, key) == 1


def is_polynomial_in(e: Term, x: Term) -> bool:
    name = _unknown_name(x)
    split = _split_sides(e)
    if name is None or split is None:
        return False
    diff, atoms = split
    if _opaque_atoms_contain(atoms, name):
        return False
    key = _var_key(atoms, name)
    if key is None:
        return False
    if rewrite.p_degree_in(diff.den, key) > 0:
        return False
    return rewrite.p_degree_in(diff.num, key) >= 1


def is_rational_in(e: Term, x: Term) -> bool:
    name = _unknown_name(x)
    split = _split_sides(e)
    if name is None or split is None:
        return False
    diff, atoms = split
    if _opaque_atoms_contain(atoms, name):
        return False
    key = _var_key(atoms, name)
    if key is None:
        return False
    return rewrite.p_degree_in(diff.den, key) >= 1


def is_root_form_in(e: Term, x: Term) -> bool:
    """True when the unknown occurs under a non-integer rational power."""
    name = _unknown_name(x)
    sides = _as_equation(e)
    if name is None or sides is None:
        return False

    def walk(t: Term) -> bool:
        if isinstance(t, App):
            if t.op == "^":
                base, expo = t.args
                from .terms import NumConst

                if (isinstance(expo, NumConst)
                        and expo.value.denominator != 1
                        and occurs(name, base)):
                    return True
            return any(walk(a) for a in t.args)
        if isinstance(t, ListTerm):
            return any(walk(el) for el in t.elems)
        if isinstance(t, IntervalOpen):
            return walk(t.lo) or walk(t.hi)
        return False

    return walk(sides[0]) or walk(sides[1])


def register_builtin_predicates() -> dict:
    """Install the structural evaluators behind the equation tree's
    preconditions; returns the registry for inspection."""
    registry = {
        "has_equality": has_equality,
        "is_linear_in": is_linear_in,
        "is_polynomial_in": is_polynomial_in,
        "is_rational_in": is_rational_in,
        "is_root_form_in": is_root_form_in,
    }
    for fname, fn in registry.items():
        register_evaluator(fname, fn)
    return registry


register_builtin_predicates()
