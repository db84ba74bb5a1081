"""Rule-set driven normalization and evaluation.

Equivalence of two inputs is decided by rewriting both to a normal form:
equations become a canonical polynomial over opaque atoms (variables and
non-polynomial applications such as ``sin α``), with denominators cleared,
the coefficient gcd reduced to 1 and a positive leading coefficient under a
fixed total monomial order.  The pipeline is a closed normalization, not
user-extensible rewriting, which makes termination and exactness immediate.

Trigonometric identities are intentionally out of reach: ``sin`` and ``cos``
applications are opaque atoms, so e.g. ``sin(α)^2 + cos(α)^2`` does not
collapse to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional

from .terms import (
    App,
    IntervalOpen,
    ListTerm,
    NumConst,
    Term,
    Var,
    render,
)

_MAX_POW = 64  # guards against pathological exponents from fuzzed input


class UnsupportedTermError(Exception):
    """Raised when set/interval syntax leaks into arithmetic normalization."""

    def __init__(self, t: Term, why: str):
        super().__init__(f"{why}: {render(t)}")
        self.term = t
        self.why = why


class Tri(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class RuleSet:
    """A named evaluation pipeline; ``evaluators`` are builtin predicate ids."""

    id: str
    evaluators: tuple[str, ...] = ()


_EVALUATORS: dict[str, Callable[..., bool]] = {}


def register_evaluator(name: str, fn: Callable[..., bool]) -> None:
    _EVALUATORS[name] = fn


STRUCT_PREDICATES = (
    "has_equality",
    "is_linear_in",
    "is_root_form_in",
    "is_polynomial_in",
    "is_rational_in",
)

EVAL_RLS = RuleSet("eval_rls", STRUCT_PREDICATES)
NORM_RLS = RuleSet("norm_rls", ())

RULE_SETS = {rs.id: rs for rs in (EVAL_RLS, NORM_RLS)}


def lookup_rule_set(rs_id: str) -> RuleSet:
    if rs_id not in RULE_SETS:
        raise KeyError(f"unknown rule set {rs_id!r}")
    return RULE_SETS[rs_id]


# ---------------------------------------------------------------------------
# polynomials over opaque atoms
#
# Poly  = dict mapping monomial -> Fraction coefficient (zero coeffs dropped)
# Mono  = tuple of (atom_key, exponent) sorted by atom key
# atoms = dict mapping atom_key -> representative Term, for printing

Mono = tuple[tuple[str, int], ...]
Poly = dict[Mono, Fraction]

_ONE_MONO: Mono = ()


def p_const(q: Fraction) -> Poly:
    return {} if q == 0 else {_ONE_MONO: q}


def p_atom(key: str) -> Poly:
    return {((key, 1),): Fraction(1)}


def p_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for m, c in b.items():
        nc = out.get(m, Fraction(0)) + c
        if nc == 0:
            out.pop(m, None)
        else:
            out[m] = nc
    return out


def p_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    exps: dict[str, int] = {}
    for k, e in m1 + m2:
        exps[k] = exps.get(k, 0) + e
    return tuple(sorted(exps.items()))


def p_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = _mono_mul(m1, m2)
            nc = out.get(m, Fraction(0)) + c1 * c2
            if nc == 0:
                out.pop(m, None)
            else:
                out[m] = nc
    return out


def p_pow(a: Poly, n: int) -> Poly:
    out = p_const(Fraction(1))
    for _ in range(n):
        out = p_mul(out, a)
    return out


def _mono_order(m: Mono) -> tuple:
    return (sum(e for _, e in m), m)


def p_leading(a: Poly) -> Mono:
    return max(a, key=_mono_order)


def p_canon(a: Poly) -> Poly:
    """Scale to integer coefficients with gcd 1 and positive leading one."""
    if not a:
        return {}
    den_lcm = 1
    num_gcd = 0
    for c in a.values():
        den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
        num_gcd = math.gcd(num_gcd, abs(c.numerator))
    scale = Fraction(den_lcm, num_gcd)
    if a[p_leading(a)] < 0:
        scale = -scale
    return {m: c * scale for m, c in a.items()}


def p_degree_in(a: Poly, key: str) -> int:
    deg = 0
    for m in a:
        for k, e in m:
            if k == key:
                deg = max(deg, e)
    return deg


def p_is_const(a: Poly) -> bool:
    return all(m == _ONE_MONO for m in a)


def p_const_value(a: Poly) -> Fraction:
    return a.get(_ONE_MONO, Fraction(0))


# ---------------------------------------------------------------------------
# rational functions


@dataclass
class RF:
    """An exact fraction of polynomials; ``den`` is never the zero poly."""

    num: Poly
    den: Poly


def rf_add(a: RF, b: RF) -> RF:
    return RF(p_add(p_mul(a.num, b.den), p_mul(b.num, a.den)), p_mul(a.den, b.den))


def rf_sub(a: RF, b: RF) -> RF:
    return rf_add(a, RF(p_neg(b.num), b.den))


def rf_mul(a: RF, b: RF) -> RF:
    return RF(p_mul(a.num, b.num), p_mul(a.den, b.den))


def rf_div(a: RF, b: RF, at: Term) -> RF:
    if not b.num:
        raise UnsupportedTermError(at, "division by zero")
    return RF(p_mul(a.num, b.den), p_mul(a.den, b.num))


def rf_equal(a: RF, b: RF) -> bool:
    return p_mul(a.num, b.den) == p_mul(b.num, a.den)


def rf_is_const(a: RF) -> bool:
    return p_is_const(a.num) and p_is_const(a.den)


def rf_const_value(a: RF) -> Fraction:
    return p_const_value(a.num) / p_const_value(a.den)


# ---------------------------------------------------------------------------
# term -> rational function

_POLY_OPS = {"+", "-", "*", "/", "^", "neg"}


class _Atoms:
    def __init__(self) -> None:
        self.by_key: dict[str, Term] = {}

    def key_for(self, t: Term, inner_keys: tuple) -> str:
        key = repr(inner_keys)
        self.by_key.setdefault(key, t)
        return key


def _rf_key(rf: RF) -> tuple:
    # scale num and den together so the denominator becomes monic; this
    # keys equal values equally (2α/2 and α get the same key)
    def pkey(p: Poly) -> tuple:
        return tuple(sorted((m, str(c)) for m, c in p.items()))

    lead = rf.den[p_leading(rf.den)]
    num = {m: c / lead for m, c in rf.num.items()}
    den = {m: c / lead for m, c in rf.den.items()}
    return (pkey(num), pkey(den))


def to_rf(t: Term, atoms: _Atoms) -> RF:
    one = p_const(Fraction(1))
    if isinstance(t, NumConst):
        return RF(p_const(t.value), one)
    if isinstance(t, Var):
        return RF(p_atom(atoms.key_for(t, ("var", t.name))), one)
    if isinstance(t, (ListTerm, IntervalOpen)):
        raise UnsupportedTermError(t, "list/interval inside arithmetic")
    if isinstance(t, App):
        if t.op in ("sin", "cos"):
            inner = to_rf(t.args[0], atoms)
            return RF(p_atom(atoms.key_for(t, (t.op, _rf_key(inner)))), one)
        if t.op == "neg":
            a = to_rf(t.args[0], atoms)
            return RF(p_neg(a.num), a.den)
        if t.op == "^":
            return _pow_rf(t, atoms, one)
        if t.op in ("+", "-", "*", "/") and len(t.args) == 2:
            a = to_rf(t.args[0], atoms)
            b = to_rf(t.args[1], atoms)
            if t.op == "+":
                return rf_add(a, b)
            if t.op == "-":
                return rf_sub(a, b)
            if t.op == "*":
                return rf_mul(a, b)
            return rf_div(a, b, t)
        raise UnsupportedTermError(t, "non-arithmetic operator in arithmetic position")
    raise UnsupportedTermError(t, "unsupported term")


def _pow_rf(t: App, atoms: _Atoms, one: Poly) -> RF:
    base, expo = t.args
    if isinstance(expo, NumConst) and expo.value.denominator == 1:
        n = int(expo.value)
        if abs(n) > _MAX_POW:
            raise UnsupportedTermError(t, "exponent too large")
        b = to_rf(base, atoms)
        if n >= 0:
            return RF(p_pow(b.num, n), p_pow(b.den, n))
        if not b.num:
            raise UnsupportedTermError(t, "division by zero")
        return RF(p_pow(b.den, -n), p_pow(b.num, -n))
    # non-integer or symbolic exponent: the whole power is an opaque atom
    base_rf = to_rf(base, atoms)
    expo_rf = to_rf(expo, atoms)
    key = atoms.key_for(t, ("pow", _rf_key(base_rf), _rf_key(expo_rf)))
    return RF(p_atom(key), one)


# ---------------------------------------------------------------------------
# normal forms


@dataclass
class EquationNF:
    poly: Poly
    atoms: dict[str, Term]

    @property
    def is_zero(self) -> bool:
        return not self.poly


@dataclass
class ArithNF:
    rf: RF
    atoms: dict[str, Term]


@dataclass
class CompNF:
    op: str  # "<" or "<="
    lhs: ArithNF
    rhs: ArithNF


@dataclass
class ListNF:
    elems: list


@dataclass
class IntervalNF:
    lo: ArithNF
    hi: ArithNF


NormalForm = object


def normalize(rs: RuleSet, t: Term) -> NormalForm:
    """Rewrite ``t`` to its canonical form for equivalence checking."""
    if isinstance(t, ListTerm):
        return ListNF([normalize(rs, e) for e in t.elems])
    if isinstance(t, IntervalOpen):
        return IntervalNF(_arith_nf(t.lo), _arith_nf(t.hi))
    if isinstance(t, App) and t.op == "=":
        atoms = _Atoms()
        diff = rf_sub(to_rf(t.args[0], atoms), to_rf(t.args[1], atoms))
        return EquationNF(p_canon(diff.num), atoms.by_key)
    if isinstance(t, App) and t.op in ("<", "<="):
        return CompNF(t.op, _arith_nf(t.args[0]), _arith_nf(t.args[1]))
    return _arith_nf(t)


def _arith_nf(t: Term) -> ArithNF:
    atoms = _Atoms()
    return ArithNF(to_rf(t, atoms), atoms.by_key)


def nf_equal(a: NormalForm, b: NormalForm) -> bool:
    if isinstance(a, EquationNF) and isinstance(b, EquationNF):
        return a.poly == b.poly
    if isinstance(a, ArithNF) and isinstance(b, ArithNF):
        return rf_equal(a.rf, b.rf)
    if isinstance(a, CompNF) and isinstance(b, CompNF):
        return a.op == b.op and nf_equal(a.lhs, b.lhs) and nf_equal(a.rhs, b.rhs)
    if isinstance(a, IntervalNF) and isinstance(b, IntervalNF):
        return nf_equal(a.lo, b.lo) and nf_equal(a.hi, b.hi)
    if isinstance(a, ListNF) and isinstance(b, ListNF):
        return _multiset_equal(a.elems, b.elems)
    return False


def _multiset_equal(xs: list, ys: list) -> bool:
    if len(xs) != len(ys):
        return False
    remaining = list(ys)
    for x in xs:
        for i, y in enumerate(remaining):
            if nf_equal(x, y):
                del remaining[i]
                break
        else:
            return False
    return True


def equivalent(rs: RuleSet, a: Term, b: Term) -> bool:
    """True iff both terms rewrite to the same normal form.

    Lists compare as multisets of element normal forms; shape mismatches
    (an equation against an atom, say) are never equivalent.
    """
    return nf_equal(normalize(rs, a), normalize(rs, b))


# ---------------------------------------------------------------------------
# rendering normal forms back into terms


def _mono_term(m: Mono, coeff: Fraction, atoms: dict[str, Term]) -> Term:
    factors: list[Term] = []
    for key, exp in m:
        base = atoms[key]
        factors.append(base if exp == 1 else App("^", (base, NumConst(Fraction(exp)))))
    if not factors:
        return NumConst(coeff)
    prod = factors[0]
    for f in factors[1:]:
        prod = App("*", (prod, f))
    if coeff == 1:
        return prod
    return App("*", (NumConst(coeff), prod))


def poly_to_term(p: Poly, atoms: dict[str, Term]) -> Term:
    if not p:
        return NumConst(Fraction(0))
    items = sorted(p.items(), key=lambda kv: _mono_order(kv[0]), reverse=True)
    out: Optional[Term] = None
    for m, c in items:
        if out is None:
            out = _mono_term(m, c, atoms)
        elif c < 0:
            out = App("-", (out, _mono_term(m, -c, atoms)))
        else:
            out = App("+", (out, _mono_term(m, c, atoms)))
    assert out is not None
    return out


def nf_to_term(nf: NormalForm) -> Term:
    if isinstance(nf, EquationNF):
        return App("=", (poly_to_term(nf.poly, nf.atoms), NumConst(Fraction(0))))
    if isinstance(nf, ArithNF):
        num = poly_to_term(nf.rf.num, nf.atoms)
        if nf.rf.den == p_const(Fraction(1)):
            return num
        return App("/", (num, poly_to_term(nf.rf.den, nf.atoms)))
    if isinstance(nf, CompNF):
        return App(nf.op, (nf_to_term(nf.lhs), nf_to_term(nf.rhs)))
    if isinstance(nf, ListNF):
        return ListTerm(tuple(nf_to_term(e) for e in nf.elems))
    if isinstance(nf, IntervalNF):
        return IntervalOpen(nf_to_term(nf.lo), nf_to_term(nf.hi))
    raise AssertionError(f"not a normal form: {nf!r}")


# ---------------------------------------------------------------------------
# predicate evaluation


def eval_pred(rs: RuleSet, p: Term) -> Tri:
    """Decide a Bool-typed term: exact on ground comparisons, builtin
    structural predicates dispatched by evaluator id, Unknown otherwise.

    Comparisons against a list broadcast over its elements (a precondition
    like ``0 < fixes`` checks every constant)."""
    try:
        return _eval(rs, p)
    except UnsupportedTermError:
        return Tri.UNKNOWN


def _eval(rs: RuleSet, p: Term) -> Tri:
    if isinstance(p, App) and p.op in ("=", "<", "<="):
        sides = [p.args[0], p.args[1]]
        if any(isinstance(s, ListTerm) for s in sides):
            return _broadcast(rs, p.op, sides[0], sides[1])
        return _compare(p.op, sides[0], sides[1])
    if isinstance(p, App) and p.op in rs.evaluators:
        fn = _EVALUATORS.get(p.op)
        if fn is None:
            return Tri.UNKNOWN
        return Tri.TRUE if fn(*p.args) else Tri.FALSE
    return Tri.UNKNOWN


def _broadcast(rs: RuleSet, op: str, lhs: Term, rhs: Term) -> Tri:
    lefts = lhs.elems if isinstance(lhs, ListTerm) else (lhs,)
    rights = rhs.elems if isinstance(rhs, ListTerm) else (rhs,)
    if len(lefts) == 0 or len(rights) == 0:
        return Tri.TRUE  # vacuous over no elements
    if len(lefts) > 1 and len(rights) > 1 and len(lefts) != len(rights):
        return Tri.UNKNOWN
    n = max(len(lefts), len(rights))
    results = []
    for i in range(n):
        l = lefts[i % len(lefts)] if len(lefts) > 1 else lefts[0]
        r = rights[i % len(rights)] if len(rights) > 1 else rights[0]
        results.append(_eval(rs, App(op, (l, r))))
    if any(r is Tri.FALSE for r in results):
        return Tri.FALSE
    if all(r is Tri.TRUE for r in results):
        return Tri.TRUE
    return Tri.UNKNOWN


def _compare(op: str, lhs: Term, rhs: Term) -> Tri:
    atoms = _Atoms()
    diff = rf_sub(to_rf(lhs, atoms), to_rf(rhs, atoms))
    if op == "=":
        if not diff.num:
            return Tri.TRUE
        if rf_is_const(diff):
            return Tri.FALSE
        return Tri.UNKNOWN
    if not rf_is_const(diff):
        return Tri.UNKNOWN
    value = rf_const_value(diff)
    if op == "<":
        return Tri.TRUE if value < 0 else Tri.FALSE
    return Tri.TRUE if value <= 0 else Tri.FALSE
