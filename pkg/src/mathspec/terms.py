"""Typed mathematical terms: parser, printer, substitution, type adaptation.

The term language is intentionally small and closed: exact rational
constants, typed variables, arithmetic (``+ - * / ^`` with unary minus),
comparisons (``= < <=``), ``sin``/``cos``, finite lists ``[a, b]`` and open
intervals ``{a <..< b}``.  Item heads such as ``Constants`` or ``Maximum``
parse as applications of registered head names; the set of operators is not
user-extensible.

Numeric literals are exact rationals throughout; there is no floating
point anywhere in the pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Optional

# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class Typ:
    """A value type; ``elem`` is set only for kind == "list"."""

    kind: str  # "real" | "bool" | "set_real" | "list" | "unknown"
    elem: Optional["Typ"] = None

    def __repr__(self) -> str:
        if self.kind == "list":
            return f"ListOf({self.elem!r})"
        return self.kind


REAL = Typ("real")
BOOL = Typ("bool")
SET_REAL = Typ("set_real")
UNKNOWN = Typ("unknown")


def list_of(elem: Typ) -> Typ:
    return Typ("list", elem)


@dataclass(frozen=True)
class SrcPos:
    """1-based source position with a character length."""

    line: int
    col: int
    len: int = 0

    def __post_init__(self) -> None:
        assert self.line >= 1 and self.col >= 1 and self.len >= 0


@dataclass
class TypeContext:
    """Variable-name to type bindings under a named theory."""

    bindings: dict[str, Typ] = field(default_factory=dict)
    theory: str = "Base"

    def extended(self, more: Mapping[str, Typ]) -> "TypeContext":
        merged = dict(self.bindings)
        merged.update(more)
        return TypeContext(merged, self.theory)


EMPTY_CONTEXT = TypeContext()


# ---------------------------------------------------------------------------
# terms


class Term:
    """Base class; all terms are immutable values."""

    __slots__ = ()


@dataclass(frozen=True)
class NumConst(Term):
    value: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Var(Term):
    name: str
    typ: Typ = UNKNOWN
    # position of the occurrence, for type-error reporting; never compared
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App(Term):
    op: str
    args: tuple[Term, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class ListTerm(Term):
    elems: tuple[Term, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "elems", tuple(self.elems))


@dataclass(frozen=True)
class IntervalOpen(Term):
    lo: Term
    hi: Term


def num(value) -> NumConst:
    return NumConst(Fraction(value))


# ---------------------------------------------------------------------------
# operator tables

# binary precedence; comparisons are non-chaining
BINARY_PREC = {
    "=": 10,
    "<": 10,
    "<=": 10,
    "+": 20,
    "-": 20,
    "*": 30,
    "/": 30,
    "^": 50,
}
RIGHT_ASSOC = {"^"}
COMPARISONS = {"=", "<", "<="}
UNARY_PREC = 40  # between * / and ^, so -x^2 == -(x^2) and -x*y == (-x)*y

# closed set of named functions with arities
FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "solve": 2,
    "has_equality": 1,
    "is_linear_in": 2,
    "is_root_form_in": 2,
    "is_polynomial_in": 2,
    "is_rational_in": 2,
}

# item heads recognised by the parser (mirrors the shipped descriptor set)
ITEM_HEADS = frozenset(
    {
        "Constants",
        "Maximum",
        "AdditionalValues",
        "Extremum",
        "SideConditions",
        "FunctionVariable",
        "Domain",
        "ErrorBound",
        "Equality",
        "SolveFor",
        "Solutions",
    }
)

GREEK = {
    "alpha": "α", "beta": "β", "gamma": "γ", "delta": "δ", "epsilon": "ε",
    "zeta": "ζ", "eta": "η", "theta": "θ", "iota": "ι", "kappa": "κ",
    "lambda": "λ", "mu": "μ", "nu": "ν", "xi": "ξ", "omicron": "ο",
    "pi": "π", "rho": "ρ", "sigma": "σ", "tau": "τ", "upsilon": "υ",
    "phi": "φ", "chi": "χ", "psi": "ψ", "omega": "ω",
}

TYPE_NAMES = {"real": REAL, "bool": BOOL}


class ParseError(Exception):
    """Syntax error with the exact position of the first offending token."""

    def __init__(self, pos: SrcPos, msg: str):
        super().__init__(f"{msg} at {pos.line}:{pos.col}")
        self.pos = pos
        self.msg = msg


class TermTypeError(Exception):
    """A variable could not be given a type."""

    def __init__(self, name: str, pos: Optional[SrcPos] = None):
        where = f" at {pos.line}:{pos.col}" if pos else ""
        super().__init__(f"cannot resolve type of '{name}'{where}")
        self.name = name
        self.pos = pos


# counts calls into the parser; the refinement tests assert it stays flat
_PARSE_CALLS = 0


def parse_calls() -> int:
    return _PARSE_CALLS


# ---------------------------------------------------------------------------
# lexer


@dataclass(frozen=True)
class _Tok:
    kind: str  # NUM IDENT OP LPAREN RPAREN LBRACK RBRACK LBRACE RBRACE COMMA
    text: str
    line: int
    col: int
    value: Optional[Fraction] = None

    @property
    def pos(self) -> SrcPos:
        return SrcPos(self.line, self.col, len(self.text))

    @property
    def end_col(self) -> int:
        return self.col + len(self.text)


_PUNCT = {"(": "LPAREN", ")": "RPAREN", "[": "LBRACK", "]": "RBRACK",
          "{": "LBRACE", "}": "RBRACE", ",": "COMMA"}


def _is_digit(c: str) -> bool:
    return "0" <= c <= "9"  # ASCII only; unicode digits are not numerals


def _lex(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        start_col = col
        if _is_digit(c):
            j = i
            while j < n and _is_digit(src[j]):
                j += 1
            if j < n and src[j] == "." and j + 1 < n and _is_digit(src[j + 1]):
                j += 1
                while j < n and _is_digit(src[j]):
                    j += 1
            text = src[i:j]
            if "." in text:
                whole, frac = text.split(".")
                value = Fraction(int(whole + frac), 10 ** len(frac))
            else:
                value = Fraction(int(text))
            toks.append(_Tok("NUM", text, line, start_col, value))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(_Tok("IDENT", src[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if src.startswith("<..<", i):
            toks.append(_Tok("OP", "<..<", line, start_col))
            i += 4
            col += 4
            continue
        if src.startswith("<=", i):
            toks.append(_Tok("OP", "<=", line, start_col))
            i += 2
            col += 2
            continue
        if src.startswith("::", i):
            toks.append(_Tok("OP", "::", line, start_col))
            i += 2
            col += 2
            continue
        if c in "+-*/^=<":
            toks.append(_Tok("OP", c, line, start_col))
            i += 1
            col += 1
            continue
        if c in _PUNCT:
            toks.append(_Tok(_PUNCT[c], c, line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(SrcPos(line, start_col, 1), f"unexpected character {c!r}")
    return toks


# ---------------------------------------------------------------------------
# parser (precedence climbing)


class _Parser:
    def __init__(self, toks: list[_Tok], ctx: TypeContext, heads: frozenset[str]):
        self.toks = toks
        self.i = 0
        self.ctx = ctx
        self.heads = heads

    # -- token plumbing

    def _peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def _next(self) -> Optional[_Tok]:
        t = self._peek()
        if t is not None:
            self.i += 1
        return t

    def _eof_pos(self) -> SrcPos:
        if self.i > 0:
            prev = self.toks[self.i - 1]
            return SrcPos(prev.line, prev.end_col, 0)
        return SrcPos(1, 1, 0)

    def _fail(self, tok: Optional[_Tok], msg: str) -> ParseError:
        if tok is None:
            return ParseError(self._eof_pos(), msg + " (unexpected end of input)")
        return ParseError(tok.pos, f"{msg} (found {tok.text!r})")

    def _expect(self, kind: str, what: str) -> _Tok:
        t = self._next()
        if t is None or t.kind != kind:
            raise self._fail(t, f"expected {what}")
        return t

    # -- grammar

    def parse_expr(self, min_prec: int = 0, in_comparison: bool = False) -> Term:
        lhs = self.parse_atom()
        while True:
            t = self._peek()
            if t is None or t.kind != "OP" or t.text not in BINARY_PREC:
                return lhs
            op = t.text
            prec = BINARY_PREC[op]
            if prec < min_prec:
                return lhs
            if op in COMPARISONS:
                chained = in_comparison or (
                    isinstance(lhs, App) and lhs.op in COMPARISONS)
                if chained:
                    raise ParseError(t.pos, "chained comparisons are not allowed")
            self._next()
            nxt = prec if op in RIGHT_ASSOC else prec + 1
            rhs = self.parse_expr(nxt, in_comparison or op in COMPARISONS)
            lhs = self._mk_binary(op, lhs, rhs)

    def _mk_binary(self, op: str, lhs: Term, rhs: Term) -> Term:
        # fold constant division so rationals like 1/2 round-trip exactly
        if (op == "/" and isinstance(lhs, NumConst) and isinstance(rhs, NumConst)
                and rhs.value != 0):
            return NumConst(lhs.value / rhs.value)
        return App(op, (lhs, rhs))

    def parse_atom(self) -> Term:
        t = self._next()
        if t is None:
            raise self._fail(None, "expected a term")
        if t.kind == "NUM":
            return NumConst(t.value)
        if t.kind == "OP" and t.text == "-":
            arg = self.parse_expr(UNARY_PREC)
            if isinstance(arg, NumConst):
                return NumConst(-arg.value)
            return App("neg", (arg,))
        if t.kind == "IDENT":
            return self._ident(t)
        if t.kind == "LPAREN":
            inner = self.parse_expr(0)
            nxt = self._peek()
            if nxt is not None and nxt.kind == "OP" and nxt.text == "::":
                self._next()
                inner = self._annotate(inner, nxt)
            self._expect("RPAREN", "')'")
            return inner
        if t.kind == "LBRACK":
            return self._list(t)
        if t.kind == "LBRACE":
            lo = self.parse_expr(BINARY_PREC["<"] + 1)
            dots = self._next()
            if dots is None or dots.kind != "OP" or dots.text != "<..<":
                raise self._fail(dots, "expected '<..<' in interval")
            hi = self.parse_expr(BINARY_PREC["<"] + 1)
            self._expect("RBRACE", "'}'")
            return IntervalOpen(lo, hi)
        raise self._fail(t, "expected a term")

    def _annotate(self, inner: Term, at: _Tok) -> Term:
        t = self._expect("IDENT", "a type name after '::'")
        if t.text not in TYPE_NAMES:
            raise ParseError(t.pos, f"unknown type {t.text!r}")
        typ = TYPE_NAMES[t.text]
        if isinstance(inner, Var):
            return replace(inner, typ=typ)
        if isinstance(inner, NumConst):
            return inner  # numerals are exact rationals already
        raise ParseError(at.pos, "type annotation only allowed on variables and numerals")

    def _list(self, open_tok: _Tok) -> Term:
        elems: list[Term] = []
        t = self._peek()
        if t is not None and t.kind == "RBRACK":
            self._next()
            return ListTerm(())
        while True:
            e = self.parse_expr(0)
            if isinstance(e, ListTerm):
                raise ParseError(open_tok.pos, "nested lists are not allowed")
            elems.append(e)
            t = self._next()
            if t is None:
                raise self._fail(None, "expected ',' or ']'")
            if t.kind == "RBRACK":
                return ListTerm(tuple(elems))
            if t.kind != "COMMA":
                raise self._fail(t, "expected ',' or ']'")

    def _ident(self, t: _Tok) -> Term:
        name = GREEK.get(t.text, t.text)
        if t.text in FUNCTIONS or name in FUNCTIONS:
            fname = t.text if t.text in FUNCTIONS else name
            return self._function(fname, t)
        nxt = self._peek()
        if nxt is not None and nxt.kind == "OP" and nxt.text == "::":
            self._next()
            return self._annotate(Var(name, UNKNOWN, t.pos), nxt)
        typ = self.ctx.bindings.get(name, UNKNOWN)
        return Var(name, typ, t.pos)

    def _function(self, fname: str, t: _Tok) -> Term:
        arity = FUNCTIONS[fname]
        nxt = self._peek()
        if nxt is not None and nxt.kind == "LPAREN":
            self._next()
            args = [self.parse_expr(0)]
            while True:
                sep = self._next()
                if sep is None:
                    raise self._fail(None, "expected ',' or ')'")
                if sep.kind == "RPAREN":
                    break
                if sep.kind != "COMMA":
                    raise self._fail(sep, "expected ',' or ')'")
                args.append(self.parse_expr(0))
            if len(args) != arity:
                raise ParseError(t.pos, f"{fname} takes {arity} argument(s), got {len(args)}")
            return App(fname, tuple(args))
        if arity != 1:
            raise self._fail(nxt, f"expected '(' after {fname}")
        return App(fname, (self.parse_atom(),))


def parse_term(src: str, ctx: Optional[TypeContext] = None) -> Term:
    """Parse ``src`` into a term; raises :class:`ParseError` on bad input.

    Item strings like ``Constants [r = 7]`` are accepted: registered item
    heads apply to the term that follows them.
    """
    global _PARSE_CALLS
    _PARSE_CALLS += 1
    ctx = ctx or EMPTY_CONTEXT
    head, term, _ = _parse_item(src, ctx)
    if head is None:
        assert term is not None
        return term
    return App(head, () if term is None else (term,))


def parse_item(src: str, ctx: Optional[TypeContext] = None
               ) -> tuple[Optional[str], Optional[Term], Optional[SrcPos]]:
    """Split an item into (head, value, head position).

    Returns (None, term, None) when the input is a bare term without a
    registered head.  The value is None for a head with empty input.
    """
    global _PARSE_CALLS
    _PARSE_CALLS += 1
    return _parse_item(src, ctx or EMPTY_CONTEXT)


def _parse_item(src, ctx):
    toks = _lex(src)
    if toks and toks[0].kind == "IDENT" and toks[0].text in ITEM_HEADS:
        head_tok = toks[0]
        p = _Parser(toks, ctx, ITEM_HEADS)
        p.i = 1
        if p._peek() is None:
            return head_tok.text, None, head_tok.pos
        value = p.parse_expr(0)
        trailing = p._peek()
        if trailing is not None:
            raise p._fail(trailing, "unexpected input after item value")
        return head_tok.text, value, head_tok.pos
    p = _Parser(toks, ctx, ITEM_HEADS)
    term = p.parse_expr(0)
    trailing = p._peek()
    if trailing is not None:
        raise p._fail(trailing, "unexpected trailing input")
    return None, term, None


# ---------------------------------------------------------------------------
# printer


def _frac_str(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


_ATOM_LEVEL = 100


def _level(t: Term) -> int:
    if isinstance(t, App):
        if t.op in BINARY_PREC:
            return BINARY_PREC[t.op]
        if t.op == "neg":
            return UNARY_PREC
        return _ATOM_LEVEL  # function / item application renders atomically
    if isinstance(t, NumConst):
        if t.value.denominator != 1:
            return BINARY_PREC["/"]  # prints as p/q
        if t.value < 0:
            return UNARY_PREC
    return _ATOM_LEVEL


def _wrap(t: Term, limit: int) -> str:
    s = render(t)
    if _level(t) < limit:
        return f"({s})"
    return s


def render(t: Term) -> str:
    """Print a term with minimal parentheses; reparses to an equal term."""
    if isinstance(t, NumConst):
        return _frac_str(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, ListTerm):
        return "[" + ", ".join(render(e) for e in t.elems) + "]"
    if isinstance(t, IntervalOpen):
        return "{" + render(t.lo) + " <..< " + render(t.hi) + "}"
    if isinstance(t, App):
        if t.op in BINARY_PREC and len(t.args) == 2:
            prec = BINARY_PREC[t.op]
            lhs, rhs = t.args
            if t.op in RIGHT_ASSOC:
                left = _wrap(lhs, prec + 1)
                right = _wrap(rhs, prec)
            elif t.op in COMPARISONS:
                left = _wrap(lhs, prec + 1)
                right = _wrap(rhs, prec + 1)
            else:
                left = _wrap(lhs, prec)
                right = _wrap(rhs, prec + 1)
            return f"{left} {t.op} {right}"
        if t.op == "neg":
            return "-" + _wrap(t.args[0], UNARY_PREC + 1)
        if t.op in FUNCTIONS and len(t.args) != 1:
            return t.op + " (" + ", ".join(render(a) for a in t.args) + ")"
        if len(t.args) == 0:
            return t.op
        arg = t.args[0]
        if len(t.args) == 1:
            if _level(arg) == _ATOM_LEVEL and not isinstance(arg, App):
                return f"{t.op} {render(arg)}"
            if isinstance(arg, App) and arg.op not in BINARY_PREC and arg.op != "neg":
                return f"{t.op} {render(arg)}"
            return f"{t.op} ({render(arg)})"
        return t.op + " (" + ", ".join(render(a) for a in t.args) + ")"
    raise AssertionError(f"unrenderable term {t!r}")


# ---------------------------------------------------------------------------
# substitution and type adaptation


def substitute(env: Mapping[str, Term], t: Term) -> Term:
    """Replace variables by name; unbound variables pass through unchanged."""
    if isinstance(t, Var):
        return env.get(t.name, t)
    if isinstance(t, App):
        return App(t.op, tuple(substitute(env, a) for a in t.args))
    if isinstance(t, ListTerm):
        return ListTerm(tuple(substitute(env, e) for e in t.elems))
    if isinstance(t, IntervalOpen):
        return IntervalOpen(substitute(env, t.lo), substitute(env, t.hi))
    return t


def adapt_term_to_type(ctx: TypeContext, t: Term) -> Term:
    """Resolve every Unknown-typed variable from ``ctx``.

    Raises :class:`TermTypeError` for a variable with neither binding nor
    annotation.  Idempotent: adapting an adapted term is a no-op.
    """
    if isinstance(t, Var):
        if t.typ is not UNKNOWN and t.typ.kind != "unknown":
            return t
        bound = ctx.bindings.get(t.name)
        if bound is None:
            raise TermTypeError(t.name, t.pos)
        return replace(t, typ=bound)
    if isinstance(t, App):
        return App(t.op, tuple(adapt_term_to_type(ctx, a) for a in t.args))
    if isinstance(t, ListTerm):
        return ListTerm(tuple(adapt_term_to_type(ctx, e) for e in t.elems))
    if isinstance(t, IntervalOpen):
        return IntervalOpen(adapt_term_to_type(ctx, t.lo), adapt_term_to_type(ctx, t.hi))
    return t


_ARITH_OPS = {"+", "-", "*", "/", "^", "neg", "sin", "cos", "=", "<", "<="}


def infer_bindings(terms: Iterable[Term], hints: Mapping[str, Typ] | None = None
                   ) -> dict[str, Typ]:
    """Collect variable types from annotations and arithmetic use.

    A variable used as an operand of an arithmetic or comparison operator
    must be Real; explicit annotations win.  ``hints`` supplies fallback
    types for names that remain open (used for bare item arguments).
    """
    out: dict[str, Typ] = {}

    def walk(t: Term, in_arith: bool) -> None:
        if isinstance(t, Var):
            if t.typ is not UNKNOWN and t.typ.kind != "unknown":
                out[t.name] = t.typ
            elif in_arith and t.name not in out:
                out[t.name] = REAL
        elif isinstance(t, App):
            inner = t.op in _ARITH_OPS
            for a in t.args:
                walk(a, inner)
        elif isinstance(t, ListTerm):
            for e in t.elems:
                walk(e, in_arith)
        elif isinstance(t, IntervalOpen):
            walk(t.lo, True)
            walk(t.hi, True)

    for t in terms:
        walk(t, False)
    for name, typ in (hints or {}).items():
        out.setdefault(name, typ)
    return out


def occurs(name: str, t: Term) -> bool:
    if isinstance(t, Var):
        return t.name == name
    if isinstance(t, App):
        return any(occurs(name, a) for a in t.args)
    if isinstance(t, ListTerm):
        return any(occurs(name, e) for e in t.elems)
    if isinstance(t, IntervalOpen):
        return occurs(name, t.lo) or occurs(name, t.hi)
    return False
