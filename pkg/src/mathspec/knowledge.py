"""Authored knowledge: problem patterns, method guards, worked examples.

Content lives in a plain-text, line-oriented format (see the shipped files
under ``data/``).  Everything is parsed and type-adapted once at load time;
sessions and the refinement search never parse a term string again.
"""
from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

from . import terms
from .rewrite import RULE_SETS
from .terms import (
    BOOL,
    REAL,
    SET_REAL,
    App,
    ListTerm,
    ParseError,
    SrcPos,
    Term,
    TermTypeError,
    TypeContext,
    Typ,
    Var,
    list_of,
)

GIVEN = "Given"
FIND = "Find"
RELATE = "Relate"
M_FIELDS = (GIVEN, FIND, RELATE)  # Where is not a model field

# input templates per argument shape (shown for missing/incomplete items)
LIST_OF_EQ = "list_of_eq"
LIST_OF_ATOMS = "list_of_atoms"
SINGLE = "single"
STRING_REF = "string_ref"

TEMPLATES = {
    LIST_OF_EQ: "[__=__, __=__]",
    LIST_OF_ATOMS: "[__, __]",
    SINGLE: "__",
    STRING_REF: '"__"',
}


@dataclass(frozen=True)
class Descriptor:
    name: str
    arg_shape: str
    value_typ: Typ  # fallback type for bare value variables

    @property
    def is_list(self) -> bool:
        return self.arg_shape in (LIST_OF_EQ, LIST_OF_ATOMS)

    @property
    def template(self) -> str:
        return TEMPLATES[self.arg_shape]


_D = Descriptor
DESCRIPTORS: dict[str, Descriptor] = {
    d.name: d
    for d in (
        _D("Constants", LIST_OF_EQ, list_of(BOOL)),
        _D("Maximum", SINGLE, REAL),
        _D("AdditionalValues", LIST_OF_ATOMS, list_of(REAL)),
        _D("Extremum", SINGLE, BOOL),
        _D("SideConditions", LIST_OF_EQ, list_of(BOOL)),
        _D("FunctionVariable", SINGLE, REAL),
        _D("Domain", SINGLE, SET_REAL),
        _D("ErrorBound", SINGLE, BOOL),
        _D("Equality", SINGLE, BOOL),
        _D("SolveFor", SINGLE, REAL),
        _D("Solutions", LIST_OF_ATOMS, list_of(REAL)),
    )
}


class AuthoringError(Exception):
    def __init__(self, msg: str, file: str = "<input>", line: int = 0):
        super().__init__(f"{file}:{line}: {msg}")
        self.msg = msg
        self.file = file
        self.line = line


class NotFoundError(Exception):
    def __init__(self, what: str, key):
        super().__init__(f"no {what} at {key!r}")
        self.what = what
        self.key = key


# ---------------------------------------------------------------------------
# store value types


@dataclass(frozen=True)
class PatternItem:
    m_field: str
    descriptor: Descriptor
    placeholder: Var


@dataclass(frozen=True)
class ModelPattern:
    items: tuple[PatternItem, ...]

    def field_of(self, descriptor_name: str) -> Optional[str]:
        for it in self.items:
            if it.descriptor.name == descriptor_name:
                return it.m_field
        return None

    def descriptor_names(self) -> list[str]:
        return [it.descriptor.name for it in self.items]

    def placeholder_names(self) -> set[str]:
        return {it.placeholder.name for it in self.items}


@dataclass(frozen=True)
class Precond:
    term: Term
    pos: SrcPos


@dataclass(frozen=True)
class ProblemDef:
    guh: str  # unique id, the slash path
    mathauthors: tuple[str, ...]
    start_refine: str
    cas: Optional[Term]
    solve_mets: tuple[str, ...]
    where_rls: str
    where_: tuple[Precond, ...]
    model: ModelPattern
    theory_id: str = ""  # theory the defining file was in

    @property
    def is_abstract(self) -> bool:
        return not self.solve_mets


@dataclass(frozen=True)
class MethodDef:
    id: str
    guard: ModelPattern
    program_ref: str = ""


@dataclass(frozen=True)
class ParsedItem:
    descriptor: str
    values: tuple[Term, ...]  # list values unwrapped, single values as [t]
    raw_value: Optional[Term]
    pos: SrcPos


@dataclass(frozen=True)
class Formalisation:
    text: str
    model_items: tuple[tuple[str, SrcPos], ...]
    refs: tuple[str, str, str]  # theory id, problem path, method path
    parsed: tuple[ParsedItem, ...] = ()
    ctx: TypeContext = field(default_factory=TypeContext)


@dataclass(frozen=True)
class TheoryDef:
    id: str
    imports: tuple[str, ...]
    seed: TypeContext


@dataclass
class _Node:
    key: str
    defn: Optional[object] = None
    children: dict[str, "_Node"] = field(default_factory=dict)


def split_path(path: str) -> list[str]:
    parts = path.split("/")
    if any(not p for p in parts):
        raise ValueError(f"bad id path {path!r}")
    return parts


def join_path(parts: Iterable[str]) -> str:
    return "/".join(parts)


@dataclass
class Store:
    problems: _Node = field(default_factory=lambda: _Node(""))
    methods: _Node = field(default_factory=lambda: _Node(""))
    examples: dict[str, Formalisation] = field(default_factory=dict)
    theories: dict[str, TheoryDef] = field(default_factory=dict)

    # -- tree plumbing

    def _insert(self, root: _Node, path: str, defn) -> _Node:
        node = root
        for part in split_path(path):
            node = node.children.setdefault(part, _Node(part))
        if node.defn is not None:
            raise KeyError(path)
        node.defn = defn
        return node

    def _find(self, root: _Node, key) -> Optional[_Node]:
        try:
            parts = split_path(key) if isinstance(key, str) else list(key)
        except ValueError:
            return None
        node = root
        for part in parts:
            node = node.children.get(part)
            if node is None:
                return None
        return node

    def lookup_problem(self, key) -> ProblemDef:
        node = self._find(self.problems, key) if key else None
        if node is None or node.defn is None:
            raise NotFoundError("problem", key)
        return node.defn

    def lookup_method(self, key) -> MethodDef:
        node = self._find(self.methods, key) if key else None
        if node is None or node.defn is None:
            raise NotFoundError("method", key)
        return node.defn

    def lookup_example(self, example_id: str) -> Formalisation:
        if example_id not in self.examples:
            raise NotFoundError("example", example_id)
        return self.examples[example_id]

    def lookup_theory(self, theory_id: str) -> TheoryDef:
        if theory_id not in self.theories:
            raise NotFoundError("theory", theory_id)
        return self.theories[theory_id]

    def problem_children(self, key) -> list[str]:
        node = self._find(self.problems, key)
        if node is None:
            raise NotFoundError("problem", key)
        base = key if isinstance(key, str) else join_path(key)
        return [f"{base}/{name}" for name in node.children]

    def iter_problems(self) -> list[str]:
        out: list[str] = []

        def walk(node: _Node, prefix: list[str]) -> None:
            for name, child in node.children.items():
                path = prefix + [name]
                if child.defn is not None:
                    out.append(join_path(path))
                walk(child, path)

        walk(self.problems, [])
        return out

    def iter_examples(self) -> list[str]:
        return sorted(self.examples)


# ---------------------------------------------------------------------------
# placeholder typing and pattern adaptation


def _pattern_item(m_field: str, head: str, value: Optional[Term],
                  file: str, line: int) -> PatternItem:
    if head not in DESCRIPTORS:
        raise AuthoringError(f"unknown descriptor {head!r}", file, line)
    if not isinstance(value, Var):
        raise AuthoringError(
            f"pattern item for {head} needs a placeholder variable", file, line)
    desc = DESCRIPTORS[head]
    placeholder = replace(value, typ=desc.value_typ)
    return PatternItem(m_field, desc, placeholder)


def adapt_to_type(ctx: TypeContext, mp: ModelPattern) -> ModelPattern:
    """Resolve every placeholder type from ``ctx``; idempotent."""
    out = []
    for it in mp.items:
        ph = it.placeholder
        if ph.typ.kind == "unknown":
            ph = terms.adapt_term_to_type(ctx, ph)
        out.append(PatternItem(it.m_field, it.descriptor, ph))
    return ModelPattern(tuple(out))


def base_seed(theory_id: str) -> TypeContext:
    # every theory knows the circle constant
    return TypeContext({"π": REAL}, theory_id)


# ---------------------------------------------------------------------------
# knowledge-file parsing


@dataclass
class _Quoted:
    text: str
    line: int
    col: int


def _scan_quoted(line: str, lineno: int, file: str) -> list[_Quoted]:
    out: list[_Quoted] = []
    i = 0
    while i < len(line):
        if line[i] == '"':
            j = line.find('"', i + 1)
            if j < 0:
                raise AuthoringError("unterminated string", file, lineno)
            out.append(_Quoted(line[i + 1:j], lineno, i + 2))
            i = j + 1
        else:
            i += 1
    return out


_BODY_KEYS = ("Method_Ref", "Start_Refine", "CAS", "Authors", "Program",
              "Given", "Where", "Find", "Relate", "Text", "Item", "Refs")


class _Loader:
    def __init__(self) -> None:
        self.theories: dict[str, TheoryDef] = {}
        self.problems: list[tuple[str, dict, str, int]] = []
        self.methods: list[tuple[str, dict, str, int]] = []
        self.examples: list[tuple[str, dict, str, int]] = []
        self.guhs: dict[str, tuple[str, int]] = {}
        self.current_theory = ""

    def feed(self, text: str, file: str) -> None:
        current: Optional[dict] = None
        current_key: Optional[str] = None
        for lineno, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.rstrip()
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            head = stripped.split(None, 1)[0]
            if head in ("theory", "problem", "method", "example"):
                current, current_key = self._declaration(
                    head, line, lineno, file)
                continue
            if current is None:
                raise AuthoringError(f"unexpected line {stripped!r}", file, lineno)
            current_key = self._body_line(current, current_key, line, lineno, file)

    def _declaration(self, kind: str, line: str, lineno: int, file: str):
        quoted = _scan_quoted(line, lineno, file)
        if not quoted:
            raise AuthoringError(f"{kind} needs a quoted id", file, lineno)
        ident = quoted[0].text
        if kind == "theory":
            imports = tuple(q.text for q in quoted[1:])
            if ident in self.theories:
                raise AuthoringError(f"duplicate theory {ident!r}", file, lineno)
            self.theories[ident] = TheoryDef(ident, imports, base_seed(ident))
            self.current_theory = ident
            return None, None
        if ident in self.guhs:
            raise AuthoringError(
                f"duplicate id {ident!r} (first at {self.guhs[ident][0]}:"
                f"{self.guhs[ident][1]})", file, lineno)
        self.guhs[ident] = (file, lineno)
        body: dict = {"_theory": self.current_theory}
        target = {"problem": self.problems, "method": self.methods,
                  "example": self.examples}[kind]
        target.append((ident, body, file, lineno))
        return body, None

    def _body_line(self, body: dict, current_key: Optional[str],
                   line: str, lineno: int, file: str) -> Optional[str]:
        stripped = line.strip()
        word = stripped.split(":", 1)[0].strip()
        if ":" in stripped and word in _BODY_KEYS:
            key = word
            rest = line
        elif current_key is not None and stripped.startswith('"'):
            key = current_key  # continuation line of quoted items
            rest = line
        elif stripped in RULE_SETS:
            body["where_rls"] = stripped
            return current_key
        else:
            raise AuthoringError(f"unrecognised line {stripped!r}", file, lineno)
        quoted = _scan_quoted(rest, lineno, file)
        if key == "Text":
            body["Text"] = quoted[0].text if quoted else ""
            return key
        body.setdefault(key, []).extend(quoted)
        return key


def _parse_pattern(body: dict, file: str, line: int) -> ModelPattern:
    items: list[PatternItem] = []
    seen: set[tuple[str, str]] = set()
    for m_field in M_FIELDS:
        for q in body.get(m_field, []):
            try:
                head, value, _ = terms.parse_item(q.text)
            except ParseError as e:
                raise AuthoringError(
                    f"unparsable pattern item {q.text!r}: {e.msg}", file, q.line)
            if head is None:
                raise AuthoringError(
                    f"pattern item {q.text!r} has no descriptor", file, q.line)
            item = _pattern_item(m_field, head, value, file, q.line)
            if (m_field, head) in seen:
                raise AuthoringError(
                    f"descriptor {head} repeated in {m_field}", file, q.line)
            seen.add((m_field, head))
            items.append(item)
    return ModelPattern(tuple(items))


def _parse_problem(ident: str, body: dict, file: str, line: int) -> ProblemDef:
    model = _parse_pattern(body, file, line)
    where: list[Precond] = []
    for q in body.get("Where", []):
        try:
            term = terms.parse_term(q.text)
        except ParseError as e:
            raise AuthoringError(
                f"unparsable precondition {q.text!r}: {e.msg}", file, q.line)
        where.append(Precond(term, SrcPos(q.line, q.col, len(q.text))))
    placeholders = model.placeholder_names()
    for pre in where:
        for name in sorted(_var_names(pre.term)):
            if name not in placeholders and name != "π":
                raise AuthoringError(
                    f"precondition placeholder {name!r} not in the model",
                    file, pre.pos.line)
    cas = None
    cas_q = body.get("CAS", [])
    if cas_q:
        try:
            cas = terms.parse_term(cas_q[0].text)
        except ParseError as e:
            raise AuthoringError(
                f"unparsable CAS pattern: {e.msg}", file, cas_q[0].line)
    start_refine = body["Start_Refine"][0].text if body.get("Start_Refine") else ident
    return ProblemDef(
        guh=ident,
        mathauthors=tuple(q.text for q in body.get("Authors", [])),
        start_refine=start_refine,
        cas=cas,
        solve_mets=tuple(q.text for q in body.get("Method_Ref", [])),
        where_rls=body.get("where_rls", "eval_rls"),
        where_=tuple(where),
        model=model,
        theory_id=body.get("_theory") or "",
    )


def _var_names(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        out: set[str] = set()
        for a in t.args:
            out |= _var_names(a)
        return out
    if isinstance(t, ListTerm):
        out = set()
        for e in t.elems:
            out |= _var_names(e)
        return out
    if isinstance(t, terms.IntervalOpen):
        return _var_names(t.lo) | _var_names(t.hi)
    return set()


def _parse_example(ident: str, body: dict, file: str, line: int) -> Formalisation:
    refs_q = body.get("Refs", [])
    if len(refs_q) != 3:
        raise AuthoringError(
            "example needs Refs: theory, problem path, method path", file, line)
    items = tuple(
        (q.text, SrcPos(q.line, q.col, len(q.text))) for q in body.get("Item", []))
    return Formalisation(
        text=body.get("Text", ""),
        model_items=items,
        refs=(refs_q[0].text, refs_q[1].text, refs_q[2].text),
    )


def parse_formalisation_items(f: Formalisation, seed: TypeContext,
                              file: str = "<input>") -> Formalisation:
    """Parse every model item once, then type-adapt under a context fed
    from annotations, arithmetic use and descriptor hints."""
    parsed: list[tuple[str, Optional[Term], SrcPos]] = []
    hints: dict[str, Typ] = {}
    for text, pos in f.model_items:
        try:
            head, value, _ = terms.parse_item(text, seed)
        except ParseError as e:
            raise AuthoringError(
                f"unparsable item {text!r}: {e.msg}", file, pos.line)
        if head is None or head not in DESCRIPTORS:
            raise AuthoringError(
                f"item {text!r} has no known descriptor", file, pos.line)
        desc = DESCRIPTORS[head]
        if isinstance(value, Var):
            hints.setdefault(value.name, desc.value_typ)
        parsed.append((head, value, pos))
    fed = terms.infer_bindings(
        [v for _, v, _ in parsed if v is not None], hints)
    ctx = seed.extended(fed)
    out: list[ParsedItem] = []
    for head, value, pos in parsed:
        desc = DESCRIPTORS[head]
        try:
            adapted = terms.adapt_term_to_type(ctx, value) if value is not None else None
        except TermTypeError as e:
            raise AuthoringError(
                f"cannot type item value: {e}", file, pos.line)
        if adapted is None:
            values: tuple[Term, ...] = ()
        elif desc.is_list and isinstance(adapted, ListTerm):
            values = adapted.elems
        else:
            values = (adapted,)
        out.append(ParsedItem(head, values, adapted, pos))
    return replace(f, parsed=tuple(out), ctx=ctx)


def load_knowledge(paths: Iterable[str | Path]) -> Store:
    """Load knowledge files (or directories of ``*.kb`` files) into a Store."""
    loader = _Loader()
    for p in paths:
        p = Path(p)
        files = sorted(p.glob("*.kb")) if p.is_dir() else [p]
        for f in files:
            loader.feed(f.read_text(encoding="utf-8"), str(f))
    return _link(loader)


def load_text(text: str, file: str = "<input>") -> Store:
    loader = _Loader()
    loader.feed(text, file)
    return _link(loader)


def builtin_pack_dir() -> Path:
    return Path(importlib.resources.files("mathspec") / "data")


def load_builtin() -> Store:
    return load_knowledge([builtin_pack_dir()])


def _link(loader: _Loader) -> Store:
    store = Store()
    store.theories = dict(loader.theories)
    for ident, body, file, line in loader.methods:
        guard = _parse_pattern(body, file, line)
        program = body["Program"][0].text if body.get("Program") else ""
        store._insert(store.methods, ident, MethodDef(ident, guard, program))
    for ident, body, file, line in loader.problems:
        defn = _parse_problem(ident, body, file, line)
        for met in defn.solve_mets:
            try:
                store.lookup_method(met)
            except NotFoundError:
                raise AuthoringError(
                    f"problem {ident!r} references unknown method {met!r}",
                    file, line)
        if defn.where_rls not in RULE_SETS:
            raise AuthoringError(
                f"unknown rule set {defn.where_rls!r}", file, line)
        store._insert(store.problems, ident, defn)
    for ident, body, file, line in loader.examples:
        f = _parse_example(ident, body, file, line)
        theory_id, problem_id, method_id = f.refs
        if theory_id not in store.theories:
            raise AuthoringError(
                f"example {ident!r} references unknown theory {theory_id!r}",
                file, line)
        try:
            problem = store.lookup_problem(problem_id)
            method = store.lookup_method(method_id)
        except NotFoundError as e:
            raise AuthoringError(f"example {ident!r}: {e}", file, line)
        f = parse_formalisation_items(f, store.theories[theory_id].seed, file)
        known = set(problem.model.descriptor_names()) | set(
            method.guard.descriptor_names())
        for item in f.parsed:
            if item.descriptor not in known:
                raise AuthoringError(
                    f"item descriptor {item.descriptor!r} matches neither the "
                    f"problem model nor the method guard", file, item.pos.line)
        store.examples[ident] = f
    # start_refine targets must resolve
    for path in store.iter_problems():
        defn = store.lookup_problem(path)
        try:
            store.lookup_problem(defn.start_refine)
        except NotFoundError:
            raise AuthoringError(
                f"problem {path!r} has dangling Start_Refine "
                f"{defn.start_refine!r}")
    return store
