"""The interaction model: pre-parsed example items, the student's evolving
input with per-item feedback, variant bookkeeping, environments and
precondition checking.

Feedback is the error channel here: input never raises, it classifies as
Correct, Incomplete, Superfluous or Syntax.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

from . import rewrite, terms
from .knowledge import (
    DESCRIPTORS,
    Descriptor,
    Formalisation,
    ModelPattern,
    Precond,
    ProblemDef,
    AuthoringError,
)
from .rewrite import NORM_RLS, RuleSet, Tri, UnsupportedTermError
from .terms import (
    App,
    ListTerm,
    NumConst,
    ParseError,
    SrcPos,
    Term,
    TermTypeError,
    TypeContext,
    Var,
    render,
)

# ---------------------------------------------------------------------------
# variants


def variant_assignment(f: Formalisation) -> tuple[dict[int, frozenset[int]], int]:
    """Assign variant index sets to the formalisation's items.

    Repeated descriptors are numbered 1..n in order of appearance; the last
    occurrence absorbs any remaining indices up to the total variant count,
    so a descriptor with fewer occurrences than the widest one still covers
    every variant (a single occurrence gets the full index set).
    """
    counts: dict[str, int] = {}
    for item in f.parsed:
        counts[item.descriptor] = counts.get(item.descriptor, 0) + 1
    total = max(counts.values(), default=1)
    seen: dict[str, int] = {}
    out: dict[int, frozenset[int]] = {}
    for idx, item in enumerate(f.parsed):
        nth = seen.get(item.descriptor, 0) + 1
        seen[item.descriptor] = nth
        if nth == counts[item.descriptor]:
            out[idx] = frozenset(range(nth, total + 1))
        else:
            out[idx] = frozenset({nth})
    return out, total


# ---------------------------------------------------------------------------
# O-model


@dataclass(frozen=True)
class OModelItem:
    variants: frozenset[int]
    m_field: str
    descriptor: Descriptor
    values: tuple[Term, ...]


@dataclass
class OModel:
    items: list[OModelItem] = field(default_factory=list)
    total_variants: int = 1

    def candidates(self, descriptor: str, m_field: Optional[str] = None
                   ) -> list[OModelItem]:
        return [
            it for it in self.items
            if it.descriptor.name == descriptor
            and (m_field is None or it.m_field == m_field)
        ]


def build_o_model(f: Formalisation, pattern: ModelPattern) -> OModel:
    """Collect the formalisation items covered by ``pattern``; the item's
    field comes from the pattern (the same descriptor may sit in Relate for
    the problem but in Given for the method)."""
    assignment, total = variant_assignment(f)
    om = OModel(total_variants=total)
    for idx, item in enumerate(f.parsed):
        m_field = pattern.field_of(item.descriptor)
        if m_field is None:
            continue
        om.items.append(OModelItem(
            assignment[idx], m_field, DESCRIPTORS[item.descriptor], item.values))
    return om


def init_o_model(f: Formalisation, p: ProblemDef, ctx: TypeContext) -> OModel:
    """O-model for the problem pattern, built once at session start."""
    for item in f.parsed:
        if item.descriptor not in DESCRIPTORS:
            raise AuthoringError(f"unknown descriptor {item.descriptor!r}")
    return build_o_model(f, p.model)


# ---------------------------------------------------------------------------
# feedback and the I-model


@dataclass(frozen=True)
class Cor:
    descriptor: str
    values: tuple[Term, ...]


@dataclass(frozen=True)
class Inc:
    descriptor: str
    values: tuple[Term, ...]


@dataclass(frozen=True)
class Sup:
    descriptor: Optional[str]
    values: tuple[Term, ...]


@dataclass(frozen=True)
class Syn:
    raw: str


Feedback = object  # Cor | Inc | Sup | Syn


def feedback_kind(fb: Feedback) -> str:
    return {Cor: "correct", Inc: "incomplete", Sup: "superfluous",
            Syn: "syntax"}[type(fb)]


@dataclass(frozen=True)
class IModelItem:
    variants: frozenset[int]
    m_field: str
    feedback: Feedback
    pos: SrcPos
    entry_id: int = -1


@dataclass
class IModel:
    items: list[IModelItem] = field(default_factory=list)

    def slot(self, m_field: str, descriptor: str) -> Optional[IModelItem]:
        for it in self.items:
            if it.m_field != m_field:
                continue
            fb = it.feedback
            if isinstance(fb, (Cor, Inc)) and fb.descriptor == descriptor:
                return it
        return None

    def cor_for(self, descriptor: str) -> Optional[IModelItem]:
        for it in self.items:
            if isinstance(it.feedback, Cor) and it.feedback.descriptor == descriptor:
                return it
        return None


# ---------------------------------------------------------------------------
# classification


@dataclass
class CheckOutcome:
    imodel: IModel
    live: frozenset[int]
    item: IModelItem


def _values_of(desc: Descriptor, value: Optional[Term]) -> tuple[Term, ...]:
    if value is None:
        return ()
    if desc.is_list and isinstance(value, ListTerm):
        return value.elems
    return (value,)


def _match_values(entered: Sequence[Term], prepared: Sequence[Term]
                  ) -> Optional[str]:
    """Multiset comparison by semantic equivalence.

    Returns "cor" when every prepared element is present, "inc" for a
    proper subset, None when some entered element matches nothing.
    """
    remaining = list(prepared)
    for t in entered:
        for i, p in enumerate(remaining):
            try:
                if rewrite.equivalent(NORM_RLS, t, p):
                    del remaining[i]
                    break
            except UnsupportedTermError:
                continue
        else:
            return None
    return "cor" if not remaining else "inc"


def classify(desc_name: str, value: Optional[Term], om: OModel,
             m_field: str, live: frozenset[int]
             ) -> tuple[Feedback, frozenset[int]]:
    """Steps 2-4 of the input pipeline: identify the descriptor's slot,
    then compare values against the prepared items of the live variants."""
    if desc_name not in DESCRIPTORS:
        vals = _values_of(Descriptor(desc_name, "single", terms.REAL), value)
        return Sup(desc_name, vals), frozenset()
    desc = DESCRIPTORS[desc_name]
    entered = _values_of(desc, value)
    candidates = [it for it in om.candidates(desc_name, m_field)
                  if it.variants & live]
    if not candidates:
        return Sup(desc_name, entered), frozenset()
    if not entered:
        return Inc(desc_name, ()), frozenset().union(
            *(it.variants for it in candidates)) & live
    cor_hits: list[OModelItem] = []
    inc_hits: list[OModelItem] = []
    for it in candidates:
        verdict = _match_values(entered, it.values)
        if verdict == "cor":
            cor_hits.append(it)
        elif verdict == "inc":
            inc_hits.append(it)
    if cor_hits:
        variants = frozenset().union(*(it.variants for it in cor_hits)) & live
        return Cor(desc_name, entered), variants
    if inc_hits:
        variants = frozenset().union(*(it.variants for it in inc_hits)) & live
        return Inc(desc_name, entered), variants
    return Sup(desc_name, entered), frozenset()


def check_input(raw: str, pos: SrcPos, om: OModel, mp: ModelPattern,
                im: IModel, ctx: TypeContext, m_field: Optional[str] = None,
                live: Optional[frozenset[int]] = None,
                entry_id: int = -1) -> CheckOutcome:
    """Classify one student input line and fold it into the I-model.

    The returned live set is the intersection of the accepted items'
    variant sets; narrowing is monotone while items are only added.
    """
    if live is None:
        live = frozenset(range(1, om.total_variants + 1))
    try:
        head, value, _ = terms.parse_item(raw, ctx)
        if value is not None:
            hints = {}
            if head in DESCRIPTORS and isinstance(value, Var):
                hints[value.name] = DESCRIPTORS[head].value_typ
            fed = terms.infer_bindings([value], hints)
            value = terms.adapt_term_to_type(ctx.extended(fed), value)
    except (ParseError, TermTypeError):
        item = IModelItem(frozenset(), m_field or "Given", Syn(raw), pos, entry_id)
        out = IModel(im.items + [item])
        return CheckOutcome(out, live, item)
    if head is None:
        item = IModelItem(frozenset(), m_field or "Given",
                          Sup(None, (value,) if value is not None else ()),
                          pos, entry_id)
        out = IModel(im.items + [item])
        return CheckOutcome(out, live, item)
    field_ = m_field or mp.field_of(head) or "Given"
    fb, variants = classify(head, value, om, field_, live)
    item = IModelItem(variants, field_, fb, pos, entry_id)
    items = list(im.items)
    if isinstance(fb, (Cor, Inc)):
        items = [
            it for it in items
            if not (_descriptor_of(it.feedback) == head and
                    not isinstance(it.feedback, Syn))
        ]
        live = live & variants if variants else live
    items.append(item)
    return CheckOutcome(IModel(items), live, item)


def _descriptor_of(fb: Feedback) -> Optional[str]:
    if isinstance(fb, (Cor, Inc, Sup)):
        return fb.descriptor
    return None


# ---------------------------------------------------------------------------
# environments


@dataclass
class Environments:
    env_subst: dict[str, Term]
    env_eval: dict[str, Fraction]
    missing: list[str]

    @property
    def complete(self) -> bool:
        return not self.missing


def make_environments(mp: ModelPattern, im: IModel) -> Environments:
    """Build the substitution and evaluation environments from the input.

    env_subst binds pattern placeholders to the entered value terms (lists
    rebuilt as list terms); env_eval extracts ground rational bindings from
    entered equalities, in list order (``Constants [s = 1, t = 2]`` yields
    s -> 1, t -> 2).  Descriptors with no Correct/Incomplete item are
    reported in ``missing``.
    """
    env_subst: dict[str, Term] = {}
    env_eval: dict[str, Fraction] = {}
    missing: list[str] = []
    for pat in mp.items:
        name = pat.descriptor.name
        slot = im.slot(pat.m_field, name)
        if slot is None:
            # the same descriptor may sit in another field of this pattern's
            # counterpart; accept any non-Sup entry for the descriptor
            slot = next(
                (it for it in im.items
                 if isinstance(it.feedback, (Cor, Inc))
                 and it.feedback.descriptor == name), None)
        if slot is None or not isinstance(slot.feedback, (Cor, Inc)):
            missing.append(name)
            continue
        values = slot.feedback.values
        if pat.descriptor.is_list:
            env_subst[pat.placeholder.name] = ListTerm(values)
        elif values:
            env_subst[pat.placeholder.name] = values[0]
        else:
            missing.append(name)
            continue
        for v in values:
            if isinstance(v, App) and v.op == "=" and isinstance(v.args[0], Var):
                q = _ground_value(v.args[1])
                if q is not None:
                    env_eval.setdefault(v.args[0].name, q)
    return Environments(env_subst, env_eval, missing)


def _ground_value(t: Term) -> Optional[Fraction]:
    try:
        atoms = rewrite._Atoms()
        rf = rewrite.to_rf(t, atoms)
    except UnsupportedTermError:
        return None
    if rewrite.rf_is_const(rf):
        return rewrite.rf_const_value(rf)
    return None


# ---------------------------------------------------------------------------
# precondition checking


@dataclass(frozen=True)
class PrecondResult:
    holds: bool
    pred: Term
    pos: SrcPos
    note: Optional[str] = None


@dataclass
class PreCondsChecked:
    all_true: bool
    items: list[PrecondResult]


def _prep_side(t: Term) -> Term:
    """Inside a comparison, a list of equalities stands for its left sides
    (a precondition like ``0 < fixes`` constrains the declared constants);
    singleton lists collapse to their element."""
    if isinstance(t, ListTerm):
        elems = t.elems
        if elems and all(isinstance(e, App) and e.op == "=" for e in elems):
            elems = tuple(e.args[0] for e in elems)
        if len(elems) == 1:
            return elems[0]
        return ListTerm(elems)
    return t


def instantiate_precond(pre: Term, envs: Environments) -> Term:
    t = terms.substitute(envs.env_subst, pre)
    if isinstance(t, App) and t.op in ("=", "<", "<="):
        t = App(t.op, (_prep_side(t.args[0]), _prep_side(t.args[1])))
    eval_env = {name: NumConst(q) for name, q in envs.env_eval.items()}
    return terms.substitute(eval_env, t)


def check_preconds(rs: RuleSet, where_: Sequence[Precond], mp: ModelPattern,
                   im: IModel) -> PreCondsChecked:
    """Instantiate and evaluate each precondition; Unknown counts as not
    holding, with a note saying why."""
    envs = make_environments(mp, im)
    items: list[PrecondResult] = []
    for pre in where_:
        inst = instantiate_precond(pre.term, envs)
        verdict = rewrite.eval_pred(rs, inst)
        if verdict is Tri.TRUE:
            items.append(PrecondResult(True, inst, pre.pos))
        elif verdict is Tri.FALSE:
            items.append(PrecondResult(False, inst, pre.pos))
        else:
            items.append(PrecondResult(False, inst, pre.pos, "not ground"))
    return PreCondsChecked(all(r.holds for r in items), items)


def is_complete(mp: ModelPattern, im: IModel,
                where_checked: PreCondsChecked) -> bool:
    """Complete iff every pattern item has a Correct entry, the entries are
    jointly consistent with at least one variant, and all preconditions
    hold."""
    if not where_checked.all_true:
        return False
    variant_sets = []
    for pat in mp.items:
        item = im.cor_for(pat.descriptor.name)
        if item is None:
            return False
        variant_sets.append(item.variants)
    if variant_sets:
        live = frozenset.intersection(*variant_sets)
        if not live:
            return False
    return True
