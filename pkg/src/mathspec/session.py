"""The specify-phase state machine.

A session owns two interaction models (one for the problem pattern, one for
the method guard), the reference slots, the view toggle and the applied
tactic history.  Student input is kept as an ordered entry log; the models,
the live variant set and all feedback are recomputed from that log, so
deleting an entry or switching the theory re-classifies everything
deterministically.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from . import imodel, knowledge, refine, terms
from .imodel import (
    Cor,
    Feedback,
    IModel,
    IModelItem,
    Inc,
    OModel,
    PreCondsChecked,
    Sup,
    Syn,
    build_o_model,
    check_preconds,
    classify,
    feedback_kind,
    is_complete,
    make_environments,
)
from .knowledge import (
    DESCRIPTORS,
    Formalisation,
    MethodDef,
    ModelPattern,
    NotFoundError,
    ProblemDef,
    Store,
    parse_formalisation_items,
)
from .rewrite import equivalent, lookup_rule_set, NORM_RLS
from .terms import (
    App,
    ListTerm,
    ParseError,
    SrcPos,
    Term,
    TermTypeError,
    render,
)

PROBLEM_VIEW = "Problem"
METHOD_VIEW = "Method"

MODEL_PROBLEM = "Model_Problem"
ADD_GIVEN = "Add_Given"
ADD_FIND = "Add_Find"
ADD_RELATION = "Add_Relation"
SPECIFY_THEORY = "Specify_Theory"
SPECIFY_PROBLEM = "Specify_Problem"
SPECIFY_METHOD = "Specify_Method"
REFINE_PROBLEM = "Refine_Problem"
REFINE_TACITLY = "Refine_Tacitly"
TOGGLE_VIEW = "Toggle_View"
COMPLETE_SPEC = "Complete_Spec"
FINISH_SPECIFY = "Finish_Specify"
DELETE_ITEM = "Delete_Item"

INTERNAL_TACTICS = {MODEL_PROBLEM, REFINE_TACITLY}
ADD_FIELDS = {ADD_GIVEN: "Given", ADD_FIND: "Find", ADD_RELATION: "Relate"}
FIELD_TACTICS = {v: k for k, v in ADD_FIELDS.items()}


@dataclass(frozen=True)
class Tactic:
    kind: str
    text: Optional[str] = None
    pos: Optional[SrcPos] = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.text is not None:
            out["text"] = self.text
        if self.pos is not None:
            out["pos"] = [self.pos.line, self.pos.col, self.pos.len]
        return out

    @staticmethod
    def from_dict(d: dict) -> "Tactic":
        pos = None
        if d.get("pos"):
            pos = SrcPos(*d["pos"])
        return Tactic(d["kind"], d.get("text"), pos)


def add_tactic(m_field: str, text: str, pos: Optional[SrcPos] = None) -> Tactic:
    return Tactic(FIELD_TACTICS[m_field], text, pos)


@dataclass
class Settings:
    skip_specify: bool = False
    next_step_reveals: str = "full"  # "full" | "partial"

    def to_dict(self) -> dict:
        return {"skip_specify": self.skip_specify,
                "next_step_reveals": self.next_step_reveals}

    @staticmethod
    def from_dict(d: Optional[dict]) -> "Settings":
        d = d or {}
        return Settings(bool(d.get("skip_specify", False)),
                        str(d.get("next_step_reveals", "full")).lower())


@dataclass
class RefSlot:
    id: str
    entered: bool = False
    pos: Optional[SrcPos] = None


@dataclass
class Entry:
    entry_id: int
    view: str
    m_field: str
    raw: str
    pos: SrcPos
    origin: str = "student"  # "student" | "engine"


class InvalidTacticError(Exception):
    def __init__(self, reason: str, blockers: Optional[list[str]] = None):
        super().__init__(reason)
        self.reason = reason
        self.blockers = blockers or []


class SessionFinishedError(Exception):
    pass


class NoCasMatchError(Exception):
    def __init__(self, raw: str, why: str = "no matching command pattern"):
        super().__init__(f"{why}: {raw!r}")
        self.raw = raw
        self.why = why


# ---------------------------------------------------------------------------


class SpecSession:
    """State machine for one worked example; tactics mutate the session and
    append to ``history``, which replays deterministically."""

    def __init__(self, store: Store, example_id: str, fz: Formalisation,
                 settings: Settings):
        self.store = store
        self.example_id = example_id
        self.base = replace(fz, parsed=(), ctx=terms.TypeContext())
        self.fz = fz
        self.settings = settings
        theory_id, problem_id, method_id = fz.refs
        self.theory_id = theory_id
        self.problem: ProblemDef = store.lookup_problem(problem_id)
        self.method: MethodDef = (
            store.lookup_method(method_id) if method_id
            else MethodDef("", ModelPattern(())))
        self.refs: dict[str, RefSlot] = {
            "theory": RefSlot(theory_id),
            "problem": RefSlot(problem_id),
            "method": RefSlot(method_id),
        }
        self.view = PROBLEM_VIEW
        self.entries: list[Entry] = []
        self.history: list[Tactic] = []
        self.finished = False
        self.handoff: Optional[dict] = None
        self.last_refine: Optional[refine.RefineResult] = None
        self._line = 0
        self._build_o_models()
        self._rebuild()

    # -- derived state ------------------------------------------------------

    def _build_o_models(self) -> None:
        self.o_problem: OModel = build_o_model(self.fz, self.problem.model)
        self.o_method: OModel = build_o_model(self.fz, self.method.guard)
        self.total_variants = max(self.o_problem.total_variants,
                                  self.o_method.total_variants)

    def _rebuild(self) -> None:
        """Recompute both I-models and the live variant set from the entry
        log: parse each entry once, classify it against the model it was
        entered in plus the other model's own field for that descriptor."""
        live = frozenset(range(1, self.total_variants + 1))
        models = {PROBLEM_VIEW: IModel(), METHOD_VIEW: IModel()}
        for e in self.entries:
            try:
                head, value, _ = terms.parse_item(e.raw, self.fz.ctx)
                if value is not None:
                    hints = {}
                    if head in DESCRIPTORS and isinstance(value, terms.Var):
                        hints[value.name] = DESCRIPTORS[head].value_typ
                    fed = terms.infer_bindings([value], hints)
                    value = terms.adapt_term_to_type(
                        self.fz.ctx.extended(fed), value)
            except (ParseError, TermTypeError):
                item = IModelItem(frozenset(), e.m_field, Syn(e.raw), e.pos,
                                  e.entry_id)
                models[e.view].items.append(item)
                continue
            if head is None:
                fbv = Sup(None, (value,) if value is not None else ())
                models[e.view].items.append(
                    IModelItem(frozenset(), e.m_field, fbv, e.pos, e.entry_id))
                continue
            accepted: Optional[frozenset[int]] = None
            for view in (e.view, _other(e.view)):
                om = self.o_problem if view == PROBLEM_VIEW else self.o_method
                pattern = self._pattern(view)
                if view == e.view:
                    m_field = e.m_field
                else:
                    m_field = pattern.field_of(head)
                    if m_field is None:
                        continue
                fb, variants = classify(head, value, om, m_field, live)
                item = IModelItem(variants, m_field, fb, e.pos, e.entry_id)
                _insert(models[view], item)
                if isinstance(fb, (Cor, Inc)) and variants:
                    accepted = variants if accepted is None else accepted
            if accepted:
                live = live & accepted
        self.i_problem = models[PROBLEM_VIEW]
        self.i_method = models[METHOD_VIEW]
        self.live = live

    def _pattern(self, view: Optional[str] = None) -> ModelPattern:
        view = view or self.view
        return self.problem.model if view == PROBLEM_VIEW else self.method.guard

    def _o_model(self, view: Optional[str] = None) -> OModel:
        view = view or self.view
        return self.o_problem if view == PROBLEM_VIEW else self.o_method

    def imodel_for(self, view: Optional[str] = None) -> IModel:
        view = view or self.view
        return self.i_problem if view == PROBLEM_VIEW else self.i_method

    def next_pos(self, text: str) -> SrcPos:
        self._line += 1
        return SrcPos(self._line, 1, len(text))

    # -- completeness -------------------------------------------------------

    def preconds(self) -> PreCondsChecked:
        rs = lookup_rule_set(self.problem.where_rls)
        return check_preconds(rs, self.problem.where_, self.problem.model,
                              self.i_problem)

    def problem_complete(self) -> bool:
        return is_complete(self.problem.model, self.i_problem, self.preconds())

    def method_complete(self) -> bool:
        checked = check_preconds(lookup_rule_set("eval_rls"), (),
                                 self.method.guard, self.i_method)
        return is_complete(self.method.guard, self.i_method, checked)

    def refs_entered(self) -> bool:
        return all(slot.entered for slot in self.refs.values())

    def blockers(self) -> list[str]:
        out = []
        if not self.problem_complete():
            out.append("problem model incomplete")
        if not self.method_complete():
            out.append("method model incomplete")
        if not self.refs_entered():
            missing = [k for k, slot in self.refs.items() if not slot.entered]
            out.append("references not confirmed: " + ", ".join(missing))
        return out

    # -- tactics ------------------------------------------------------------

    def apply(self, t: Tactic) -> "SpecSession":
        if t.kind in INTERNAL_TACTICS:
            raise InvalidTacticError(f"{t.kind} is engine-internal")
        if self.finished:
            raise InvalidTacticError("session is finished")
        handler = {
            ADD_GIVEN: self._add, ADD_FIND: self._add, ADD_RELATION: self._add,
            SPECIFY_THEORY: self._specify_theory,
            SPECIFY_PROBLEM: self._specify_problem,
            SPECIFY_METHOD: self._specify_method,
            REFINE_PROBLEM: self._refine,
            TOGGLE_VIEW: self._toggle,
            COMPLETE_SPEC: self._complete,
            FINISH_SPECIFY: self._finish,
            DELETE_ITEM: self._delete,
        }.get(t.kind)
        if handler is None:
            raise InvalidTacticError(f"unknown tactic {t.kind!r}")
        handler(t)
        self.history.append(t)
        return self

    def _add(self, t: Tactic) -> None:
        raw = t.text or ""
        pos = t.pos or self.next_pos(raw)
        self.entries.append(Entry(len(self.entries), self.view,
                                  ADD_FIELDS[t.kind], raw, pos))
        self._rebuild()

    def _enter_engine(self, view: str, m_field: str, raw: str) -> None:
        pos = self.next_pos(raw)
        self.entries.append(Entry(len(self.entries), view, m_field, raw, pos,
                                  origin="engine"))

    def _specify_theory(self, t: Tactic) -> None:
        tid = t.text or ""
        self.store.lookup_theory(tid)  # NotFoundError -> protocol error
        self.theory_id = tid
        self.refs["theory"] = RefSlot(tid, True, t.pos or self.next_pos(tid))
        seed = self.store.theories[tid].seed
        # re-parse the prepared items and every raw input under the new theory
        self.fz = parse_formalisation_items(
            replace(self.base, parsed=(), ctx=terms.TypeContext()), seed)
        self._build_o_models()
        self._rebuild()

    def _specify_problem(self, t: Tactic) -> None:
        pid = t.text or ""
        self.problem = self.store.lookup_problem(pid)
        self.refs["problem"] = RefSlot(pid, True, t.pos or self.next_pos(pid))
        method_slot = self.refs["method"]
        stale = not method_slot.entered or not method_slot.id
        if stale and self.problem.solve_mets:
            met = self.problem.solve_mets[0]
            self.method = self.store.lookup_method(met)
            self.refs["method"] = RefSlot(met)
        self._build_o_models()
        self._rebuild()

    def _specify_method(self, t: Tactic) -> None:
        mid = t.text or ""
        self.method = self.store.lookup_method(mid)
        self.refs["method"] = RefSlot(mid, True, t.pos or self.next_pos(mid))
        self._build_o_models()
        self._rebuild()

    def _refine(self, t: Tactic) -> None:
        start = t.text or self.problem.start_refine
        result = refine.refine_problem(self.store, start, self.i_problem)
        self.last_refine = result
        if result.matched and result.matched != self.refs["problem"].id:
            self._specify_problem(Tactic(SPECIFY_PROBLEM, result.matched))

    def _refine_tacitly(self, start: str) -> None:
        result = refine.refine_tacitly(self.store, start, self.i_problem)
        if result.matched and result.matched != self.refs["problem"].id:
            self._specify_problem(Tactic(SPECIFY_PROBLEM, result.matched))
        self.history.append(Tactic(REFINE_TACITLY, start))

    def _toggle(self, t: Tactic) -> None:
        self.view = _other(self.view)

    def _complete(self, t: Tactic) -> None:
        """Fill every missing or incomplete item from the prepared values of
        one consistent variant, then confirm the references."""
        variant = min(self.live)
        for view in (PROBLEM_VIEW, METHOD_VIEW):
            pattern = self._pattern(view)
            om = self._o_model(view)
            for pat in pattern.items:
                name = pat.descriptor.name
                if self.imodel_for(view).cor_for(name) is not None:
                    continue
                prepared = [it for it in om.candidates(name, pat.m_field)
                            if variant in it.variants]
                if not prepared:
                    continue
                raw = item_text(name, prepared[0].values)
                self._enter_engine(view, pat.m_field, raw)
            self._rebuild()
        for kind in ("theory", "problem", "method"):
            slot = self.refs[kind]
            if not slot.entered and slot.id:
                self.refs[kind] = RefSlot(slot.id, True, self.next_pos(slot.id))

    def _finish(self, t: Tactic) -> None:
        blockers = self.blockers()
        if blockers:
            raise InvalidTacticError("cannot finish: " + "; ".join(blockers),
                                     blockers)
        envs = make_environments(self.method.guard, self.i_method)
        guard_model = []
        for pat in self.method.guard.items:
            value = envs.env_subst.get(pat.placeholder.name)
            guard_model.append({
                "m_field": pat.m_field,
                "descriptor": pat.descriptor.name,
                "text": render(value) if value is not None else "",
            })
        self.handoff = {
            "method": self.refs["method"].id,
            "actual_args": {name: render(v)
                            for name, v in sorted(envs.env_subst.items())},
            "guard_model": guard_model,
        }
        self.finished = True

    def _delete(self, t: Tactic) -> None:
        """Remove the entry behind an item; text is "field descriptor" or
        "entry:<id>"."""
        spec = (t.text or "").strip()
        if spec.startswith("entry:"):
            eid = int(spec.split(":", 1)[1])
            before = len(self.entries)
            self.entries = [e for e in self.entries if e.entry_id != eid]
            if len(self.entries) == before:
                raise InvalidTacticError(f"no entry {eid}")
        else:
            parts = spec.split()
            if len(parts) != 2:
                raise InvalidTacticError(
                    "delete needs 'field descriptor' or 'entry:<id>'")
            m_field, descriptor = parts
            item = self.imodel_for().slot(m_field, descriptor)
            if item is None or item.entry_id < 0:
                raise InvalidTacticError(
                    f"no {descriptor} item in {m_field} to delete")
            self.entries = [e for e in self.entries
                            if e.entry_id != item.entry_id]
        self._rebuild()

    # -- next step ----------------------------------------------------------

    def propose_next(self) -> Tactic:
        """Deterministic priority: first missing model item of the current
        view, then unconfirmed references, then the view toggle, finally
        the finish tactic."""
        if self.finished:
            raise SessionFinishedError("nothing left to propose")
        proposal = self._propose_item(self.view)
        if proposal is not None:
            return proposal
        for kind, tactic in (("theory", SPECIFY_THEORY),
                             ("problem", SPECIFY_PROBLEM),
                             ("method", SPECIFY_METHOD)):
            if not self.refs[kind].entered:
                return Tactic(tactic, self.refs[kind].id)
        if self.view == PROBLEM_VIEW and not self.method_complete():
            return Tactic(TOGGLE_VIEW)
        if self.view == METHOD_VIEW and not self.problem_complete():
            return Tactic(TOGGLE_VIEW)
        return Tactic(FINISH_SPECIFY)

    def _propose_item(self, view: str) -> Optional[Tactic]:
        pattern = self._pattern(view)
        om = self._o_model(view)
        im = self.imodel_for(view)
        for pat in pattern.items:
            name = pat.descriptor.name
            if im.cor_for(name) is not None:
                continue
            candidates = [it for it in om.candidates(name, pat.m_field)
                          if it.variants & self.live]
            if not candidates:
                continue
            target = min(candidates, key=lambda it: min(it.variants & self.live))
            values = self._reveal_values(pat, im, target)
            return add_tactic(pat.m_field, item_text(name, values))
        return None

    def _reveal_values(self, pat, im: IModel, target) -> tuple[Term, ...]:
        slot = im.slot(pat.m_field, pat.descriptor.name)
        entered: tuple[Term, ...] = ()
        if slot is not None and isinstance(slot.feedback, (Cor, Inc)):
            entered = slot.feedback.values
        if self.settings.next_step_reveals != "partial" or not pat.descriptor.is_list:
            return target.values
        missing = _missing_elements(entered, target.values)
        if not missing:
            return target.values
        return entered + (missing[0],)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "example_id": self.example_id,
            "settings": self.settings.to_dict(),
            "view": self.view,
            "theory": self.theory_id,
            "problem": self.refs["problem"].id,
            "method": self.refs["method"].id,
            "refs": {k: {"id": s.id, "entered": s.entered,
                         "pos": [s.pos.line, s.pos.col, s.pos.len] if s.pos else None}
                     for k, s in sorted(self.refs.items())},
            "live": sorted(self.live),
            "entries": [{"id": e.entry_id, "view": e.view, "field": e.m_field,
                         "raw": e.raw, "pos": [e.pos.line, e.pos.col, e.pos.len],
                         "origin": e.origin} for e in self.entries],
            "imodel_problem": _im_dict(self.i_problem),
            "imodel_method": _im_dict(self.i_method),
            "finished": self.finished,
            "handoff": self.handoff,
            "history": [t.to_dict() for t in self.history],
        }


def _other(view: str) -> str:
    return METHOD_VIEW if view == PROBLEM_VIEW else PROBLEM_VIEW


def _insert(im: IModel, item: IModelItem) -> None:
    fb = item.feedback
    if isinstance(fb, (Cor, Inc)):
        im.items = [
            it for it in im.items
            if isinstance(it.feedback, Syn)
            or getattr(it.feedback, "descriptor", None) != fb.descriptor
        ]
    im.items.append(item)


def _im_dict(im: IModel) -> list[dict]:
    out = []
    for it in im.items:
        fb = it.feedback
        entry: dict = {
            "variants": sorted(it.variants),
            "m_field": it.m_field,
            "kind": feedback_kind(fb),
            "pos": [it.pos.line, it.pos.col, it.pos.len],
            "entry": it.entry_id,
        }
        if isinstance(fb, Syn):
            entry["raw"] = fb.raw
        else:
            entry["descriptor"] = fb.descriptor
            entry["values"] = [render(v) for v in fb.values]
        out.append(entry)
    return out


def _missing_elements(entered, prepared) -> list[Term]:
    remaining = list(prepared)
    for t in entered:
        for i, p in enumerate(remaining):
            try:
                if equivalent(NORM_RLS, t, p):
                    del remaining[i]
                    break
            except Exception:
                continue
    return remaining


def item_text(descriptor: str, values) -> str:
    """Render an input line for a descriptor and its prepared values."""
    desc = DESCRIPTORS[descriptor]
    if desc.is_list:
        return render(App(descriptor, (ListTerm(tuple(values)),)))
    if not values:
        return descriptor
    return render(App(descriptor, (values[0],)))


# ---------------------------------------------------------------------------
# constructors


def start_example(store: Store, example_id: str,
                  settings: Optional[Settings] = None) -> SpecSession:
    """Open a session on a stored example; with skip_specify the whole
    phase is folded in and the session returns already finished."""
    settings = settings or Settings()
    fz = store.lookup_example(example_id)
    session = SpecSession(store, example_id, fz, settings)
    session.history.append(Tactic(MODEL_PROBLEM, example_id))
    if settings.skip_specify:
        session._complete(Tactic(COMPLETE_SPEC))
        session.history.append(Tactic(COMPLETE_SPEC))
        session._finish(Tactic(FINISH_SPECIFY))
        session.history.append(Tactic(FINISH_SPECIFY))
    return session


def apply_tactic(s: SpecSession, t: Tactic) -> SpecSession:
    return s.apply(t)


def replay(store: Store, example_id: str, settings: Settings,
           history: list[Tactic]) -> SpecSession:
    """Fold a recorded history over a fresh session; internal records are
    re-applied through their internal entry points."""
    session: Optional[SpecSession] = None
    for t in history:
        if t.kind == MODEL_PROBLEM:
            session = SpecSession(store, example_id,
                                  store.lookup_example(example_id), settings)
            session.history.append(t)
            continue
        assert session is not None, "history must start with Model_Problem"
        if t.kind == REFINE_TACITLY:
            session._refine_tacitly(t.text or "")
        elif t.kind == COMPLETE_SPEC and session.finished:
            continue
        else:
            session.apply(t)
    assert session is not None
    return session


def cas_command(store: Store, raw: str,
                settings: Optional[Settings] = None) -> SpecSession:
    """Start a session from a minimal command like ``solve (12 - 6*x = 0, x)``:
    synthesize the formalisation from the matched arguments, refine tacitly
    from the owner's start node and fold the specify-phase in."""
    settings = settings or Settings()
    try:
        cmd = terms.parse_term(raw)
    except ParseError:
        raise NoCasMatchError(raw, "input does not parse")
    owner = None
    for path in store.iter_problems():
        defn = store.lookup_problem(path)
        if defn.cas is None or not isinstance(cmd, App):
            continue
        if isinstance(defn.cas, App) and defn.cas.op == cmd.op \
                and len(defn.cas.args) == len(cmd.args):
            owner = defn
            break
    if owner is None:
        raise NoCasMatchError(raw)
    # the documented most-general precondition: an "=" in the input
    if not any(_contains_equality(a) for a in cmd.args):
        raise NoCasMatchError(raw, 'no "=" in the input')
    binding = {
        p.name: arg
        for p, arg in zip(owner.cas.args, cmd.args)
        if isinstance(p, terms.Var)
    }
    items = []
    for pat in owner.model.items:
        ph = pat.placeholder.name
        if ph in binding:
            value = binding[ph]
            if pat.descriptor.is_list and not isinstance(value, ListTerm):
                value = ListTerm((value,))
            text = item_text(pat.descriptor.name, _unwrap(pat, value))
        else:
            text = f"{pat.descriptor.name} {ph}"
        items.append((text, SrcPos(len(items) + 1, 1, len(text))))
    met = owner.solve_mets[0] if owner.solve_mets else ""
    f0 = Formalisation(text=raw, model_items=tuple(items),
                       refs=(owner.theory_id, owner.guh, met))
    theory = store.theories.get(owner.theory_id)
    seed = theory.seed if theory else knowledge.base_seed(owner.theory_id)
    fz = parse_formalisation_items(f0, seed)
    session = SpecSession(store, f"cas:{raw}", fz, settings)
    session.history.append(Tactic(MODEL_PROBLEM, f"cas:{raw}"))
    session._complete(Tactic(COMPLETE_SPEC))
    session.history.append(Tactic(COMPLETE_SPEC))
    session._refine_tacitly(owner.start_refine)
    session._complete(Tactic(COMPLETE_SPEC))
    session.history.append(Tactic(COMPLETE_SPEC))
    try:
        session._finish(Tactic(FINISH_SPECIFY))
        session.history.append(Tactic(FINISH_SPECIFY))
    except InvalidTacticError:
        pass  # e.g. refinement stopped on an abstract node without a method
    return session


def _unwrap(pat, value):
    if pat.descriptor.is_list and isinstance(value, ListTerm):
        return value.elems
    return (value,)


def _contains_equality(t: Term) -> bool:
    if isinstance(t, App):
        if t.op == "=":
            return True
        return any(_contains_equality(a) for a in t.args)
    if isinstance(t, ListTerm):
        return any(_contains_equality(e) for e in t.elems)
    return False
