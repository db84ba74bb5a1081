"""The JSON protocol: pydantic request/response models and the engine that
manages sessions behind them.

Responses are state-synchronizing: every reply carries the full render of
the active view, so clients never compute feedback locally.
"""
from __future__ import annotations

import threading
import uuid
from typing import Optional

from pydantic import BaseModel, Field

from . import session as sess
from .imodel import Cor, Inc, Sup, Syn, feedback_kind
from .knowledge import DESCRIPTORS, NotFoundError, Store
from .session import (
    DELETE_ITEM,
    COMPLETE_SPEC,
    FINISH_SPECIFY,
    REFINE_PROBLEM,
    TOGGLE_VIEW,
    ADD_FIELDS,
    FIELD_TACTICS,
    InvalidTacticError,
    NoCasMatchError,
    SessionFinishedError,
    Settings,
    SpecSession,
    Tactic,
    item_text,
)
from .terms import SrcPos, render

REF_FIELDS = {"Theory": "Specify_Theory", "Problem": "Specify_Problem",
              "Method": "Specify_Method"}


class ProtocolRequest(BaseModel):
    session_id: Optional[str] = None
    command: str
    payload: dict = Field(default_factory=dict)


class Pos(BaseModel):
    line: int
    col: int
    len: int

    @staticmethod
    def of(p: Optional[SrcPos]) -> Optional["Pos"]:
        if p is None:
            return None
        return Pos(line=p.line, col=p.col, len=p.len)


class ModelLine(BaseModel):
    m_field: str
    descriptor: Optional[str] = None
    text: str = ""
    feedback_kind: str  # correct | incomplete | superfluous | syntax | missing
    pos: Optional[Pos] = None
    template: Optional[str] = None
    variants: list[int] = Field(default_factory=list)
    entry: Optional[int] = None


class RefLine(BaseModel):
    kind: str  # theory | problem | method
    id: str
    entered: bool
    pos: Optional[Pos] = None


class PrecondLine(BaseModel):
    holds: bool
    text: str
    pos: Optional[Pos] = None
    note: Optional[str] = None


class Proposal(BaseModel):
    tactic: str
    field: Optional[str] = None
    text: Optional[str] = None


class TrailEntry(BaseModel):
    path: str
    holds: bool
    preconds: list[PrecondLine] = Field(default_factory=list)


class Listing(BaseModel):
    id: str
    text: str = ""


class ProtocolResponse(BaseModel):
    session_id: Optional[str] = None
    status: str = "ok"  # ok | error
    message: Optional[str] = None
    view: Optional[str] = None
    model_render: list[ModelLine] = Field(default_factory=list)
    refs_render: list[RefLine] = Field(default_factory=list)
    preconds_render: list[PrecondLine] = Field(default_factory=list)
    all_preconds_true: Optional[bool] = None
    is_complete: Optional[bool] = None
    method_complete: Optional[bool] = None
    finished: Optional[bool] = None
    live_variants: list[int] = Field(default_factory=list)
    proposals: Optional[list[Proposal]] = None
    trail: Optional[list[TrailEntry]] = None
    matched: Optional[str] = None
    handoff: Optional[dict] = None
    listing: Optional[list[Listing]] = None
    blockers: Optional[list[str]] = None


# ---------------------------------------------------------------------------
# rendering


def render_model(s: SpecSession) -> list[ModelLine]:
    pattern = s._pattern()
    im = s.imodel_for()
    lines: list[ModelLine] = []
    claimed: set[int] = set()
    for pat in pattern.items:
        slot = im.slot(pat.m_field, pat.descriptor.name)
        if slot is None:
            lines.append(ModelLine(
                m_field=pat.m_field,
                descriptor=pat.descriptor.name,
                feedback_kind="missing",
                template=pat.descriptor.template,
            ))
            continue
        claimed.add(id(slot))
        fb = slot.feedback
        line = ModelLine(
            m_field=slot.m_field,
            descriptor=pat.descriptor.name,
            text=item_text(pat.descriptor.name, fb.values),
            feedback_kind=feedback_kind(fb),
            pos=Pos.of(slot.pos),
            variants=sorted(slot.variants & s.live),
            entry=slot.entry_id,
        )
        if isinstance(fb, Inc):
            line.template = pat.descriptor.template
        lines.append(line)
    for it in im.items:
        if id(it) in claimed:
            continue
        fb = it.feedback
        if isinstance(fb, Syn):
            lines.append(ModelLine(
                m_field=it.m_field, text=fb.raw, feedback_kind="syntax",
                pos=Pos.of(it.pos), entry=it.entry_id))
        elif isinstance(fb, (Sup, Cor, Inc)):
            descriptor = fb.descriptor
            if descriptor in DESCRIPTORS:
                text = item_text(descriptor, fb.values)
            else:
                text = " ".join(x for x in [
                    descriptor or "",
                    ", ".join(render(v) for v in fb.values)] if x)
            lines.append(ModelLine(
                m_field=it.m_field, descriptor=descriptor, text=text,
                feedback_kind=feedback_kind(fb), pos=Pos.of(it.pos),
                variants=sorted(it.variants & s.live), entry=it.entry_id))
    return lines


def render_refs(s: SpecSession) -> list[RefLine]:
    return [
        RefLine(kind=kind, id=slot.id, entered=slot.entered,
                pos=Pos.of(slot.pos))
        for kind, slot in s.refs.items()
    ]


def render_preconds(s: SpecSession) -> list[PrecondLine]:
    checked = s.preconds()
    return [
        PrecondLine(holds=r.holds, text=render(r.pred), pos=Pos.of(r.pos),
                    note=r.note)
        for r in checked.items
    ]


def snapshot(s: SpecSession, session_id: str,
             status: str = "ok", message: Optional[str] = None
             ) -> ProtocolResponse:
    checked = s.preconds()
    return ProtocolResponse(
        session_id=session_id,
        status=status,
        message=message,
        view=s.view,
        model_render=render_model(s),
        refs_render=render_refs(s),
        preconds_render=[
            PrecondLine(holds=r.holds, text=render(r.pred), pos=Pos.of(r.pos),
                        note=r.note) for r in checked.items],
        all_preconds_true=checked.all_true,
        is_complete=s.problem_complete(),
        method_complete=s.method_complete(),
        finished=s.finished,
        live_variants=sorted(s.live),
        handoff=s.handoff,
    )


# ---------------------------------------------------------------------------
# engine


class Engine:
    """Owns the store and the running sessions; one lock per session keeps
    each command stream serialized while sessions run concurrently."""

    def __init__(self, store: Store, defaults: Optional[Settings] = None):
        self.store = store
        self.defaults = defaults or Settings()
        self.sessions: dict[str, SpecSession] = {}
        self.locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def handle(self, req: ProtocolRequest) -> ProtocolResponse:
        try:
            return self._dispatch(req)
        except (InvalidTacticError, NotFoundError, NoCasMatchError,
                SessionFinishedError, ValueError) as e:
            blockers = getattr(e, "blockers", None) or None
            sid = req.session_id
            if sid and sid in self.sessions:
                resp = snapshot(self.sessions[sid], sid, "error", str(e))
                resp.blockers = blockers
                return resp
            return ProtocolResponse(session_id=sid, status="error",
                                    message=str(e), blockers=blockers)

    def _dispatch(self, req: ProtocolRequest) -> ProtocolResponse:
        cmd = req.command
        if cmd == "start":
            return self._start(req.payload)
        if cmd == "list_examples":
            return ProtocolResponse(listing=[
                Listing(id=eid, text=self.store.examples[eid].text)
                for eid in self.store.iter_examples()])
        if cmd == "list_problems":
            return ProtocolResponse(listing=[
                Listing(id=pid) for pid in self.store.iter_problems()])
        sid = req.session_id or ""
        if sid not in self.sessions:
            raise ValueError(f"no such session: {sid!r}")
        with self.locks[sid]:
            return self._session_command(sid, cmd, req.payload)

    def _start(self, payload: dict) -> ProtocolResponse:
        settings = Settings.from_dict({**self.defaults.to_dict(),
                                       **payload.get("settings", {})})
        if payload.get("cas"):
            s = sess.cas_command(self.store, payload["cas"], settings)
        else:
            s = sess.start_example(self.store, payload.get("example_id", ""),
                                   settings)
        sid = uuid.uuid4().hex[:12]
        with self._registry_lock:
            self.sessions[sid] = s
            self.locks[sid] = threading.Lock()
        return snapshot(s, sid)

    def _session_command(self, sid: str, cmd: str,
                         payload: dict) -> ProtocolResponse:
        s = self.sessions[sid]
        if cmd == "status":
            return snapshot(s, sid)
        if cmd == "input":
            return self._input(s, sid, payload)
        if cmd == "next_step":
            t = s.propose_next()
            resp = snapshot(s, sid)
            resp.proposals = [Proposal(
                tactic=t.kind, field=ADD_FIELDS.get(t.kind), text=t.text)]
            return resp
        if cmd == "toggle":
            s.apply(Tactic(TOGGLE_VIEW))
            return snapshot(s, sid)
        if cmd == "complete":
            s.apply(Tactic(COMPLETE_SPEC))
            return snapshot(s, sid)
        if cmd == "finish":
            s.apply(Tactic(FINISH_SPECIFY))
            return snapshot(s, sid)
        if cmd == "refine":
            s.apply(Tactic(REFINE_PROBLEM, payload.get("start")))
            resp = snapshot(s, sid)
            result = s.last_refine
            if result is not None:
                resp.matched = result.matched
                resp.trail = [
                    TrailEntry(
                        path=path,
                        holds=checked.all_true,
                        preconds=[PrecondLine(
                            holds=r.holds, text=render(r.pred),
                            pos=Pos.of(r.pos), note=r.note)
                            for r in checked.items])
                    for path, checked in result.trail
                ]
            return resp
        if cmd == "delete":
            if "entry" in payload:
                spec = f"entry:{payload['entry']}"
            else:
                spec = f"{payload.get('field', '')} {payload.get('descriptor', '')}"
            s.apply(Tactic(DELETE_ITEM, spec))
            return snapshot(s, sid)
        raise ValueError(f"unknown command {cmd!r}")

    def _input(self, s: SpecSession, sid: str, payload: dict
               ) -> ProtocolResponse:
        m_field = payload.get("field", "")
        text = payload.get("text", "")
        pos = None
        if payload.get("pos"):
            pos = SrcPos(*payload["pos"])
        if m_field in FIELD_TACTICS:
            s.apply(Tactic(FIELD_TACTICS[m_field], text, pos))
        elif m_field in REF_FIELDS:
            s.apply(Tactic(REF_FIELDS[m_field], text, pos))
        else:
            raise ValueError(f"unknown input field {m_field!r}")
        return snapshot(s, sid)
