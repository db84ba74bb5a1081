"""Command line: replay scripts, an interactive REPL and the service.

The CLI is a thin protocol client: every action becomes a ProtocolRequest
that is answered either by an in-process engine or, with ``--connect``, by
a remote service; all rendering happens from the responses.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .knowledge import AuthoringError, builtin_pack_dir, load_knowledge
from .protocol import Engine, ProtocolRequest, ProtocolResponse
from .scripts import ScriptError, parse_script
from .session import ADD_FIELDS, Settings
from .terms import ParseError


class LocalTransport:
    def __init__(self, engine: Engine):
        self.engine = engine

    def send(self, req: dict) -> dict:
        resp = self.engine.handle(ProtocolRequest(**req))
        return resp.model_dump(exclude_none=True)


class HttpTransport:
    def __init__(self, base_url: str):
        import httpx

        self.client = httpx.Client(base_url=base_url, timeout=30.0)

    def send(self, req: dict) -> dict:
        r = self.client.post("/api/command", json=req)
        r.raise_for_status()
        return r.json()


def read_settings_file(path: Path) -> Settings:
    """Plain key=value defaults: skip_specify, next_step_reveals."""
    values: dict = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return Settings(
        skip_specify=values.get("skip_specify", "false").lower() == "true",
        next_step_reveals=values.get("next_step_reveals", "full").lower(),
    )


# ---------------------------------------------------------------------------
# output helpers

_MARKS = {"correct": "ok", "incomplete": "inc", "superfluous": "sup",
          "syntax": "syn", "missing": "--"}


def _fmt_pos(pos: Optional[dict]) -> str:
    if not pos:
        return ""
    return f"{pos['line']}:{pos['col']}"


def print_response(resp: dict, json_mode: bool, out=sys.stdout) -> None:
    if json_mode:
        print(json.dumps(resp, sort_keys=True), file=out)
        return
    if resp.get("status") == "error":
        print(f"error: {resp.get('message')}", file=out)
    if resp.get("listing") is not None:
        for row in resp["listing"]:
            text = row.get("text", "")
            brief = (text[:60] + "…") if len(text) > 60 else text
            print(f"  {row['id']}" + (f"  {brief}" if brief else ""), file=out)
        return
    if not resp.get("model_render") and not resp.get("refs_render"):
        return
    view = resp.get("view", "?")
    print(f"-- Model ({view} view), variants {resp.get('live_variants')}", file=out)
    for line in resp.get("model_render", []):
        mark = _MARKS.get(line["feedback_kind"], "?")
        text = line.get("text") or line.get("template") or ""
        print(f"  [{mark:>3}] {line['m_field']:>6}: {text}", file=out)
    for pre in resp.get("preconds_render", []):
        mark = "ok" if pre["holds"] else "NO"
        note = f" ({pre['note']})" if pre.get("note") else ""
        print(f"  [{mark:>3}]  Where: {pre['text']}{note}", file=out)
    print("-- References", file=out)
    for ref in resp.get("refs_render", []):
        mark = "ok" if ref["entered"] else "--"
        print(f"  [{mark:>3}] {ref['kind']:>7}: {ref['id']}", file=out)
    flags = []
    if resp.get("is_complete"):
        flags.append("model complete")
    if resp.get("finished"):
        flags.append("finished")
    if flags:
        print("-- " + ", ".join(flags), file=out)
    if resp.get("proposals"):
        for p in resp["proposals"]:
            target = p.get("field") or p["tactic"]
            print(f"-- proposed next step: {target}: {p.get('text') or ''}",
                  file=out)
    if resp.get("trail") is not None:
        print(f"-- refinement trail (matched: {resp.get('matched')})", file=out)
        for t in resp["trail"]:
            mark = "ok" if t["holds"] else "NO"
            print(f"  [{mark:>3}] {t['path']}", file=out)


# ---------------------------------------------------------------------------
# replay


def cli_replay(script_path: Path, transport, json_mode: bool,
               settings: Settings, out=sys.stdout) -> int:
    try:
        script = parse_script(script_path.read_text(encoding="utf-8"))
    except ScriptError as e:
        print(f"{script_path}: {e}", file=out)
        return 1
    for warning in script.warnings:
        print(f"{script_path}: warning: {warning}", file=out)
    resp = transport.send({"command": "start", "payload": {
        "example_id": script.example_id, "settings": settings.to_dict()}})
    if resp.get("status") == "error":
        print_response(resp, json_mode, out)
        return 1
    sid = resp["session_id"]
    first_diagnostic: Optional[str] = None
    for step in script.steps:
        if step.kind in ADD_FIELDS:
            field = ADD_FIELDS[step.kind]
        else:
            field = step.kind.split("_", 1)[1]  # Specify_Theory -> Theory
        pos = [step.pos.line, step.pos.col, step.pos.len] if step.pos else None
        resp = transport.send({"session_id": sid, "command": "input",
                               "payload": {"field": field, "text": step.text,
                                           "pos": pos}})
        verdict = _step_verdict(resp, step, field)
        where = f"{script_path.name}:{_fmt_pos(pos and dict(line=pos[0], col=pos[1]))}"
        if json_mode:
            print(json.dumps({"at": where, "field": field, "text": step.text,
                              "verdict": verdict}, sort_keys=True), file=out)
        else:
            print(f"{where}: {field} {step.text!r} -> {verdict}", file=out)
        if verdict not in ("correct", "entered") and first_diagnostic is None:
            first_diagnostic = f"{where}: {field} {step.text!r} -> {verdict}"
    final = transport.send({"session_id": sid, "command": "status"})
    print_response(final, json_mode, out)
    if final.get("is_complete") and final.get("all_preconds_true"):
        return 0
    if first_diagnostic:
        print(f"blocking: {first_diagnostic}", file=out)
    else:
        print("blocking: model incomplete", file=out)
    return 1


def _step_verdict(resp: dict, step, field: str) -> str:
    if resp.get("status") == "error":
        return f"error: {resp.get('message')}"
    if field in ("Theory", "Problem", "Method"):
        return "entered"
    for line in resp.get("model_render", []):
        if line.get("entry") is None:
            continue
        if line.get("pos") and step.pos and \
                line["pos"]["line"] == step.pos.line and \
                line["pos"]["col"] == step.pos.col:
            return line["feedback_kind"]
    # the input may render in the other view (e.g. a method-only item)
    return "accepted"


# ---------------------------------------------------------------------------
# repl

_REPL_HELP = """commands:
  examples | problems            list knowledge content
  start <example-id>             open a session
  cas <text>                     start from a command like solve (x = 1, x)
  given|find|relate <text>       input a model item
  theory|problem|method <id>     confirm a reference
  next | toggle | complete | finish | refine | status
  delete <field> <descriptor>    remove an entered item
  quit"""


def cli_repl(transport, json_mode: bool, settings: Settings,
             stdin=sys.stdin, out=sys.stdout) -> int:
    sid: Optional[str] = None
    print("mathspec repl; 'help' lists commands", file=out)
    for raw in stdin:
        line = raw.strip()
        if not line:
            continue
        cmd, _, rest = line.partition(" ")
        cmd = cmd.lower()
        rest = rest.strip()
        if cmd in ("quit", "exit"):
            break
        if cmd == "help":
            print(_REPL_HELP, file=out)
            continue
        try:
            sid = _repl_step(transport, sid, cmd, rest, json_mode, settings, out)
        except Exception as e:  # a repl never dies on bad input
            print(f"error: {e}", file=out)
    return 0


def _repl_step(transport, sid, cmd, rest, json_mode, settings, out):
    def send(req):
        resp = transport.send(req)
        print_response(resp, json_mode, out)
        return resp

    if cmd == "examples":
        send({"command": "list_examples"})
    elif cmd == "problems":
        send({"command": "list_problems"})
    elif cmd == "start":
        resp = send({"command": "start", "payload": {
            "example_id": rest, "settings": settings.to_dict()}})
        sid = resp.get("session_id", sid)
    elif cmd == "cas":
        resp = send({"command": "start", "payload": {
            "cas": rest, "settings": settings.to_dict()}})
        sid = resp.get("session_id", sid)
    elif cmd in ("given", "find", "relate", "theory", "problem", "method"):
        send({"session_id": sid, "command": "input",
              "payload": {"field": cmd.capitalize(), "text": rest}})
    elif cmd == "next":
        send({"session_id": sid, "command": "next_step"})
    elif cmd in ("toggle", "complete", "finish", "status"):
        send({"session_id": sid, "command": cmd})
    elif cmd == "refine":
        payload = {"start": rest} if rest else {}
        send({"session_id": sid, "command": "refine", "payload": payload})
    elif cmd == "delete":
        field, _, descriptor = rest.partition(" ")
        send({"session_id": sid, "command": "delete",
              "payload": {"field": field, "descriptor": descriptor.strip()}})
    else:
        print(f"unknown command {cmd!r} ('help' lists commands)", file=out)
    return sid


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mathspec",
        description="Interactive construction of formal problem "
                    "specifications: service, REPL and script replay.")
    p.add_argument("--knowledge", action="append", default=[], metavar="DIR",
                   help="knowledge directory or .kb file (repeatable; "
                        "defaults to the builtin pack)")
    p.add_argument("--settings", type=Path, metavar="FILE",
                   help="key=value defaults (skip_specify, next_step_reveals)")
    p.add_argument("--json", action="store_true",
                   help="machine-readable transcripts")
    p.add_argument("--connect", metavar="URL",
                   help="drive a remote service instead of in-process")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--repl", action="store_true",
                      help="interactive session")
    mode.add_argument("--replay", type=Path, metavar="FILE",
                      help="replay a session script; exit 0 iff complete")
    mode.add_argument("--listen", metavar="ADDR:PORT",
                      help="run the JSON service")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = read_settings_file(args.settings) if args.settings else Settings()
    if args.connect:
        transport = HttpTransport(args.connect)
        store = None
    else:
        paths = args.knowledge or [builtin_pack_dir()]
        try:
            store = load_knowledge(paths)
        except (AuthoringError, ParseError) as e:
            print(f"knowledge error: {e}", file=sys.stderr)
            return 2
        transport = LocalTransport(Engine(store, settings))
    if args.listen:
        if args.connect:
            print("--listen and --connect are exclusive", file=sys.stderr)
            return 2
        from .app import serve

        frontend = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        serve(args.listen, store, settings, frontend)
        return 0
    if args.replay:
        return cli_replay(args.replay, transport, args.json, settings)
    if args.repl:
        return cli_repl(transport, args.json, settings)
    build_parser().print_help()
    return 0


if __name__ == "__main__":
    sys.exit(main())
