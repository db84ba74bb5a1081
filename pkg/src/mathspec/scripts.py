"""Session-script parsing: the outer syntax consumed by ``--replay``.

A script names an Example, then gives the Specification as Model item
lines (Given/Find/Relate) and References (Theory_Ref, Problem_Ref,
Method_Ref).  A Solution block is accepted syntactically and skipped with
a warning; executing it belongs to the solve phase.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .session import (
    SPECIFY_METHOD,
    SPECIFY_PROBLEM,
    SPECIFY_THEORY,
    FIELD_TACTICS,
    Tactic,
)
from .terms import SrcPos


class ScriptError(Exception):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line
        self.msg = msg


@dataclass
class Script:
    example_id: str
    steps: list[Tactic] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


_STRUCTURAL = {"Specification:", "Model:", "References:"}
_REF_KEYWORDS = {
    "Theory_Ref": SPECIFY_THEORY,
    "Problem_Ref": SPECIFY_PROBLEM,
    "Method_Ref": SPECIFY_METHOD,
}


def _quoted(line: str, lineno: int) -> list[tuple[str, SrcPos]]:
    out = []
    i = 0
    while i < len(line):
        if line[i] == '"':
            j = line.find('"', i + 1)
            if j < 0:
                raise ScriptError(lineno, "unterminated string")
            text = line[i + 1:j]
            out.append((text, SrcPos(lineno, i + 2, len(text))))
            i = j + 1
        else:
            i += 1
    return out


def parse_script(text: str) -> Script:
    example_id = None
    steps: list[Tactic] = []
    warnings: list[str] = []
    in_solution = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        head = stripped.split(None, 1)[0]
        if head == "Example":
            quoted = _quoted(line, lineno)
            if not quoted:
                raise ScriptError(lineno, "Example needs a quoted id")
            example_id = quoted[0][0]
            in_solution = False
            continue
        if stripped.startswith("Solution"):
            warnings.append(
                f"line {lineno}: Solution block ignored (solve phase)")
            in_solution = True
            continue
        if in_solution:
            continue
        if stripped in _STRUCTURAL:
            continue
        key = head.rstrip(":")
        if key in FIELD_TACTICS:
            for item, pos in _quoted(line, lineno):
                steps.append(Tactic(FIELD_TACTICS[key], item, pos))
            continue
        if key in _REF_KEYWORDS:
            quoted = _quoted(line, lineno)
            if not quoted:
                raise ScriptError(lineno, f"{key} needs a quoted id")
            ident, pos = quoted[0]
            steps.append(Tactic(_REF_KEYWORDS[key], ident, pos))
            continue
        raise ScriptError(lineno, f"unrecognised line {stripped!r}")
    if example_id is None:
        raise ScriptError(1, "script has no Example declaration")
    return Script(example_id, steps, warnings)
