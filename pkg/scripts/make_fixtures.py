"""Capture real protocol responses as fixtures for the frontend tests."""
import json
from pathlib import Path

from mathspec.knowledge import load_builtin
from mathspec.protocol import Engine, ProtocolRequest

OUT = Path(__file__).resolve().parents[1] / "frontend" / "test" / "fixtures"
DEMO = "Diff_App/coil-kernel"


def send(engine, command, payload=None, session_id=None):
    resp = engine.handle(ProtocolRequest(
        session_id=session_id, command=command, payload=payload or {}))
    return json.loads(resp.model_dump_json(exclude_none=True))


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    engine = Engine(load_builtin())

    fresh = send(engine, "start", {"example_id": DEMO})
    sid = fresh["session_id"]
    write("fig1_fresh.json", fresh)

    write("next_step_fresh.json", send(engine, "next_step", session_id=sid))
    write("fig2_complete.json", send(engine, "complete", session_id=sid))
    write("fig4_method.json", send(engine, "toggle", session_id=sid))

    # a session with one syntax error, for marker rendering
    engine2 = Engine(load_builtin())
    s2 = send(engine2, "start", {"example_id": DEMO})["session_id"]
    send(engine2, "input", {"field": "Given", "text": "Constants [r = 7]"},
         session_id=s2)
    broken = send(engine2, "input", {"field": "Given", "text": "Constants [r = "},
                  session_id=s2)
    write("syntax_error.json", broken)

    # refinement trail panel
    engine3 = Engine(load_builtin())
    s3 = send(engine3, "start", {"example_id": "Equations/poly-demo"})["session_id"]
    send(engine3, "input", {"field": "Given", "text": "Equality (x^2 - 1 = 0)"},
         session_id=s3)
    send(engine3, "input", {"field": "Given", "text": "SolveFor x"},
         session_id=s3)
    trail = send(engine3, "refine", {"start": "univariate/equation"},
                 session_id=s3)
    write("refine_trail.json", trail)

    print(f"fixtures written to {OUT}")


def write(name: str, data: dict) -> None:
    (OUT / name).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
