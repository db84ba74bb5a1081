"""FastAPI wrapper around the protocol engine."""
from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

from .knowledge import Store
from .protocol import Engine, ProtocolRequest, ProtocolResponse
from .session import Settings


def create_app(store: Store, defaults: Optional[Settings] = None,
               frontend_dir: Optional[Path] = None) -> FastAPI:
    engine = Engine(store, defaults)
    app = FastAPI(title="mathspec service", version="0.1.0")
    app.state.engine = engine
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/api/command", response_model=ProtocolResponse,
              response_model_exclude_none=True)
    def command(req: ProtocolRequest) -> ProtocolResponse:
        return engine.handle(req)

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok", "sessions": len(engine.sessions)}

    if frontend_dir and frontend_dir.is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True),
                  name="ui")
    return app


def serve(addr: str, store: Store, defaults: Optional[Settings] = None,
          frontend_dir: Optional[Path] = None) -> None:
    """Run the service on ``host:port``; blocks forever."""
    import uvicorn

    host, _, port = addr.rpartition(":")
    app = create_app(store, defaults, frontend_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
