"""HTTP+JSON API powering the browser editor.

Routes:
  GET    /api/catalog            palette data (constructors + robot objects)
  POST   /api/compile            body: .krt XML; 200 {code} or 422 {diagnostics}
  POST   /api/session            {world?, programs, max_ticks?} -> 201 {id}
  POST   /api/session/{id}/step  {ticks} -> new trace records + world snapshot
  GET    /api/session/{id}/state
  DELETE /api/session/{id}

Stepping is the only mutation; a second concurrent step on one session gets
409. Sessions live in memory and expire after idle_ttl seconds.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from kitrobot.catalog import Catalog, CatalogError, load_catalog
from kitrobot.codegen import GraphValidationError, compile_graph
from kitrobot.diagnostics import Diagnostic
from kitrobot.graph import KrtError, KrtInvariantError, KrtParseError, load_krt
from kitrobot.lll.lexer import ParseError
from kitrobot.scenario import ScenarioCheckError, ScenarioError, ScenarioRunner
from kitrobot.world import WorldSpecError, world_from_spec

DEFAULT_SESSION_TTL = 30 * 60.0
DEFAULT_MAX_TICKS = 1000


def _diag_obj(d: Diagnostic) -> dict:
    obj: dict = {"code": d.code, "message": d.message}
    if d.span is not None:
        obj["span"] = {
            "start": d.span.start,
            "end": d.span.end,
            "line": d.span.line,
            "column": d.span.column,
        }
    if d.vertex is not None:
        obj["vertex"] = d.vertex
    return obj


def _catalog_obj(catalog: Catalog) -> dict:
    return {
        "constructors": [
            {
                "kind": c.kind,
                "label": c.label,
                "body_slots": c.body_slots,
                "takes_count": c.takes_count,
                "takes_cond": c.takes_cond,
            }
            for c in catalog.constructors
        ],
        "objects": [
            {
                "name": o.name,
                "kind": o.kind,
                "vartype": o.vartype,
                "methods": [
                    {
                        "name": m.name,
                        "returns": m.returns,
                        "pure": m.pure,
                        "params": [
                            {"name": p.name, "kind": p.kind, "min": p.lo, "max": p.hi}
                            for p in m.params
                        ],
                    }
                    for m in o.methods
                ],
            }
            for o in catalog.objects
        ],
    }


@dataclass
class Session:
    id: str
    runner: ScenarioRunner
    max_ticks: int
    created_at: float
    last_access: float
    lock: threading.Lock = field(default_factory=threading.Lock)
    stepped: bool = False
    trace_cursor: int = 0

    @property
    def status(self) -> str:
        if self.runner.finished:
            return "done"
        return "running" if self.stepped else "ready"

    def state_obj(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "tick": self.runner.tick,
            "max_ticks": self.max_ticks,
            "world": self.runner.world.snapshot(),
        }


class SessionStore:
    def __init__(self, ttl: float, clock=time.monotonic):
        self.ttl = ttl
        self.clock = clock
        self._sessions: dict[str, Session] = {}
        self._guard = threading.Lock()

    def purge(self) -> None:
        now = self.clock()
        with self._guard:
            dead = [sid for sid, s in self._sessions.items() if now - s.last_access > self.ttl]
            for sid in dead:
                del self._sessions[sid]

    def add(self, session: Session) -> None:
        with self._guard:
            self._sessions[session.id] = session

    def get(self, sid: str) -> Session | None:
        self.purge()
        session = self._sessions.get(sid)
        if session is not None:
            session.last_access = self.clock()
        return session

    def remove(self, sid: str) -> bool:
        with self._guard:
            return self._sessions.pop(sid, None) is not None


def create_app(
    constructors_path: str,
    robot_path: str,
    world_path: str,
    allow_origin: str | None = None,
    session_ttl: float = DEFAULT_SESSION_TTL,
    clock=time.monotonic,
) -> FastAPI:
    app = FastAPI(title="kitrobot", docs_url=None, redoc_url=None)

    if allow_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[allow_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    catalog_error: str | None = None
    catalog_bytes = b""
    palette: Catalog | None = None
    try:
        palette = load_catalog(
            Path(constructors_path).read_text(encoding="utf-8"),
            Path(robot_path).read_text(encoding="utf-8"),
            constructors_path,
            robot_path,
        )
        catalog_bytes = json.dumps(_catalog_obj(palette), separators=(",", ":")).encode()
    except (CatalogError, OSError) as exc:
        catalog_error = str(exc)

    world_dir = Path(world_path).parent
    default_world_xml = Path(world_path).read_text(encoding="utf-8")
    sessions = SessionStore(session_ttl, clock)
    bound_catalogs: dict[str, Catalog] = {}

    def agent_catalogs(world, agents: list[str]) -> dict[str, Catalog]:
        out: dict[str, Catalog] = {}
        for agent in agents:
            bound = world.bindings.get(agent)
            if bound is None:
                raise ScenarioError(f"world has no catalog bind for agent: {agent}")
            path = str(world_dir / bound)
            if path not in bound_catalogs:
                bound_catalogs[path] = load_catalog(
                    None, Path(path).read_text(encoding="utf-8"), None, path
                )
            out[agent] = bound_catalogs[path]
        return out

    @app.get("/api/catalog")
    def get_catalog():
        if catalog_error is not None:
            return JSONResponse({"error": catalog_error}, status_code=500)
        return Response(content=catalog_bytes, media_type="application/json")

    @app.post("/api/compile")
    async def compile_endpoint(request: Request):
        if palette is None:
            return JSONResponse({"error": catalog_error}, status_code=500)
        body = await request.body()
        try:
            graph = load_krt(body)
        except KrtParseError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        except KrtInvariantError as exc:
            return JSONResponse(
                {"diagnostics": [_diag_obj(d) for d in exc.diagnostics]}, status_code=422
            )
        except KrtError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        try:
            code = compile_graph(graph, palette)
        except GraphValidationError as exc:
            return JSONResponse(
                {"diagnostics": [_diag_obj(d) for d in exc.diagnostics]}, status_code=422
            )
        return JSONResponse({"code": code})

    @app.post("/api/session")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return JSONResponse({"error": "request body must be JSON"}, status_code=400)
        if not isinstance(body, dict) or not isinstance(body.get("programs"), dict):
            return JSONResponse({"error": "body needs a programs object"}, status_code=400)
        programs = body["programs"]
        if not all(isinstance(v, str) for v in programs.values()):
            return JSONResponse({"error": "programs must map agent to source text"}, status_code=400)
        max_ticks = body.get("max_ticks", DEFAULT_MAX_TICKS)
        if not isinstance(max_ticks, int) or max_ticks <= 0:
            return JSONResponse({"error": "max_ticks must be a positive integer"}, status_code=422)
        world_xml = body.get("world") or default_world_xml
        try:
            world = world_from_spec(world_xml)
            catalogs = agent_catalogs(world, list(programs))
            runner = ScenarioRunner(world, programs, catalogs, max_ticks)
        except ScenarioCheckError as exc:
            return JSONResponse(
                {
                    "diagnostics": {
                        agent: [_diag_obj(d) for d in diags]
                        for agent, diags in exc.by_agent.items()
                    }
                },
                status_code=422,
            )
        except ParseError as exc:
            return JSONResponse(
                {"error": f"program parse error: {exc}"}, status_code=422
            )
        except (WorldSpecError, CatalogError, ScenarioError, OSError) as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        now = clock()
        session = Session(uuid.uuid4().hex, runner, max_ticks, now, now)
        sessions.add(session)
        return JSONResponse({"id": session.id}, status_code=201)

    @app.post("/api/session/{sid}/step")
    async def step_session(sid: str, request: Request):
        session = sessions.get(sid)
        if session is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return JSONResponse({"error": "request body must be JSON"}, status_code=400)
        ticks = body.get("ticks") if isinstance(body, dict) else None
        if not isinstance(ticks, int) or ticks <= 0:
            return JSONResponse({"error": "ticks must be a positive integer"}, status_code=422)
        if not session.lock.acquire(blocking=False):
            return JSONResponse({"error": "a step is already in progress"}, status_code=409)
        try:
            if session.runner.finished:
                return JSONResponse({"error": "session is done"}, status_code=409)
            session.stepped = True
            for _ in range(ticks):
                if not session.runner.step():
                    break
            records = session.runner.trace[session.trace_cursor :]
            session.trace_cursor = len(session.runner.trace)
            return JSONResponse(
                {
                    "records": [r.to_obj() for r in records],
                    "status": session.status,
                    "tick": session.runner.tick,
                    "world": session.runner.world.snapshot(),
                }
            )
        finally:
            session.lock.release()

    @app.get("/api/session/{sid}/state")
    def session_state(sid: str):
        session = sessions.get(sid)
        if session is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        return JSONResponse(session.state_obj())

    @app.delete("/api/session/{sid}")
    def delete_session(sid: str):
        if not sessions.remove(sid):
            return JSONResponse({"error": "unknown session"}, status_code=404)
        return Response(status_code=204)

    return app
