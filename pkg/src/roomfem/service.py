"""HTTP service exposing the scan-to-solution pipeline per session.

Each session walks the stage machine EMPTY -> SCANNED -> SPACED ->
MESHED -> SOLVED.  Requests that skip ahead get 409 StageConflict;
domain failures surface as 422 with the error class name in the body.
Artifacts are stored as the canonical bytes the library writers
produce, so a GET returns exactly what direct library calls would.
Solves run on a background thread; progress is polled via the status
endpoint, and a second solve while one is running gets 409 Busy.
"""

import json
import logging
import os
import shutil
import threading
import uuid
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from . import fem, geometry, io
from .errors import NoDirichletData, ParseError, RoomFemError, StageConflict
from .meshgen import extrude_to_tets

logger = logging.getLogger(__name__)

DEFAULT_PORT = 8080


class Stage(IntEnum):
    EMPTY = 0
    SCANNED = 1
    SPACED = 2
    MESHED = 3
    SOLVED = 4


@dataclass
class _Session:
    id: str
    stage: Stage = Stage.EMPTY
    scan: geometry.SurfaceMesh | None = None
    scan_bytes: bytes | None = None
    scan_format: str = "ply"
    space: geometry.Space | None = None
    space_bytes: bytes | None = None
    mesh: object | None = None
    mesh_bytes: bytes | None = None
    problem: fem.PoissonProblem | None = None
    problem_bytes: bytes | None = None
    solution_bytes: bytes | None = None
    solving: bool = False
    solve_error: str | None = None
    lock: threading.RLock = field(default_factory=threading.RLock)


def _error_response(exc: Exception, status: int = 422) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": type(exc).__name__, "detail": str(exc)})


def _json_artifact(data: bytes | None, name: str):
    if data is None:
        return JSONResponse(status_code=404,
                            content={"error": "NotFound",
                                     "detail": f"session has no {name} yet"})
    return Response(content=data, media_type="application/json")


class _Store:
    """Sessions with optional directory persistence."""

    def __init__(self, persist_dir: str | None):
        self.sessions: dict[str, _Session] = {}
        self.lock = threading.Lock()
        self.persist_dir = Path(persist_dir) if persist_dir else None
        if self.persist_dir:
            self.persist_dir.mkdir(parents=True, exist_ok=True)
            self._load()

    def create(self) -> _Session:
        session = _Session(id=uuid.uuid4().hex)
        with self.lock:
            self.sessions[session.id] = session
        self.save(session)
        return session

    def get(self, session_id: str) -> _Session | None:
        with self.lock:
            return self.sessions.get(session_id)

    def save(self, session: _Session):
        if not self.persist_dir:
            return
        root = self.persist_dir / session.id
        root.mkdir(parents=True, exist_ok=True)
        meta = {"stage": session.stage.name,
                "scan_format": session.scan_format,
                "solve_error": session.solve_error}
        (root / "meta.json").write_text(json.dumps(meta))
        artifacts = {
            f"scan.{session.scan_format}": session.scan_bytes,
            "space.json": session.space_bytes,
            "mesh.json": session.mesh_bytes,
            "problem.json": session.problem_bytes,
            "solution.json": session.solution_bytes,
        }
        for name, data in artifacts.items():
            path = root / name
            if data is None:
                path.unlink(missing_ok=True)
            else:
                path.write_bytes(data)

    def _load(self):
        for root in sorted(self.persist_dir.iterdir()):
            meta_path = root / "meta.json"
            if not root.is_dir() or not meta_path.exists():
                continue
            try:
                meta = json.loads(meta_path.read_text())
                session = _Session(id=root.name,
                                   stage=Stage[meta["stage"]],
                                   scan_format=meta.get("scan_format", "ply"),
                                   solve_error=meta.get("solve_error"))
                scan_path = root / f"scan.{session.scan_format}"
                if scan_path.exists():
                    session.scan_bytes = scan_path.read_bytes()
                    session.scan = io.read_surface_scan(session.scan_bytes,
                                                        session.scan_format)
                if (root / "space.json").exists():
                    session.space_bytes = (root / "space.json").read_bytes()
                    session.space = io.read_space(session.space_bytes)
                if (root / "mesh.json").exists():
                    session.mesh_bytes = (root / "mesh.json").read_bytes()
                    session.mesh = io.read_mesh(session.mesh_bytes)
                if (root / "problem.json").exists():
                    session.problem_bytes = (root / "problem.json").read_bytes()
                    session.problem = io.read_problem(session.problem_bytes)
                if (root / "solution.json").exists():
                    session.solution_bytes = (root / "solution.json").read_bytes()
            except (RoomFemError, KeyError, ValueError, OSError) as exc:
                logger.warning("skipping unreadable session %s: %s", root.name, exc)
                continue
            with self.lock:
                self.sessions[session.id] = session
        logger.info("restored %d persisted sessions", len(self.sessions))

    def wipe(self, session: _Session):
        if self.persist_dir:
            shutil.rmtree(self.persist_dir / session.id, ignore_errors=True)


def create_app(persist_dir: str | None = None) -> FastAPI:
    """Build the service; pass a directory to persist sessions across restarts."""
    app = FastAPI(title="roomfem", docs_url=None, redoc_url=None)
    store = _Store(persist_dir)
    app.state.store = store

    def _session_or_404(session_id: str):
        session = store.get(session_id)
        if session is None:
            raise LookupError(session_id)
        return session

    @app.exception_handler(LookupError)
    async def _unknown_session(_request, exc: LookupError):
        return JSONResponse(status_code=404,
                            content={"error": "UnknownSession",
                                     "detail": f"no session {exc.args[0]!r}"})

    @app.post("/api/sessions", status_code=201)
    def create_session():
        session = store.create()
        return {"id": session.id}

    @app.post("/api/sessions/{session_id}/scan")
    async def upload_scan(session_id: str, request: Request, format: str = "ply"):
        session = _session_or_404(session_id)
        body = await request.body()
        try:
            scan = io.read_surface_scan(body, format)
        except RoomFemError as exc:
            return _error_response(exc)
        with session.lock:
            if session.solving:
                return _error_response(StageConflict("a solve is running"), 409)
            session.scan = scan
            session.scan_bytes = body
            session.scan_format = format.lower().lstrip(".")
            session.space = session.space_bytes = None
            session.mesh = session.mesh_bytes = None
            session.problem = session.problem_bytes = None
            session.solution_bytes = None
            session.solve_error = None
            session.stage = Stage.SCANNED
            store.save(session)
        return {"stage": session.stage.name,
                "vertices": len(scan.vertices),
                "triangles": len(scan.triangles)}

    @app.post("/api/sessions/{session_id}/space")
    async def make_space(session_id: str, request: Request):
        session = _session_or_404(session_id)
        try:
            payload = json.loads((await request.body()) or b"{}")
        except json.JSONDecodeError as exc:
            return _error_response(ParseError(f"invalid JSON: {exc.msg}", exc.lineno))
        if not isinstance(payload, dict):
            return _error_response(ParseError("body must be a JSON object"))

        explicit = "footprint" in payload
        with session.lock:
            if session.solving:
                return _error_response(StageConflict("a solve is running"), 409)
            if explicit:
                # a fully specified Space may be supplied without any scan
                try:
                    space = geometry.Space(
                        footprint=np.asarray(payload["footprint"], dtype=float),
                        z_floor=float(payload["z_floor"]),
                        z_ceiling=float(payload["z_ceiling"]))
                except (KeyError, TypeError, ValueError) as exc:
                    return _error_response(ParseError(f"bad space document: {exc}"))
            else:
                if session.stage < Stage.SCANNED:
                    return _error_response(
                        StageConflict("upload a scan before building a space"), 409)
                known = {"dist_tol", "angle_tol", "min_area", "max_planes",
                         "seed", "up"}
                unknown = set(payload) - known
                if unknown:
                    return _error_response(
                        ParseError(f"unknown extraction parameter {sorted(unknown)[0]!r}"))
                up = payload.get("up", (0.0, 0.0, 1.0))
                kwargs = {k: payload[k] for k in
                          ("dist_tol", "angle_tol", "min_area", "max_planes", "seed")
                          if k in payload}
                try:
                    planes = geometry.extract_planes(session.scan, **kwargs)
                    classified = geometry.classify_planes(
                        planes, up=up, angle_tol=kwargs.get("angle_tol", 10.0))
                    space = geometry.build_space(classified)
                except RoomFemError as exc:
                    return _error_response(exc)
            session.space = space
            session.space_bytes = io.write_space(space)
            session.mesh = session.mesh_bytes = None
            session.problem = session.problem_bytes = None
            session.solution_bytes = None
            session.solve_error = None
            session.stage = Stage.SPACED
            store.save(session)
        return {"stage": session.stage.name,
                "footprint_vertices": len(session.space.footprint)}

    @app.post("/api/sessions/{session_id}/mesh")
    async def make_mesh(session_id: str, request: Request):
        session = _session_or_404(session_id)
        try:
            payload = json.loads((await request.body()) or b"{}")
            target_h = float(payload["target_h"])
        except (json.JSONDecodeError, TypeError, KeyError, ValueError):
            return _error_response(ParseError("body must be JSON with a numeric 'target_h'"))
        with session.lock:
            if session.solving:
                return _error_response(StageConflict("a solve is running"), 409)
            if session.stage < Stage.SPACED:
                return _error_response(
                    StageConflict("build a space before meshing"), 409)
            try:
                mesh = extrude_to_tets(session.space, target_h)
            except (RoomFemError, ValueError) as exc:
                if isinstance(exc, RoomFemError):
                    return _error_response(exc)
                return _error_response(ParseError(str(exc)))
            session.mesh = mesh
            session.mesh_bytes = io.write_mesh(mesh)
            session.problem = session.problem_bytes = None
            session.solution_bytes = None
            session.solve_error = None
            session.stage = Stage.MESHED
            store.save(session)
        return {"stage": session.stage.name,
                "vertices": session.mesh.num_vertices,
                "tets": session.mesh.num_tets}

    @app.put("/api/sessions/{session_id}/problem")
    async def put_problem(session_id: str, request: Request):
        session = _session_or_404(session_id)
        body = await request.body()
        try:
            payload = json.loads(body or b"{}")
        except json.JSONDecodeError as exc:
            return _error_response(ParseError(f"invalid JSON: {exc.msg}", exc.lineno))
        if isinstance(payload, dict):
            payload.setdefault("schema", io.SCHEMA)
        with session.lock:
            if session.solving:
                return _error_response(StageConflict("a solve is running"), 409)
            if session.stage < Stage.MESHED:
                return _error_response(
                    StageConflict("generate a mesh before posing a problem"), 409)
            try:
                problem = io.read_problem(json.dumps(payload))
                fem.dirichlet_nodes(session.mesh, problem.dirichlet)
                fem.assemble_point_sources(session.mesh, problem.sources)
            except RoomFemError as exc:
                return _error_response(exc)
            session.problem = problem
            session.problem_bytes = io.write_problem(problem)
            session.solution_bytes = None
            session.solve_error = None
            session.stage = Stage.MESHED
            store.save(session)
        return {"stage": session.stage.name,
                "sources": len(problem.sources),
                "dirichlet_tags": sorted(problem.dirichlet)}

    def _run_solve(session: _Session, tol: float, max_iter: int | None):
        try:
            field_ = fem.solve_poisson(session.mesh, session.problem,
                                       tol=tol, max_iter=max_iter)
            data = io.write_solution(session.mesh, field_)
            with session.lock:
                session.solution_bytes = data
                session.stage = Stage.SOLVED
                session.solving = False
                store.save(session)
        except RoomFemError as exc:
            logger.warning("solve failed for session %s: %s", session.id, exc)
            with session.lock:
                session.solve_error = f"{type(exc).__name__}: {exc}"
                session.solving = False
                store.save(session)

    @app.post("/api/sessions/{session_id}/solve", status_code=202)
    async def start_solve(session_id: str, request: Request):
        session = _session_or_404(session_id)
        try:
            payload = json.loads((await request.body()) or b"{}")
        except json.JSONDecodeError as exc:
            return _error_response(ParseError(f"invalid JSON: {exc.msg}", exc.lineno))
        tol = float(payload.get("tol", 1e-8))
        max_iter = payload.get("max_iter")
        max_iter = int(max_iter) if max_iter is not None else None
        with session.lock:
            if session.stage < Stage.MESHED:
                return _error_response(
                    StageConflict("generate a mesh before solving"), 409)
            if session.solving:
                busy = StageConflict("a solve is already running")
                return JSONResponse(status_code=409,
                                    content={"error": "Busy", "detail": str(busy)})
            if session.problem is None or not session.problem.dirichlet:
                return _error_response(NoDirichletData(
                    "upload a problem with at least one Dirichlet value first"))
            session.solving = True
            session.solve_error = None
            session.solution_bytes = None
        thread = threading.Thread(target=_run_solve,
                                  args=(session, tol, max_iter), daemon=True)
        thread.start()
        return {"stage": session.stage.name, "solving": True}

    @app.get("/api/sessions/{session_id}/status")
    def get_status(session_id: str):
        session = _session_or_404(session_id)
        with session.lock:
            return {"id": session.id,
                    "stage": session.stage.name,
                    "solving": session.solving,
                    "error": session.solve_error}

    @app.get("/api/sessions/{session_id}/space")
    def get_space(session_id: str):
        return _json_artifact(_session_or_404(session_id).space_bytes, "space")

    @app.get("/api/sessions/{session_id}/mesh")
    def get_mesh(session_id: str):
        return _json_artifact(_session_or_404(session_id).mesh_bytes, "mesh")

    @app.get("/api/sessions/{session_id}/problem")
    def get_problem(session_id: str):
        return _json_artifact(_session_or_404(session_id).problem_bytes, "problem")

    @app.get("/api/sessions/{session_id}/solution")
    def get_solution(session_id: str):
        return _json_artifact(_session_or_404(session_id).solution_bytes, "solution")

    return app


def run(port: int | None = None, persist_dir: str | None = None):
    """Start the service with uvicorn (blocking)."""
    import uvicorn

    if port is None:
        port = int(os.environ.get("ROOMFEM_PORT", DEFAULT_PORT))
    uvicorn.run(create_app(persist_dir), host="0.0.0.0", port=port)
