"""HTTP service exposing fitting jobs, ruling validation, and chain extension.

Jobs run asynchronously on a bounded thread pool and live in memory for the
process lifetime; read endpoints never block on running jobs.
"""
from __future__ import annotations

import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import formats
from .errors import ValidationError
from .jobs import JobSpec, RulingModel, run_job
from .surface import (
    Anchor,
    DEFAULT_SNAP_TOL,
    PlaneChain,
    Ruling,
    RulingSequence,
    extend_chain,
    snap_to_plane,
    strip_planarity_defect,
)

JOB_QUEUED = "queued"
JOB_RUNNING = "running"
JOB_DONE = "done"
JOB_FAILED = "failed"


class RulingsPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")
    rulings: List[RulingModel] = Field(min_length=2)

    def sequence(self) -> RulingSequence:
        return formats.rulings_from_obj([{"q": r.q, "p": r.p} for r in self.rulings])


class AnchorModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    a: List[float] = Field(min_length=3, max_length=3)
    b: List[float] = Field(min_length=3, max_length=3)


class ExtendChainPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")
    rulings: List[RulingModel] = Field(min_length=1)
    anchor: AnchorModel
    q: List[float] = Field(min_length=3, max_length=3)
    p: List[float] = Field(min_length=3, max_length=3)
    snap_tol: float = Field(default=DEFAULT_SNAP_TOL, gt=0)


class _Job:
    __slots__ = ("spec", "status", "error", "metrics", "exports")

    def __init__(self, spec: JobSpec):
        self.spec = spec
        self.status = JOB_QUEUED
        self.error = None
        self.metrics = None
        self.exports = None


class JobManager:
    """Thread-pool executor plus an in-memory job registry."""

    def __init__(self, workers: Optional[int] = None):
        self._pool = ThreadPoolExecutor(max_workers=workers or os.cpu_count() or 2)
        self._jobs = {}
        self._lock = threading.Lock()

    def submit(self, spec: JobSpec) -> str:
        job_id = uuid.uuid4().hex
        job = _Job(spec)
        with self._lock:
            self._jobs[job_id] = job
        self._pool.submit(self._run, job_id)
        return job_id

    def _run(self, job_id: str) -> None:
        with self._lock:
            job = self._jobs[job_id]
            job.status = JOB_RUNNING
        try:
            output = run_job(job.spec)
            metrics = formats.metrics_to_obj(output.result, job.spec.mode)
            with self._lock:
                job.metrics = metrics
                job.exports = output.exports
                job.status = JOB_DONE
        except Exception as exc:
            with self._lock:
                job.error = str(exc)
                job.status = JOB_FAILED

    def get(self, job_id: str) -> Optional[_Job]:
        with self._lock:
            return self._jobs.get(job_id)

    def shutdown(self) -> None:
        self._pool.shutdown(wait=False, cancel_futures=True)


def create_app(workers: Optional[int] = None) -> FastAPI:
    app = FastAPI(title="ruledev", version="0.1.0")
    manager = JobManager(workers)
    app.state.jobs = manager

    @app.exception_handler(RequestValidationError)
    async def _validation_400(request: Request, exc: RequestValidationError):
        detail = [
            {"field": ".".join(str(p) for p in err.get("loc", ())), "message": err.get("msg", "")}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.exception_handler(ValidationError)
    async def _domain_400(request: Request, exc: ValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    async def health():
        return {"status": "ok", "version": app.version}

    @app.post("/jobs", status_code=202)
    def submit_job(spec: JobSpec):
        # Raises (-> 400) on inconsistent geometry before queueing.
        spec.ruling_sequence()
        return {"id": manager.submit(spec), "status": JOB_QUEUED}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        job = manager.get(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"detail": f"unknown job {job_id}"})
        body = {"id": job_id, "status": job.status}
        if job.status == JOB_FAILED:
            body["error"] = job.error
        if job.status == JOB_DONE:
            body["metrics"] = job.metrics
            body["exports"] = job.exports
        return body

    @app.post("/validate-rulings")
    def validate_rulings(payload: RulingsPayload):
        seq = payload.sequence()
        defects = strip_planarity_defect(seq)
        return {
            "count": len(seq),
            "defects": [float(d) for d in defects],
            "max_defect": float(defects.max()),
        }

    @app.post("/extend-chain")
    def extend(payload: ExtendChainPayload):
        anchor = Anchor(np.array(payload.anchor.a), np.array(payload.anchor.b))
        items = [Ruling(np.array(r.q), np.array(r.p)) for r in payload.rulings]
        base = None
        if len(items) > 1:
            base = formats.rulings_from_obj([{"q": r.q, "p": r.p} for r in payload.rulings])
        try:
            if base is None:
                appended = snap_to_plane(items[0], anchor, payload.q, payload.p,
                                         payload.snap_tol)
                extended = RulingSequence((items[0], appended))
            else:
                extended = extend_chain(PlaneChain((anchor,)), base,
                                        payload.q, payload.p, payload.snap_tol)
        except ValidationError as exc:
            return {"accepted": False, "reason": str(exc), "tolerance": payload.snap_tol}
        defects = strip_planarity_defect(extended)
        return {
            "accepted": True,
            "rulings": formats.rulings_to_obj(extended),
            "defects": [float(d) for d in defects],
        }

    return app
