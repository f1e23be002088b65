"""HTTP facade over live sessions.

POST /sessions                      {manifest, config} -> {id}
GET  /sessions/{id}/task            -> current task (idempotent)
POST /sessions/{id}/elicitation     {task_id, feature_name, chosen|null}
POST /sessions/{id}/labels          {task_id, voter, bits}
GET  /sessions/{id}/export          -> matrix + metrics + transcript
GET  /sessions/{id}/metrics         -> live progress view

Errors: 400 validation, 404 unknown session, 409 stale task. If the
ODDONEOUT_TOKEN environment variable is set, every request must carry it as
a bearer token. Media is referenced by URL only and never fetched here.
"""

from __future__ import annotations

import os

from fastapi import Depends, FastAPI, Header, HTTPException
from pydantic import BaseModel

from .session import (
    ConflictError,
    ItemManifest,
    NotFoundError,
    SessionConfig,
    SessionStore,
    ValidationError,
)


class CreateSessionBody(BaseModel):
    manifest: dict
    config: dict = {}


class ElicitationBody(BaseModel):
    task_id: str
    feature_name: str | None = None
    chosen: list[str] | None = None


class LabelsBody(BaseModel):
    task_id: str
    voter: str
    bits: str


def _auth(authorization: str | None = Header(default=None)) -> None:
    token = os.environ.get("ODDONEOUT_TOKEN")
    if not token:
        return
    if authorization != f"Bearer {token}":
        raise HTTPException(status_code=401, detail="missing or bad bearer token")


def create_app(store: SessionStore) -> FastAPI:
    app = FastAPI(title="oddoneout sessions", dependencies=[Depends(_auth)])

    def get_session(session_id: str):
        try:
            return store.get(session_id)
        except NotFoundError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        try:
            manifest = ItemManifest.from_dict(body.manifest)
            config = SessionConfig.from_dict(body.config)
            session = store.create(manifest, config)
        except ValidationError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return {"id": session.id}

    @app.get("/sessions/{session_id}/task")
    def next_task(session_id: str) -> dict:
        session = get_session(session_id)
        with store.lock(session_id):
            task = session.next_task()
            store.persist(session)
        return task

    @app.post("/sessions/{session_id}/elicitation")
    def submit_elicitation(session_id: str, body: ElicitationBody) -> dict:
        session = get_session(session_id)
        with store.lock(session_id):
            try:
                ack = session.submit_elicitation(
                    body.task_id, body.feature_name, body.chosen
                )
            except ConflictError as e:
                raise HTTPException(status_code=409, detail=str(e))
            except ValidationError as e:
                raise HTTPException(status_code=400, detail=str(e))
            store.persist(session)
        return ack

    @app.post("/sessions/{session_id}/labels")
    def submit_labels(session_id: str, body: LabelsBody) -> dict:
        session = get_session(session_id)
        with store.lock(session_id):
            try:
                ack = session.submit_labels(body.task_id, body.voter, body.bits)
            except ConflictError as e:
                raise HTTPException(status_code=409, detail=str(e))
            except ValidationError as e:
                raise HTTPException(status_code=400, detail=str(e))
            store.persist(session)
        return ack

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str) -> dict:
        session = get_session(session_id)
        with store.lock(session_id):
            return session.export()

    @app.get("/sessions/{session_id}/metrics")
    def metrics_view(session_id: str) -> dict:
        session = get_session(session_id)
        with store.lock(session_id):
            return session.metrics_view()

    return app
