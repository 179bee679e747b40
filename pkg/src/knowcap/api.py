"""HTTP front door.

Every service operation maps onto exactly one route; the catalogue endpoint
is generated by introspecting the live route table, so documentation cannot
drift from what is actually served.  Identity is a bearer token issued at
registration.  The awareness stream is a long-lived server-sent-events
channel delivering one log-format record per frame.
"""

from __future__ import annotations

import json
from typing import Any, Iterator

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from fastapi.routing import APIRoute
from pydantic import BaseModel

from . import records as rec
from .annotations import Anchor, Annotation, AttributePair, ThreadNode, WholeDocument, anchor_from_payload, anchor_to_payload, attributes_to_payload
from .awareness import Availability
from .errors import AuthFailure, EmptyQuery, KnowcapError, RatingOutOfRange
from .exploitation import CaseQuery
from .fixtures import seed_fixture
from .model import Actor, DecisionProblem, Document, EIPhase, Role, TemporalStamp
from .repository import KRKind, RepositoryState
from .service import KnowledgeService

STREAM_KEEPALIVE_S = 15.0


# ----------------------------------------------------------------------
# Request bodies
# ----------------------------------------------------------------------

class RegisterBody(BaseModel):
    display_name: str
    role: str


class ProblemBody(BaseModel):
    title: str
    initial_demand_text: str
    internal_context: str = ""
    external_context: str = ""


class StakeBody(BaseModel):
    observed_object: str
    signal: str
    hypothesis: str


class AnnotationBody(BaseModel):
    dp_id: str
    anchor: dict
    body: str = ""
    attributes: list[list[str]] = []


class ReplyBody(BaseModel):
    body: str = ""
    attributes: list[list[str]] = []


class ReuseBody(BaseModel):
    anchor: dict
    body: str | None = None
    attributes: list[list[str]] | None = None


class ResolveBody(BaseModel):
    anchor: dict
    content: str | None = None


class DeclareBody(BaseModel):
    kind: str
    payload: dict
    dp_id: str | None = None


class VersionBody(BaseModel):
    payload: dict


class QueryBody(BaseModel):
    role: str | None = None
    phase: str | None = None
    terms: list[str] = []
    dp_scope: str | None = None
    as_of: int | None = None


class FeedbackBody(BaseModel):
    kr: list
    rating: int
    new_problem: str | None = None
    comment: str | None = None


class HeartbeatBody(BaseModel):
    availability: str


class SignalBody(BaseModel):
    payload: str


class SeedBody(BaseModel):
    name: str


# ----------------------------------------------------------------------
# Wire shapes
# ----------------------------------------------------------------------

def stamp_wire(stamp: TemporalStamp) -> dict:
    return {"seq": stamp.seq, "wall_clock": stamp.wall_clock, "tag": stamp.tag}


def actor_wire(actor: Actor) -> dict:
    return {"actor_id": actor.actor_id, "display_name": actor.display_name, "role": actor.role.value}


def problem_wire(dp: DecisionProblem) -> dict:
    return {
        "dp_id": dp.dp_id,
        "title": dp.title,
        "initial_demand": dp.initial_demand,
        "internal_context": dp.internal_context,
        "external_context": dp.external_context,
        "current_phase": dp.current_phase.value,
        "created_by": dp.created_by,
        "stake_lineage": dp.stake_lineage,
        "declaration_lineage": dp.declaration_lineage,
    }


def document_wire(document: Document) -> dict:
    return {"doc_uri": document.doc_uri, "content": document.content, "content_hash": document.content_hash}


def annotation_wire(annotation: Annotation) -> dict:
    return {
        "annotation_id": annotation.annotation_id,
        "author": annotation.author,
        "t_a": stamp_wire(annotation.t_a),
        "anchor": anchor_to_payload(annotation.anchor),
        "body": annotation.body,
        "attributes": attributes_to_payload(annotation.attributes),
        "parent": annotation.parent,
        "derived_from": annotation.derived_from,
        "dp_id": annotation.dp_id,
    }


def thread_wire(node: ThreadNode) -> dict:
    return {"annotation": annotation_wire(node.annotation), "children": [thread_wire(c) for c in node.children]}


def snapshot_wire(state: RepositoryState, seq_bound: int) -> dict:
    return {
        "seq_bound": seq_bound,
        "last_seq": state.last_seq,
        "lineages": {
            kr_id: [row.to_dict() for row in lineage.versions]
            for kr_id, lineage in sorted(state.lineages.items())
        },
    }


def parse_attributes(pairs: list[list[str]]) -> list[AttributePair]:
    return [AttributePair(attribute=k, value=v) for k, v in pairs]


def error_response(exc: KnowcapError) -> JSONResponse:
    return JSONResponse(
        status_code=exc.http_status,
        content={"error": {"code": exc.code, "message": exc.message}},
    )


# ----------------------------------------------------------------------
# Application factory
# ----------------------------------------------------------------------

def create_app(service: KnowledgeService, static_dir=None) -> FastAPI:
    app = FastAPI(title="knowcap", version="0.1.0", docs_url=None, redoc_url=None)
    app.state.service = service

    @app.exception_handler(KnowcapError)
    async def knowcap_error_handler(request: Request, exc: KnowcapError):
        return error_response(exc)

    def current_actor(authorization: str | None = Header(default=None)) -> str:
        if not authorization or not authorization.lower().startswith("bearer "):
            raise AuthFailure("missing bearer token")
        token = authorization.split(" ", 1)[1].strip()
        actor_id = service.repo.state.tokens.get(token)
        if actor_id is None:
            raise AuthFailure("unknown token")
        return actor_id

    def parse_role(value: str) -> Role:
        try:
            return Role(value)
        except ValueError:
            raise EmptyQuery(f"unknown role {value!r}")

    def parse_phase(value: str) -> EIPhase:
        try:
            return EIPhase(value)
        except ValueError:
            raise EmptyQuery(f"unknown phase {value!r}")

    # ------------------------------------------------------------------
    # Plumbing
    # ------------------------------------------------------------------

    @app.get("/api/health", operation_id="service.health", summary="liveness + latest sequence number")
    def health():
        return {"status": "ok", "seq": service.repo.last_seq}

    @app.get("/api/catalogue", operation_id="service.catalogue", summary="endpoint catalogue generated from the route table")
    def catalogue():
        entries = []
        for route in app.routes:
            if isinstance(route, APIRoute) and route.path.startswith("/api/"):
                entries.append({
                    "operation": route.operation_id,
                    "method": sorted(route.methods)[0],
                    "path": route.path,
                    "summary": route.summary or "",
                })
        return {"endpoints": sorted(entries, key=lambda e: e["operation"])}

    # ------------------------------------------------------------------
    # Actors and problems
    # ------------------------------------------------------------------

    @app.post("/api/actors", operation_id="domain.register_actor", summary="register an actor; returns its bearer token")
    def register_actor(body: RegisterBody):
        actor, token = service.register_actor(body.display_name, parse_role(body.role))
        return {"actor": actor_wire(actor), "token": token}

    @app.get("/api/actors", operation_id="domain.list_actors", summary="registered actors")
    def list_actors(_: str = Depends(current_actor)):
        return {"actors": [actor_wire(a) for a in service.repo.state.actors.values()]}

    @app.get("/api/me", operation_id="domain.whoami", summary="actor behind the presented token")
    def whoami(actor_id: str = Depends(current_actor)):
        return {"actor": actor_wire(service.repo.require_actor(actor_id))}

    @app.post("/api/problems", operation_id="domain.create_decision_problem", summary="open a decision problem (decision makers only)")
    def create_problem(body: ProblemBody, actor_id: str = Depends(current_actor)):
        dp = service.create_decision_problem(
            actor_id, body.title, body.initial_demand_text, body.internal_context, body.external_context,
        )
        return {"problem": problem_wire(dp)}

    @app.get("/api/problems", operation_id="domain.list_problems", summary="all decision problems")
    def list_problems(_: str = Depends(current_actor)):
        problems = sorted(service.repo.state.problems.values(), key=lambda dp: dp.created_at_seq)
        return {"problems": [problem_wire(dp) for dp in problems]}

    @app.get("/api/problems/{dp_id}", operation_id="domain.get_problem", summary="one decision problem")
    def get_problem(dp_id: str, _: str = Depends(current_actor)):
        return {"problem": problem_wire(service.repo.require_problem(dp_id))}

    @app.post("/api/problems/{dp_id}/stake", operation_id="domain.define_stake", summary="define or revise the problem's stake")
    def define_stake(dp_id: str, body: StakeBody, actor_id: str = Depends(current_actor)):
        stake, resource = service.define_stake(actor_id, dp_id, body.observed_object, body.signal, body.hypothesis)
        return {"stake": {
            "observed_object": stake.observed_object, "signal": stake.signal,
            "hypothesis": stake.hypothesis, "dp_id": stake.dp_id, "defined_by": stake.defined_by,
        }, "resource": resource.to_dict()}

    @app.post("/api/problems/{dp_id}/advance", operation_id="domain.advance_phase", summary="advance the problem one phase forward")
    def advance_phase(dp_id: str, actor_id: str = Depends(current_actor)):
        return {"current_phase": service.advance_phase(actor_id, dp_id).value}

    @app.get("/api/documents/{doc_uri}", operation_id="domain.get_document", summary="document content by uri")
    def get_document(doc_uri: str, _: str = Depends(current_actor)):
        return {"document": document_wire(service.repo.require_document(doc_uri))}

    # ------------------------------------------------------------------
    # Annotations
    # ------------------------------------------------------------------

    @app.post("/api/annotations", operation_id="annotation.create_annotation", summary="create an anchored annotation")
    def create_annotation(body: AnnotationBody, actor_id: str = Depends(current_actor)):
        annotation = service.create_annotation(
            actor_id, body.dp_id, anchor_from_payload(body.anchor), body.body, parse_attributes(body.attributes),
        )
        return {"annotation": annotation_wire(annotation)}

    @app.get("/api/annotations/{annotation_id}", operation_id="annotation.get_annotation", summary="one annotation")
    def get_annotation(annotation_id: str, _: str = Depends(current_actor)):
        return {"annotation": annotation_wire(service.annotation(annotation_id))}

    @app.post("/api/annotations/{annotation_id}/replies", operation_id="annotation.follow_up", summary="reply in the annotation's thread")
    def follow_up(annotation_id: str, body: ReplyBody, actor_id: str = Depends(current_actor)):
        annotation = service.follow_up(actor_id, annotation_id, body.body, parse_attributes(body.attributes))
        return {"annotation": annotation_wire(annotation)}

    @app.post("/api/annotations/{annotation_id}/reuse", operation_id="annotation.reuse_annotation", summary="reuse an annotation onto a new anchor")
    def reuse_annotation(annotation_id: str, body: ReuseBody, actor_id: str = Depends(current_actor)):
        annotation = service.reuse_annotation(
            actor_id, annotation_id, anchor_from_payload(body.anchor),
            edited_body=body.body,
            edited_attributes=None if body.attributes is None else parse_attributes(body.attributes),
        )
        return {"annotation": annotation_wire(annotation)}

    @app.get("/api/annotations/{annotation_id}/thread", operation_id="annotation.list_thread", summary="annotation thread, children in t_a order")
    def list_thread(annotation_id: str, _: str = Depends(current_actor)):
        return {"thread": thread_wire(service.list_thread(annotation_id))}

    @app.post("/api/anchors/resolve", operation_id="annotation.resolve_anchor", summary="resolve an anchor against current (or supplied) content")
    def resolve_anchor_route(body: ResolveBody, _: str = Depends(current_actor)):
        result = service.resolve(anchor_from_payload(body.anchor), body.content)
        if isinstance(result, WholeDocument):
            return {"resolution": "whole_document"}
        return {"resolution": "span", "start_offset": result.start_offset, "end_offset": result.end_offset}

    @app.get("/api/problems/{dp_id}/annotations", operation_id="annotation.list_for_problem", summary="all annotations of a problem")
    def annotations_for_problem(dp_id: str, _: str = Depends(current_actor)):
        service.repo.require_problem(dp_id)
        annotations = sorted(
            (a for a in service.repo.state.annotations.values() if a.dp_id == dp_id),
            key=lambda a: a.t_a.seq,
        )
        return {"annotations": [annotation_wire(a) for a in annotations]}

    # ------------------------------------------------------------------
    # Knowledge resources
    # ------------------------------------------------------------------

    @app.post("/api/resources", operation_id="repository.declare", summary="declare a new knowledge-resource lineage")
    def declare(body: DeclareBody, actor_id: str = Depends(current_actor)):
        try:
            kind = KRKind(body.kind)
        except ValueError:
            raise EmptyQuery(f"unknown resource kind {body.kind!r}")
        resource = service.declare_resource(actor_id, kind, body.payload, body.dp_id)
        return {"resource": resource.to_dict()}

    @app.post("/api/resources/{kr_id}/versions", operation_id="repository.append_version", summary="append a version to a lineage")
    def append_version(kr_id: str, body: VersionBody, actor_id: str = Depends(current_actor)):
        return {"resource": service.append_resource_version(actor_id, kr_id, body.payload).to_dict()}

    @app.post("/api/resources/{kr_id}/versions/{version}/validate", operation_id="repository.validate", summary="validate the newest evolving version")
    def validate(kr_id: str, version: int, actor_id: str = Depends(current_actor)):
        return {"resource": service.validate_resource(actor_id, kr_id, version).to_dict()}

    @app.get("/api/resources/{kr_id}", operation_id="repository.get_history", summary="full version history of a lineage")
    def get_history(kr_id: str, _: str = Depends(current_actor)):
        return {"history": [row.to_dict() for row in service.get_history(kr_id)]}

    @app.get("/api/snapshot", operation_id="repository.snapshot_at", summary="repository view at a past sequence number")
    def snapshot_at(seq: int = Query(ge=0), _: str = Depends(current_actor)):
        return snapshot_wire(service.snapshot_at(seq), seq)

    # ------------------------------------------------------------------
    # Exploitation
    # ------------------------------------------------------------------

    @app.get("/api/exploit/explore", operation_id="exploit.explore", summary="attribute vocabulary and facet counts")
    def explore(_: str = Depends(current_actor)):
        report = service.explore()
        return {
            "attribute_keys": report.attribute_keys,
            "kinds": report.kinds,
            "actors": report.actors,
            "phases": report.phases,
        }

    @app.post("/api/exploit/query", operation_id="exploit.query", summary="case-style weighted retrieval")
    def query(body: QueryBody, _: str = Depends(current_actor)):
        q = CaseQuery(
            role=parse_role(body.role) if body.role else None,
            phase=parse_phase(body.phase) if body.phase else None,
            terms=tuple(body.terms),
            dp_scope=body.dp_scope,
            as_of=body.as_of,
        )
        state = service.repo.state if q.as_of is None else service.snapshot_at(q.as_of)
        matches = []
        for m in service.query(q):
            row = state.version_row(*m.kr)
            matches.append({
                "kr": list(m.kr),
                "score": m.score,
                "matched_on": {
                    "role_component": m.matched_on.role_component,
                    "phase_component": m.matched_on.phase_component,
                    "term_component": m.matched_on.term_component,
                },
                "stamp": stamp_wire(m.stamp),
                "status": row.status.value,
                "kind": row.kind.value,
            })
        return {"matches": matches}

    @app.get("/api/exploit/analyze", operation_id="exploit.analyze", summary="aggregate indicators and evolution trend")
    def analyze(dp: str | None = None, _: str = Depends(current_actor)):
        report = service.analyze(dp)
        return {
            "by_kind": report.by_kind,
            "by_status": report.by_status,
            "by_actor": report.by_actor,
            "by_phase": report.by_phase,
            "versions_per_lineage": {str(k): v for k, v in report.versions_per_lineage.items()},
            "evolution": [list(point) for point in report.evolution],
        }

    @app.post("/api/feedback", operation_id="exploit.record_feedback", summary="rate an exploited resource (1..5)")
    def record_feedback(body: FeedbackBody, actor_id: str = Depends(current_actor)):
        if len(body.kr) != 2:
            raise RatingOutOfRange("kr must be [kr_id, version]")
        record = service.record_feedback(
            actor_id, (body.kr[0], int(body.kr[1])), body.rating, body.new_problem, body.comment,
        )
        return {"feedback": {
            "actor": record.actor, "kr": list(record.kr), "rating": record.rating,
            "new_problem": record.new_problem, "comment": record.comment,
            "stamp": stamp_wire(record.stamp), "feedback_kr": list(record.feedback_kr),
        }}

    @app.get("/api/recommend", operation_id="exploit.recommend", summary="collaborative-filtering recommendations")
    def recommend(limit: int = Query(default=10, ge=1), actor_id: str = Depends(current_actor)):
        ranked = service.recommend(actor_id, limit)
        return {"recommendations": [
            {"kr": list(r.kr), "predicted_rating": r.predicted_rating} for r in ranked
        ]}

    # ------------------------------------------------------------------
    # Awareness
    # ------------------------------------------------------------------

    @app.post("/api/workspaces/{dp_id}/join", operation_id="awareness.join", summary="open a live session in the problem's workspace")
    def join(dp_id: str, actor_id: str = Depends(current_actor)):
        summary = service.join(actor_id, dp_id)
        return {
            "session": {
                "session_id": summary.session.session_id,
                "actor": summary.session.actor,
                "workspace": summary.session.workspace,
                "availability": summary.session.availability.value,
            },
            "backlog_count": summary.backlog_count,
            "last_event_id": summary.last_event_id,
        }

    @app.post("/api/sessions/{session_id}/heartbeat", operation_id="awareness.heartbeat", summary="refresh liveness / change availability")
    def heartbeat(session_id: str, body: HeartbeatBody, _: str = Depends(current_actor)):
        try:
            availability = Availability(body.availability)
        except ValueError:
            raise EmptyQuery(f"unknown availability {body.availability!r}")
        session = service.heartbeat(session_id, availability)
        return {"acknowledged": True, "availability": session.availability.value}

    @app.post("/api/sessions/{session_id}/leave", operation_id="awareness.leave", summary="close a session (idempotent)")
    def leave(session_id: str, _: str = Depends(current_actor)):
        service.leave(session_id)
        return {"acknowledged": True}

    @app.post("/api/workspaces/{dp_id}/signal", operation_id="awareness.publish_event", summary="publish a workspace signal")
    def publish_signal(dp_id: str, body: SignalBody, actor_id: str = Depends(current_actor)):
        event = service.publish_signal(actor_id, dp_id, body.payload)
        return {"event": event.to_dict()}

    @app.get("/api/workspaces/{dp_id}/roster", operation_id="awareness.presence_roster", summary="who is live, and how available")
    def roster(dp_id: str, _: str = Depends(current_actor)):
        return {"roster": [
            {"actor": e.actor, "availability": e.availability.value, "session_count": e.session_count}
            for e in service.presence_roster(dp_id)
        ]}

    @app.get("/api/workspaces/{dp_id}/events", operation_id="awareness.replay_since", summary="persisted events after a given event id")
    def replay_since(dp_id: str, after: int = Query(default=0, ge=0), _: str = Depends(current_actor)):
        return {"events": [e.to_dict() for e in service.replay_since(dp_id, after)]}

    @app.get("/api/stream/{dp_id}", operation_id="awareness.stream", summary="live event stream (SSE), replaying missed events first")
    def stream(dp_id: str, after: int = Query(default=0, ge=0), token: str = Query(default="")):
        actor_id = service.repo.state.tokens.get(token)
        if actor_id is None:
            raise AuthFailure("unknown token")
        service.repo.require_problem(dp_id)

        def frames() -> Iterator[str]:
            subscription = service.subscribe(dp_id)
            try:
                last_sent = after
                # Catch-up happens after the tap is attached, so nothing can
                # fall between replay and live delivery; duplicates are
                # filtered by event id.
                for event in service.replay_since(dp_id, after):
                    last_sent = event.event_id
                    yield _frame(event)
                while True:
                    event = subscription.next(timeout=STREAM_KEEPALIVE_S)
                    if event is None:
                        if subscription.closed:
                            return
                        yield ": keepalive\n\n"
                        continue
                    if event.event_id <= last_sent:
                        continue
                    last_sent = event.event_id
                    yield _frame(event)
            finally:
                service.hub.detach(subscription)

        return StreamingResponse(frames(), media_type="text/event-stream")

    # ------------------------------------------------------------------
    # Operator surface
    # ------------------------------------------------------------------

    @app.post("/api/admin/seed", operation_id="service.seed_fixture", summary="seed a built-in scenario fixture")
    def seed(body: SeedBody):
        return {"summary": seed_fixture(service, body.name)}

    @app.get("/api/admin/export", operation_id="service.export_log", summary="export the append-only log, optionally problem-scoped")
    def export(dp: str | None = None):
        lines = [rec.encode(r) for r in service.filtered_records(dp)]
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(body, headers={"x-record-count": str(len(lines))})

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def _frame(event) -> str:
    record = event.to_record()
    return f"id: {record['event_id']}\nevent: awareness\ndata: {json.dumps(record, sort_keys=True)}\n\n"
