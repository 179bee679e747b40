"""Append-only, temporally stamped knowledge repository.

Every durable fact in the service is a record in one newline-delimited log:
knowledge-resource versions, status changes, actors, documents, decision
problems, and workspace awareness events.  Nothing is ever rewritten or
deleted; state is a pure projection of the log, so replaying it (or any
prefix of it, via snapshot_at) always reproduces the same state.

Knowledge resources are versioned lineages.  Appending version n+1 first
demotes version n to Superseded through a status-change record, keeping the
"at most one Validated version per lineage" invariant true at every sequence
number.  Declarations and stake definitions start Evolving and are conceded
when a decision maker validates the newest version; annotation references,
feedback, and phase transitions record facts and are born Validated.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterator

from . import records as rec
from .annotations import (
    Annotation,
    anchor_from_payload,
    attributes_from_payload,
)
from .errors import (
    AlreadyValidated,
    InvalidKind,
    RoleViolation,
    StaleVersion,
    UnknownActor,
    UnknownDocument,
    UnknownLineage,
    UnknownProblem,
    WriteFailure,
)
from .model import (
    STAMP_ANNOTATED,
    STAMP_DECLARED,
    Actor,
    DecisionProblem,
    Document,
    EIPhase,
    Role,
    TemporalStamp,
    content_digest,
    new_id,
)

logger = logging.getLogger(__name__)

LOG_FILENAME = "knowledge.log"


class KRKind(str, Enum):
    DECLARATION = "declaration"
    STAKE_DEFINITION = "stake_definition"
    ANNOTATION_REF = "annotation_ref"
    FEEDBACK = "feedback"
    PHASE_TRANSITION = "phase_transition"


class KRStatus(str, Enum):
    EVOLVING = "evolving"
    VALIDATED = "validated"
    SUPERSEDED = "superseded"


# Which roles may author each kind.  None means any registered actor.
WRITE_GATES: dict[KRKind, set[Role] | None] = {
    KRKind.DECLARATION: {Role.DECISION_MAKER},
    KRKind.STAKE_DEFINITION: {Role.WATCHER, Role.DECISION_MAKER},
    KRKind.ANNOTATION_REF: None,
    KRKind.FEEDBACK: None,
    KRKind.PHASE_TRANSITION: {Role.DECISION_MAKER, Role.COORDINATOR},
}

# Kinds that record accomplished facts rather than claims under debate;
# they are Validated from birth and never sit in the concession loop.
FACT_KINDS = {KRKind.ANNOTATION_REF, KRKind.FEEDBACK, KRKind.PHASE_TRANSITION}


@dataclass
class KnowledgeResource:
    kr_id: str
    version: int
    kind: KRKind
    payload: dict[str, Any]
    author: str
    author_role: Role
    stamp: TemporalStamp
    status: KRStatus
    dp_id: str | None
    phase_at_write: EIPhase | None
    supersedes: tuple[str, int] | None = None
    # (status, seq, actor) in application order, starting with the birth status
    status_timeline: list[tuple[KRStatus, int, str]] = field(default_factory=list)

    @property
    def key(self) -> tuple[str, int]:
        return (self.kr_id, self.version)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kr_id": self.kr_id,
            "version": self.version,
            "kind": self.kind.value,
            "payload": self.payload,
            "author": self.author,
            "author_role": self.author_role.value,
            "stamp": {"seq": self.stamp.seq, "wall_clock": self.stamp.wall_clock, "tag": self.stamp.tag},
            "status": self.status.value,
            "dp_id": self.dp_id,
            "phase_at_write": self.phase_at_write.value if self.phase_at_write else None,
            "supersedes": list(self.supersedes) if self.supersedes else None,
            "status_timeline": [[status.value, seq, actor] for status, seq, actor in self.status_timeline],
        }


@dataclass
class Lineage:
    kr_id: str
    kind: KRKind
    dp_id: str | None
    versions: list[KnowledgeResource] = field(default_factory=list)

    @property
    def newest(self) -> KnowledgeResource:
        return self.versions[-1]


@dataclass(frozen=True)
class AwarenessEvent:
    event_id: int
    kind: str  # presence | workspace | activity
    actor: str
    workspace: str
    stamp: TemporalStamp
    payload: str
    ref: tuple[str, int] | None = None  # (kr_id, version) for activity events

    def to_dict(self) -> dict[str, Any]:
        return {
            "event_id": self.event_id,
            "kind": self.kind,
            "actor": self.actor,
            "workspace": self.workspace,
            "stamp": {"seq": self.stamp.seq, "wall_clock": self.stamp.wall_clock, "tag": self.stamp.tag},
            "payload": self.payload,
            "ref": list(self.ref) if self.ref else None,
        }

    def to_record(self) -> dict[str, Any]:
        """The same self-describing record shape the log file uses."""
        return {
            "rec": "awareness",
            "seq": self.stamp.seq,
            "wall": self.stamp.wall_clock,
            "workspace": self.workspace,
            "event_id": self.event_id,
            "kind": self.kind,
            "actor": self.actor,
            "payload": self.payload,
            "ref": list(self.ref) if self.ref else None,
        }


class RepositoryState:
    """Pure projection of a record sequence; no I/O, no clocks."""

    def __init__(self):
        self.last_seq = 0
        self.actors: dict[str, Actor] = {}
        self.tokens: dict[str, str] = {}  # bearer token -> actor_id
        self.documents: dict[str, Document] = {}
        self.problems: dict[str, DecisionProblem] = {}
        self.annotations: dict[str, Annotation] = {}
        self.annotation_children: dict[str, list[str]] = {}
        self.lineages: dict[str, Lineage] = {}
        self.workspace_events: dict[str, list[AwarenessEvent]] = {}

    # ------------------------------------------------------------------
    # Projection
    # ------------------------------------------------------------------

    def apply(self, record: dict[str, Any]) -> None:
        handler = getattr(self, f"_apply_{record['rec']}")
        handler(record)
        self.last_seq = record["seq"]

    def _apply_actor(self, record: dict[str, Any]) -> None:
        actor = Actor(record["actor_id"], record["display_name"], Role(record["role"]))
        self.actors[actor.actor_id] = actor
        self.tokens[record["token"]] = actor.actor_id

    def _apply_document(self, record: dict[str, Any]) -> None:
        self.documents[record["doc_uri"]] = Document(
            doc_uri=record["doc_uri"],
            content=record["content"],
            content_hash=record["content_hash"],
            created_at_seq=record["seq"],
        )

    def _apply_dp(self, record: dict[str, Any]) -> None:
        self.problems[record["dp_id"]] = DecisionProblem(
            dp_id=record["dp_id"],
            title=record["title"],
            initial_demand=record["initial_demand"],
            internal_context=record["internal_context"],
            external_context=record["external_context"],
            current_phase=EIPhase(record["phase"]),
            created_by=record["created_by"],
            created_at_seq=record["seq"],
            phase_history=[EIPhase(record["phase"])],
        )

    def _apply_kr(self, record: dict[str, Any]) -> None:
        kind = KRKind(record["kind"])
        stamp = TemporalStamp(seq=record["seq"], wall_clock=record["wall"], tag=record["stamp_tag"])
        status = KRStatus(record["status"])
        resource = KnowledgeResource(
            kr_id=record["kr_id"],
            version=record["version"],
            kind=kind,
            payload=record["payload"],
            author=record["author"],
            author_role=Role(record["author_role"]),
            stamp=stamp,
            status=status,
            dp_id=record.get("dp_id"),
            phase_at_write=EIPhase(record["phase_at_write"]) if record.get("phase_at_write") else None,
            supersedes=tuple(record["supersedes"]) if record.get("supersedes") else None,
            status_timeline=[(status, record["seq"], record["author"])],
        )
        lineage = self.lineages.get(resource.kr_id)
        if lineage is None:
            lineage = Lineage(kr_id=resource.kr_id, kind=kind, dp_id=resource.dp_id)
            self.lineages[resource.kr_id] = lineage
        lineage.versions.append(resource)

        dp = self.problems.get(resource.dp_id) if resource.dp_id else None
        if dp is not None:
            if kind is KRKind.STAKE_DEFINITION and dp.stake_lineage is None:
                dp.stake_lineage = resource.kr_id
            elif kind is KRKind.DECLARATION and dp.declaration_lineage is None:
                dp.declaration_lineage = resource.kr_id
            elif kind is KRKind.PHASE_TRANSITION:
                dp.current_phase = EIPhase(resource.payload["to"])
                dp.phase_history.append(dp.current_phase)
        if kind is KRKind.ANNOTATION_REF:
            self._index_annotation(resource)

    def _index_annotation(self, resource: KnowledgeResource) -> None:
        p = resource.payload
        annotation = Annotation(
            annotation_id=p["annotation_id"],
            author=resource.author,
            t_a=resource.stamp,
            anchor=anchor_from_payload(p["anchor"]),
            body=p["body"],
            attributes=attributes_from_payload(p["attributes"]),
            dp_id=p["dp_id"],
            parent=p.get("parent"),
            derived_from=p.get("derived_from"),
        )
        self.annotations[annotation.annotation_id] = annotation
        if annotation.parent:
            self.annotation_children.setdefault(annotation.parent, []).append(annotation.annotation_id)

    def _apply_status(self, record: dict[str, Any]) -> None:
        resource = self.version_row(record["kr_id"], record["version"])
        status = KRStatus(record["status"])
        resource.status = status
        resource.status_timeline.append((status, record["seq"], record["actor"]))

    def _apply_awareness(self, record: dict[str, Any]) -> None:
        event = AwarenessEvent(
            event_id=record["event_id"],
            kind=record["kind"],
            actor=record["actor"],
            workspace=record["workspace"],
            stamp=TemporalStamp(seq=record["seq"], wall_clock=record["wall"], tag=STAMP_DECLARED),
            payload=record["payload"],
            ref=tuple(record["ref"]) if record.get("ref") else None,
        )
        self.workspace_events.setdefault(event.workspace, []).append(event)

    # ------------------------------------------------------------------
    # Reads
    # ------------------------------------------------------------------

    def version_row(self, kr_id: str, version: int) -> KnowledgeResource:
        lineage = self.lineages.get(kr_id)
        if lineage is None:
            raise UnknownLineage(f"no lineage {kr_id}")
        if not 1 <= version <= len(lineage.versions):
            raise UnknownLineage(f"lineage {kr_id} has no version {version}")
        return lineage.versions[version - 1]

    def get_history(self, kr_id: str) -> list[KnowledgeResource]:
        lineage = self.lineages.get(kr_id)
        if lineage is None:
            raise UnknownLineage(f"no lineage {kr_id}")
        return list(lineage.versions)

    def newest(self, kr_id: str) -> KnowledgeResource:
        return self.get_history(kr_id)[-1]

    def newest_versions(self) -> list[KnowledgeResource]:
        return [lineage.newest for lineage in self.lineages.values()]

    def all_versions(self) -> Iterator[KnowledgeResource]:
        for lineage in self.lineages.values():
            yield from lineage.versions

    def is_conceded(self, kr_id: str) -> bool:
        """Concession: the revision loop has closed on the newest version."""
        return self.newest(kr_id).status is KRStatus.VALIDATED

    def events_for(self, workspace: str) -> list[AwarenessEvent]:
        return list(self.workspace_events.get(workspace, ()))


def utc_now_millis() -> str:
    now = datetime.now(timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%S.") + f"{now.microsecond // 1000:03d}Z"


class Repository:
    """RepositoryState plus the persistent log and sequencing.

    Appends are linearized by a single lock, which also makes every read a
    consistent prefix of the log.  When backed by a data directory each
    record is written and flushed before the projection is updated.
    """

    def __init__(self, data_dir: str | Path | None = None, wall_clock: Callable[[], str] = utc_now_millis):
        self._lock = threading.RLock()
        self._wall_clock = wall_clock
        self._records: list[dict[str, Any]] = []
        self._state = RepositoryState()
        self._data_dir = Path(data_dir) if data_dir is not None else None
        self._log_handle = None
        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)
            log_path = self._data_dir / LOG_FILENAME
            if log_path.exists():
                for record in rec.read_log_file(log_path):
                    self._records.append(record)
                    self._state.apply(record)
                logger.info("replayed %d records from %s", len(self._records), log_path)
            self._log_handle = open(log_path, "a", encoding="utf-8", newline="")

    @classmethod
    def in_memory(cls, wall_clock: Callable[[], str] = utc_now_millis) -> "Repository":
        return cls(None, wall_clock)

    def close(self) -> None:
        with self._lock:
            if self._log_handle is not None:
                self._log_handle.close()
                self._log_handle = None

    # ------------------------------------------------------------------
    # Low-level append
    # ------------------------------------------------------------------

    def append(self, record: dict[str, Any]) -> dict[str, Any]:
        """Assign seq + wall clock, persist, project.  The one write path."""
        with self._lock:
            record = dict(record)
            record["seq"] = self._state.last_seq + 1
            record["wall"] = self._wall_clock()
            rec.validate_record(record, len(self._records) + 1)
            if self._log_handle is not None:
                self._log_handle.write(rec.encode(record) + "\n")
                self._log_handle.flush()
            self._records.append(record)
            self._state.apply(record)
            return record

    # ------------------------------------------------------------------
    # Registry writes (actors, documents, problems)
    # ------------------------------------------------------------------

    def add_actor(self, display_name: str, role: Role, token: str) -> Actor:
        with self._lock:
            actor_id = new_id("a")
            self.append({
                "rec": rec.REC_ACTOR,
                "actor_id": actor_id,
                "display_name": display_name,
                "role": role.value,
                "token": token,
            })
            return self._state.actors[actor_id]

    def add_document(self, content: str) -> Document:
        with self._lock:
            doc_uri = new_id("doc")
            self.append({
                "rec": rec.REC_DOCUMENT,
                "doc_uri": doc_uri,
                "content": content,
                "content_hash": content_digest(content),
            })
            return self._state.documents[doc_uri]

    def add_problem(
        self, title: str, initial_demand_uri: str, internal_context: str,
        external_context: str, created_by: str,
    ) -> DecisionProblem:
        with self._lock:
            dp_id = new_id("dp")
            self.append({
                "rec": rec.REC_PROBLEM,
                "dp_id": dp_id,
                "title": title,
                "initial_demand": initial_demand_uri,
                "internal_context": internal_context,
                "external_context": external_context,
                "created_by": created_by,
                "phase": EIPhase.TRANSLATION.value,
            })
            return self._state.problems[dp_id]

    # ------------------------------------------------------------------
    # Knowledge-resource operations
    # ------------------------------------------------------------------

    def _check_write_gate(self, author: str, kind: KRKind) -> Actor:
        actor = self.require_actor(author)
        allowed = WRITE_GATES[kind]
        if allowed is not None and actor.role not in allowed:
            raise RoleViolation(f"role {actor.role.value} may not author {kind.value} resources")
        return actor

    def _birth_status(self, kind: KRKind) -> KRStatus:
        return KRStatus.VALIDATED if kind in FACT_KINDS else KRStatus.EVOLVING

    def _append_kr(
        self, author: Actor, kind: KRKind, payload: dict[str, Any], dp_id: str | None,
        kr_id: str, version: int, supersedes: tuple[str, int] | None,
    ) -> KnowledgeResource:
        dp = self._state.problems.get(dp_id) if dp_id else None
        self.append({
            "rec": rec.REC_KR,
            "kr_id": kr_id,
            "version": version,
            "kind": kind.value,
            "payload": payload,
            "author": author.actor_id,
            "author_role": author.role.value,
            "stamp_tag": STAMP_ANNOTATED if kind is KRKind.ANNOTATION_REF else STAMP_DECLARED,
            "status": self._birth_status(kind).value,
            "dp_id": dp_id,
            "phase_at_write": dp.current_phase.value if dp else None,
            "supersedes": list(supersedes) if supersedes else None,
        })
        return self._state.version_row(kr_id, version)

    def declare(self, author: str, kind: KRKind, payload: dict[str, Any], dp_id: str | None = None) -> KnowledgeResource:
        """Open a fresh lineage at version 1 (declare never versions)."""
        with self._lock:
            actor = self._check_write_gate(author, kind)
            if dp_id is not None and dp_id not in self._state.problems:
                raise UnknownProblem(f"no decision problem {dp_id}")
            return self._append_kr(actor, kind, payload, dp_id, new_id("kr"), 1, None)

    def append_version(self, author: str, kr_id: str, payload: dict[str, Any]) -> KnowledgeResource:
        """Extend a lineage; the previous newest version is demoted first."""
        with self._lock:
            lineage = self._state.lineages.get(kr_id)
            if lineage is None:
                raise UnknownLineage(f"no lineage {kr_id}")
            if lineage.kind in (KRKind.ANNOTATION_REF, KRKind.PHASE_TRANSITION):
                # Annotations are immutable and transitions are facts; both
                # evolve by adding new lineages, never new versions.
                raise InvalidKind(f"{lineage.kind.value} lineages do not version")
            actor = self._check_write_gate(author, lineage.kind)
            previous = lineage.newest
            self._append_status(kr_id, previous.version, KRStatus.SUPERSEDED, actor.actor_id)
            return self._append_kr(
                actor, lineage.kind, payload, lineage.dp_id,
                kr_id, previous.version + 1, (kr_id, previous.version),
            )

    def _append_status(self, kr_id: str, version: int, status: KRStatus, actor: str) -> None:
        self.append({
            "rec": rec.REC_STATUS,
            "kr_id": kr_id,
            "version": version,
            "status": status.value,
            "actor": actor,
        })

    def validate(self, validator: str, kr_id: str, version: int) -> KnowledgeResource:
        """Concede the newest Evolving version of a lineage.

        Only decision makers validate; claims born as facts are already
        Validated, so any validate call on them reports AlreadyValidated.
        """
        with self._lock:
            actor = self.require_actor(validator)
            if actor.role is not Role.DECISION_MAKER:
                raise RoleViolation(f"role {actor.role.value} may not validate knowledge resources")
            resource = self._state.version_row(kr_id, version)
            newest = self._state.lineages[kr_id].newest
            if version != newest.version:
                raise StaleVersion(f"{kr_id} v{version} is superseded by v{newest.version}")
            if resource.status is KRStatus.VALIDATED:
                raise AlreadyValidated(f"{kr_id} v{version} is already validated")
            self._append_status(kr_id, version, KRStatus.VALIDATED, validator)
            return resource

    # ------------------------------------------------------------------
    # Reads
    # ------------------------------------------------------------------

    @property
    def state(self) -> RepositoryState:
        return self._state

    @property
    def lock(self) -> threading.RLock:
        """Held by readers that need a multi-step consistent view."""
        return self._lock

    @property
    def last_seq(self) -> int:
        with self._lock:
            return self._state.last_seq

    def require_actor(self, actor_id: str) -> Actor:
        actor = self._state.actors.get(actor_id)
        if actor is None:
            raise UnknownActor(f"no actor {actor_id}")
        return actor

    def require_problem(self, dp_id: str) -> DecisionProblem:
        dp = self._state.problems.get(dp_id)
        if dp is None:
            raise UnknownProblem(f"no decision problem {dp_id}")
        return dp

    def require_document(self, doc_uri: str) -> Document:
        doc = self._state.documents.get(doc_uri)
        if doc is None:
            raise UnknownDocument(f"no document {doc_uri}")
        return doc

    def get_history(self, kr_id: str) -> list[KnowledgeResource]:
        with self._lock:
            return self._state.get_history(kr_id)

    def snapshot_at(self, seq_bound: int) -> RepositoryState:
        """State considering only records with seq <= seq_bound."""
        with self._lock:
            view = RepositoryState()
            for record in self._records:
                if record["seq"] > seq_bound:
                    break
                view.apply(record)
            return view

    def all_records(self) -> list[dict[str, Any]]:
        with self._lock:
            return list(self._records)

    # ------------------------------------------------------------------
    # Snapshot files
    # ------------------------------------------------------------------

    def write_snapshot(self) -> Path:
        """Dump the full state (its record history) as snapshot-<seq>."""
        if self._data_dir is None:
            raise WriteFailure("in-memory repository has no data directory")
        import json

        with self._lock:
            seq = self._state.last_seq
            body = {"snapshot_seq": seq, "record_count": len(self._records), "records": self._records}
            path = self._data_dir / f"snapshot-{seq}"
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(body, sort_keys=True, ensure_ascii=False), encoding="utf-8")
            tmp.replace(path)
            return path


def load_snapshot(path: str | Path) -> RepositoryState:
    import json

    body = json.loads(Path(path).read_text(encoding="utf-8"))
    state = RepositoryState()
    for record in body["records"]:
        state.apply(record)
    if state.last_seq != body["snapshot_seq"]:
        raise WriteFailure(f"snapshot {path} is internally inconsistent")
    return state
