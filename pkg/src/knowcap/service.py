"""The orchestrating facade every entry point (HTTP, CLI, fixtures) talks to.

Ties the repository, the awareness hub, and the exploitation engine together
and enforces the cross-module contracts:

* role gates on every mutating operation (protection-as-gating),
* per-decision-problem serialization of mutations,
* emission coupling: each repository append of a declaration, stake
  definition, annotation reference, or phase transition publishes exactly one
  activity event (and nothing else does), while validations publish
  workspace events and session changes publish presence events.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path
from typing import Any

from . import records as rec
from .annotations import (
    Anchor,
    Annotation,
    ResolvedSpan,
    TARGET_ANNOTATION,
    TARGET_DOCUMENT,
    ThreadNode,
    WholeDocument,
    anchor_to_payload,
    attributes_to_payload,
    build_thread,
    require_content,
    resolve_anchor,
    validate_fragment_against,
)
from .awareness import (
    EVENT_ACTIVITY,
    EVENT_WORKSPACE,
    AwarenessHub,
    Availability,
    JoinSummary,
    RosterEntry,
    Session,
    Subscription,
)
from .errors import (
    DanglingAnchor,
    EmptyField,
    EmptyName,
    InvalidKind,
    PhaseGate,
    RoleViolation,
    WriteFailure,
)
from .exploitation import (
    CaseMatch,
    CaseQuery,
    ExploitationEngine,
    FeedbackRecord,
    IndicatorReport,
    Recommendation,
    RetrievalWeights,
    VocabularyReport,
)
from .model import Actor, DecisionProblem, EIPhase, Role, Stake, new_id, next_phase
from .repository import (
    AwarenessEvent,
    KnowledgeResource,
    KRKind,
    Repository,
    RepositoryState,
)

# Kinds whose appends are mirrored 1:1 by activity events.
COUPLED_KINDS = {KRKind.DECLARATION, KRKind.STAKE_DEFINITION, KRKind.ANNOTATION_REF, KRKind.PHASE_TRANSITION}

# Kinds clients may write through the generic declare/append operations;
# the other kinds are produced by their dedicated operations only.
GENERIC_KINDS = {KRKind.DECLARATION, KRKind.STAKE_DEFINITION}


class KnowledgeService:
    def __init__(
        self,
        repository: Repository | None = None,
        weights: RetrievalWeights = RetrievalWeights(),
        cf_min_co_raters: int = 1,
        heartbeat_interval_s: float = 15,
        session_timeout_s: float = 45,
        clock=None,
    ):
        self.repo = repository if repository is not None else Repository.in_memory()
        hub_kwargs = {} if clock is None else {"clock": clock}
        self.hub = AwarenessHub(
            self.repo,
            heartbeat_interval_s=heartbeat_interval_s,
            session_timeout_s=session_timeout_s,
            **hub_kwargs,
        )
        self.engine = ExploitationEngine(self.repo, weights=weights, cf_min_co_raters=cf_min_co_raters)
        self._dp_locks: dict[str, threading.RLock] = {}
        self._dp_locks_guard = threading.Lock()

    def _dp_lock(self, dp_id: str) -> threading.RLock:
        with self._dp_locks_guard:
            lock = self._dp_locks.get(dp_id)
            if lock is None:
                lock = self._dp_locks[dp_id] = threading.RLock()
            return lock

    def _emit_activity(self, actor: str, resource: KnowledgeResource, payload: str) -> None:
        self.hub.publish_event(EVENT_ACTIVITY, actor, resource.dp_id, payload, ref=resource.key)

    # ------------------------------------------------------------------
    # Actors, problems, stakes, phases
    # ------------------------------------------------------------------

    def register_actor(self, display_name: str, role: Role) -> tuple[Actor, str]:
        """Returns the actor plus its bearer token."""
        if not display_name.strip():
            raise EmptyName("display_name must be non-empty")
        token = uuid.uuid4().hex
        actor = self.repo.add_actor(display_name.strip(), role, token)
        return actor, token

    def create_decision_problem(
        self, author: str, title: str, initial_demand_text: str,
        internal_context: str = "", external_context: str = "",
    ) -> DecisionProblem:
        actor = self.repo.require_actor(author)
        if actor.role is not Role.DECISION_MAKER:
            raise RoleViolation("only a decision maker may open a decision problem")
        if not title.strip():
            raise EmptyField("title must be non-empty")
        if not initial_demand_text.strip():
            raise EmptyField("initial demand must be non-empty")
        with self.repo.lock:
            document = self.repo.add_document(initial_demand_text)
            dp = self.repo.add_problem(title, document.doc_uri, internal_context, external_context, author)
            declaration = self.repo.declare(
                author, KRKind.DECLARATION,
                {"title": title, "doc_uri": document.doc_uri, "text": initial_demand_text},
                dp_id=dp.dp_id,
            )
            self._emit_activity(author, declaration, f"dp_declared:{dp.dp_id}")
            return dp

    def define_stake(
        self, author: str, dp_id: str, observed_object: str, signal: str, hypothesis: str,
    ) -> tuple[Stake, KnowledgeResource]:
        actor = self.repo.require_actor(author)
        if actor.role is Role.COORDINATOR:
            raise RoleViolation("coordinators plan the workflow but do not author stakes")
        for name, value in (("observed_object", observed_object), ("signal", signal), ("hypothesis", hypothesis)):
            if not value.strip():
                raise EmptyField(f"{name} must be non-empty")
        with self._dp_lock(dp_id):
            dp = self.repo.require_problem(dp_id)
            payload = {
                "observed_object": observed_object,
                "signal": signal,
                "hypothesis": hypothesis,
                "defined_by": author,
            }
            if dp.stake_lineage is None:
                resource = self.repo.declare(author, KRKind.STAKE_DEFINITION, payload, dp_id=dp_id)
                self._emit_activity(author, resource, "stake_defined")
            else:
                resource = self.repo.append_version(author, dp.stake_lineage, payload)
                self._emit_activity(author, resource, "stake_updated")
            stake = Stake(observed_object, signal, hypothesis, dp_id, author)
            return stake, resource

    def advance_phase(self, author: str, dp_id: str) -> EIPhase:
        actor = self.repo.require_actor(author)
        with self._dp_lock(dp_id):
            dp = self.repo.require_problem(dp_id)
            if actor.actor_id != dp.created_by and actor.role is not Role.COORDINATOR:
                raise RoleViolation("only the problem's decision maker or a coordinator may advance phases")
            target = next_phase(dp.current_phase)  # TerminalPhase at the end of the chain
            if dp.current_phase is EIPhase.TRANSLATION:
                if dp.stake_lineage is None or not self.repo.state.is_conceded(dp.stake_lineage):
                    raise PhaseGate(
                        f"{dp.dp_id} cannot leave translation until its newest stake version is validated"
                    )
            transition = self.repo.declare(
                author, KRKind.PHASE_TRANSITION,
                {"from": dp.current_phase.value, "to": target.value},
                dp_id=dp_id,
            )
            self._emit_activity(author, transition, f"phase_advanced:{target.value}")
            return self.repo.require_problem(dp_id).current_phase

    # ------------------------------------------------------------------
    # Annotations
    # ------------------------------------------------------------------

    def _target_content(self, anchor: Anchor) -> str:
        state = self.repo.state
        if anchor.target_kind == TARGET_DOCUMENT:
            document = state.documents.get(anchor.target)
            if document is None:
                raise DanglingAnchor(f"no document {anchor.target}")
            return document.content
        annotation = state.annotations.get(anchor.target)
        if annotation is None:
            raise DanglingAnchor(f"no annotation {anchor.target}")
        return annotation.body

    def _persist_annotation(
        self, author: str, dp_id: str, anchor: Anchor, body: str,
        attributes, parent: str | None, derived_from: str | None,
    ) -> Annotation:
        annotation_id = new_id("ann")
        payload = {
            "annotation_id": annotation_id,
            "anchor": anchor_to_payload(anchor),
            "body": body,
            "attributes": attributes_to_payload(attributes),
            "parent": parent,
            "derived_from": derived_from,
            "dp_id": dp_id,
        }
        resource = self.repo.declare(author, KRKind.ANNOTATION_REF, payload, dp_id=dp_id)
        self._emit_activity(author, resource, f"annotation_created:{annotation_id}")
        return self.repo.state.annotations[annotation_id]

    def create_annotation(
        self, author: str, dp_id: str, anchor: Anchor, body: str = "", attributes=(),
    ) -> Annotation:
        self.repo.require_actor(author)
        attributes = tuple(attributes)
        require_content(body, attributes)
        with self._dp_lock(dp_id):
            self.repo.require_problem(dp_id)
            content = self._target_content(anchor)
            if anchor.fragment is not None:
                validate_fragment_against(anchor.fragment, content)
            return self._persist_annotation(author, dp_id, anchor, body, attributes, None, None)

    def follow_up(self, author: str, parent: str, body: str = "", attributes=()) -> Annotation:
        self.repo.require_actor(author)
        attributes = tuple(attributes)
        require_content(body, attributes)
        source = self.repo.state.annotations.get(parent)
        if source is None:
            raise DanglingAnchor(f"no annotation {parent}")
        with self._dp_lock(source.dp_id):
            anchor = Anchor(target_kind=TARGET_ANNOTATION, target=parent)
            return self._persist_annotation(author, source.dp_id, anchor, body, attributes, parent, None)

    def reuse_annotation(
        self, author: str, source: str, new_anchor: Anchor,
        edited_body: str | None = None, edited_attributes=None,
    ) -> Annotation:
        """A modified (or verbatim) copy becomes a new annotation; the source
        is never touched."""
        self.repo.require_actor(author)
        original = self.repo.state.annotations.get(source)
        if original is None:
            raise DanglingAnchor(f"no annotation {source}")
        body = original.body if edited_body is None else edited_body
        attributes = original.attributes if edited_attributes is None else tuple(edited_attributes)
        require_content(body, attributes)
        with self._dp_lock(original.dp_id):
            content = self._target_content(new_anchor)
            if new_anchor.fragment is not None:
                validate_fragment_against(new_anchor.fragment, content)
            return self._persist_annotation(
                author, original.dp_id, new_anchor, body, attributes, original.parent, source,
            )

    def resolve(self, anchor: Anchor, current_content: str | None = None) -> ResolvedSpan | WholeDocument:
        if current_content is None:
            current_content = self._target_content(anchor)
        else:
            self._target_content(anchor)  # still require the target to exist
        return resolve_anchor(anchor, current_content)

    def list_thread(self, root: str) -> ThreadNode:
        with self.repo.lock:
            state = self.repo.state
            return build_thread(root, state.annotations, state.annotation_children)

    def annotation(self, annotation_id: str) -> Annotation:
        ann = self.repo.state.annotations.get(annotation_id)
        if ann is None:
            raise DanglingAnchor(f"no annotation {annotation_id}")
        return ann

    # ------------------------------------------------------------------
    # Knowledge resources
    # ------------------------------------------------------------------

    def declare_resource(self, author: str, kind: KRKind, payload: dict[str, Any], dp_id: str | None = None) -> KnowledgeResource:
        if kind not in GENERIC_KINDS:
            raise InvalidKind(f"{kind.value} resources are written by their dedicated operation")
        with self.repo.lock:
            resource = self.repo.declare(author, kind, payload, dp_id=dp_id)
            if resource.dp_id is not None:
                self._emit_activity(author, resource, f"kr_declared:{resource.kr_id}")
            return resource

    def append_resource_version(self, author: str, kr_id: str, payload: dict[str, Any]) -> KnowledgeResource:
        with self.repo.lock:
            lineage = self.repo.state.lineages.get(kr_id)
            if lineage is not None and lineage.kind not in GENERIC_KINDS:
                raise InvalidKind(f"{lineage.kind.value} resources are written by their dedicated operation")
            resource = self.repo.append_version(author, kr_id, payload)
            if resource.dp_id is not None:
                self._emit_activity(author, resource, f"kr_updated:{resource.kr_id}")
            return resource

    def validate_resource(self, validator: str, kr_id: str, version: int) -> KnowledgeResource:
        with self.repo.lock:
            resource = self.repo.validate(validator, kr_id, version)
            if resource.dp_id is not None:
                # A validation changes shared state but appends no resource,
                # so it surfaces as a workspace event, not an activity one.
                self.hub.publish_event(
                    EVENT_WORKSPACE, validator, resource.dp_id,
                    f"kr_validated:{kr_id}:v{version}", ref=resource.key,
                )
            return resource

    def get_history(self, kr_id: str) -> list[KnowledgeResource]:
        return self.repo.get_history(kr_id)

    def snapshot_at(self, seq_bound: int) -> RepositoryState:
        return self.repo.snapshot_at(seq_bound)

    # ------------------------------------------------------------------
    # Exploitation
    # ------------------------------------------------------------------

    def explore(self) -> VocabularyReport:
        return self.engine.explore()

    def query(self, q: CaseQuery) -> list[CaseMatch]:
        return self.engine.query(q)

    def analyze(self, dp_scope: str | None = None) -> IndicatorReport:
        return self.engine.analyze(dp_scope)

    def record_feedback(
        self, actor: str, kr: tuple[str, int], rating: int,
        new_problem: str | None = None, comment: str | None = None,
    ) -> FeedbackRecord:
        self.repo.require_actor(actor)
        return self.engine.record_feedback(actor, kr, rating, new_problem, comment)

    def recommend(self, for_actor: str, limit: int) -> list[Recommendation]:
        return self.engine.recommend(for_actor, limit)

    # ------------------------------------------------------------------
    # Awareness
    # ------------------------------------------------------------------

    def join(self, actor: str, dp_id: str) -> JoinSummary:
        return self.hub.join(actor, dp_id)

    def heartbeat(self, session_id: str, availability: Availability) -> Session:
        return self.hub.heartbeat(session_id, availability)

    def leave(self, session_id: str) -> None:
        self.hub.leave(session_id)

    def publish_signal(self, actor: str, dp_id: str, payload: str) -> AwarenessEvent:
        """Client-originated workspace signal.  Activity and presence events
        are emitted only by the service itself, keeping the append/event
        coupling intact."""
        self.repo.require_actor(actor)
        return self.hub.publish_event(EVENT_WORKSPACE, actor, dp_id, payload)

    def presence_roster(self, dp_id: str) -> list[RosterEntry]:
        return self.hub.presence_roster(dp_id)

    def replay_since(self, dp_id: str, after_event_id: int) -> list[AwarenessEvent]:
        return self.hub.replay_since(dp_id, after_event_id)

    def subscribe(self, dp_id: str) -> Subscription:
        return self.hub.tap(dp_id)

    # ------------------------------------------------------------------
    # Operator tooling
    # ------------------------------------------------------------------

    def export_log(self, destination: str | Path, dp_scope: str | None = None) -> int:
        try:
            return rec.write_log_file(destination, self.filtered_records(dp_scope))
        except OSError as exc:
            raise WriteFailure(f"cannot write {destination}: {exc}")

    def filtered_records(self, dp_scope: str | None = None) -> list[dict[str, Any]]:
        with self.repo.lock:
            all_records = self.repo.all_records()
            if dp_scope is None:
                return all_records
            return [r for r in all_records if self.record_dp(r) == dp_scope]

    def record_dp(self, record: dict[str, Any]) -> str | None:
        """The decision problem a record belongs to, None for global records."""
        kind = record["rec"]
        if kind == rec.REC_PROBLEM:
            return record["dp_id"]
        if kind == rec.REC_KR:
            return record.get("dp_id")
        if kind == rec.REC_AWARENESS:
            return record["workspace"]
        if kind == rec.REC_STATUS:
            lineage = self.repo.state.lineages.get(record["kr_id"])
            return lineage.dp_id if lineage else None
        return None

    def close(self) -> None:
        self.repo.close()


def build_service(config) -> KnowledgeService:
    """Service wired from a ServiceConfig, replaying any existing log."""
    repository = Repository(config.data_directory)
    return KnowledgeService(
        repository,
        weights=config.weights,
        cf_min_co_raters=config.cf_min_co_raters,
        heartbeat_interval_s=config.heartbeat_interval_s,
        session_timeout_s=config.session_timeout_s,
    )
