"""Domain vocabulary: actors, roles, workflow phases, decision problems, stakes.

These are the shared nouns of the decision-support workflow.  A decision
problem moves forward through a fixed four-step phase chain; protection is
not a step in the chain but is realized as role gating on every operation.
"""

from __future__ import annotations

import hashlib
import uuid
from dataclasses import dataclass, field
from enum import Enum

from .errors import TerminalPhase


class Role(str, Enum):
    DECISION_MAKER = "decision_maker"
    WATCHER = "watcher"
    COORDINATOR = "coordinator"


class EIPhase(str, Enum):
    TRANSLATION = "translation"
    SEARCH_RETRIEVAL = "search_retrieval"
    ANALYSIS = "analysis"
    DECISION = "decision"
    # Orthogonal: enforced as access gating, never entered as a workflow state.
    PROTECTION = "protection"


# Forward-only workflow order; PROTECTION is deliberately absent.
PHASE_CHAIN: tuple[EIPhase, ...] = (
    EIPhase.TRANSLATION,
    EIPhase.SEARCH_RETRIEVAL,
    EIPhase.ANALYSIS,
    EIPhase.DECISION,
)


def next_phase(current: EIPhase) -> EIPhase:
    """Single successor in the fixed chain; raises at the terminal phase."""
    idx = PHASE_CHAIN.index(current)
    if idx == len(PHASE_CHAIN) - 1:
        raise TerminalPhase(f"{current.value} is the terminal phase")
    return PHASE_CHAIN[idx + 1]


def phase_order(phase: EIPhase) -> int:
    return PHASE_CHAIN.index(phase)


def new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


def content_digest(content: str) -> str:
    return "sha256:" + hashlib.sha256(content.encode("utf-8")).hexdigest()


STAMP_DECLARED = "t_d"
STAMP_ANNOTATED = "t_a"


@dataclass(frozen=True)
class TemporalStamp:
    """Repository-wide temporal mark.

    ``seq`` is the authoritative total order; ``wall_clock`` (ISO-8601 UTC,
    millisecond resolution) is informational only.  ``tag`` records whether
    the entry originated from a declaration (t_d) or an annotation (t_a).
    """

    seq: int
    wall_clock: str
    tag: str = STAMP_DECLARED


@dataclass(frozen=True)
class Actor:
    actor_id: str
    display_name: str
    role: Role


@dataclass(frozen=True)
class Document:
    doc_uri: str
    content: str
    content_hash: str
    created_at_seq: int

    def verify(self) -> bool:
        return content_digest(self.content) == self.content_hash


@dataclass
class DecisionProblem:
    dp_id: str
    title: str
    initial_demand: str  # doc_uri of the materialized problem statement
    internal_context: str
    external_context: str
    current_phase: EIPhase
    created_by: str
    created_at_seq: int
    # kr_id of the single stake lineage, once one exists
    stake_lineage: str | None = None
    # kr_id of the founding declaration lineage
    declaration_lineage: str | None = None
    phase_history: list[EIPhase] = field(default_factory=list)


@dataclass(frozen=True)
class Stake:
    observed_object: str
    signal: str
    hypothesis: str
    dp_id: str
    defined_by: str
