"""Collaborative knowledge capitalization for decision-support teams.

Knowledge expressed while actors work a decision problem — declarations,
stake definitions, annotations, feedback — is captured append-only with
temporal stamps, validated until conceded, exploited through case-style
retrieval and collaborative filtering, and mirrored to live workspaces as
three-level group awareness.
"""

from .annotations import (
    Anchor,
    Annotation,
    AttributePair,
    ContextQuote,
    FragmentLocator,
    ResolvedSpan,
    ThreadNode,
    WholeDocument,
    make_fragment,
    resolve_anchor,
)
from .awareness import Availability, AwarenessHub, JoinSummary, RosterEntry, Session
from .config import ServiceConfig, load_config, parse_config
from .exploitation import (
    CaseMatch,
    CaseQuery,
    ExploitationEngine,
    FeedbackRecord,
    Recommendation,
    RetrievalWeights,
)
from .fixtures import seed_fixture
from .model import Actor, DecisionProblem, Document, EIPhase, Role, Stake, TemporalStamp
from .repository import (
    AwarenessEvent,
    KnowledgeResource,
    KRKind,
    KRStatus,
    Repository,
    RepositoryState,
)
from .service import KnowledgeService

__version__ = "0.1.0"

__all__ = [
    "Actor",
    "Anchor",
    "Annotation",
    "AttributePair",
    "Availability",
    "AwarenessEvent",
    "AwarenessHub",
    "CaseMatch",
    "CaseQuery",
    "ContextQuote",
    "DecisionProblem",
    "Document",
    "EIPhase",
    "ExploitationEngine",
    "FeedbackRecord",
    "FragmentLocator",
    "JoinSummary",
    "KRKind",
    "KRStatus",
    "KnowledgeResource",
    "KnowledgeService",
    "Recommendation",
    "Repository",
    "RepositoryState",
    "ResolvedSpan",
    "RetrievalWeights",
    "Role",
    "RosterEntry",
    "ServiceConfig",
    "Session",
    "Stake",
    "TemporalStamp",
    "ThreadNode",
    "WholeDocument",
    "load_config",
    "make_fragment",
    "parse_config",
    "resolve_anchor",
    "seed_fixture",
    "__version__",
]
