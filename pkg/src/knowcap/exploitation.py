"""Exploitation of the knowledge repository.

Four read paths over capitalized knowledge: explore the attribute vocabulary
actors have invented, query newest-version resources case-style (author role
is the dominant case key, workflow phase and free terms refine), analyze
aggregate indicators and the growth trend, and recommend resources through
item-based collaborative filtering over actor feedback.

Scoring and ranking are fully deterministic: fixed tokenization (lowercase,
split on non-alphanumeric runs, no stemming), explicit tie-breaks (newest
stamp, then lineage id), and a documented weighted sum whose components are
reported with every match.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any

from .errors import EmptyQuery, RatingOutOfRange, UnknownActor, UnknownLineage, UnknownProblem
from .model import EIPhase, Role, TemporalStamp
from .repository import KnowledgeResource, KRKind, Repository, RepositoryState

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> set[str]:
    return set(_TOKEN_RE.findall(text.lower()))


# Text fields that participate in term matching, per resource kind.  Anything
# unlisted falls back to every string leaf of the payload.
_TEXT_FIELDS: dict[KRKind, tuple[str, ...]] = {
    KRKind.DECLARATION: ("title", "text"),
    KRKind.STAKE_DEFINITION: ("observed_object", "signal", "hypothesis"),
    KRKind.FEEDBACK: ("comment",),
    KRKind.PHASE_TRANSITION: ("from", "to"),
}


def searchable_text(resource: KnowledgeResource) -> str:
    payload = resource.payload
    if resource.kind is KRKind.ANNOTATION_REF:
        parts = [payload.get("body", "")]
        for key, value in payload.get("attributes", ()):  # attribute text counts
            parts.extend((key, value))
        return " ".join(parts)
    fields = _TEXT_FIELDS.get(resource.kind)
    if fields is not None:
        return " ".join(str(payload.get(f) or "") for f in fields)
    return " ".join(_string_leaves(payload))


def _string_leaves(value: Any) -> list[str]:
    if isinstance(value, str):
        return [value]
    if isinstance(value, dict):
        return [leaf for key in sorted(value) for leaf in _string_leaves(value[key])]
    if isinstance(value, (list, tuple)):
        return [leaf for item in value for leaf in _string_leaves(item)]
    return []


@dataclass(frozen=True)
class RetrievalWeights:
    role: float = 0.5
    phase: float = 0.2
    terms: float = 0.3

    def __post_init__(self):
        if min(self.role, self.phase, self.terms) <= 0:
            raise ValueError("retrieval weights must all be positive")


@dataclass(frozen=True)
class CaseQuery:
    role: Role | None = None
    phase: EIPhase | None = None
    terms: tuple[str, ...] = ()
    dp_scope: str | None = None
    as_of: int | None = None

    def require_criteria(self) -> None:
        if self.role is None and self.phase is None and not self.terms and self.dp_scope is None:
            raise EmptyQuery("query needs at least one of role/phase/terms/dp_scope")


@dataclass(frozen=True)
class MatchBreakdown:
    role_component: float
    phase_component: float
    term_component: float


@dataclass(frozen=True)
class CaseMatch:
    kr: tuple[str, int]
    score: float
    matched_on: MatchBreakdown
    stamp: TemporalStamp


@dataclass(frozen=True)
class VocabularyReport:
    attribute_keys: dict[str, int]
    kinds: dict[str, int]
    actors: dict[str, int]
    phases: dict[str, int]


@dataclass(frozen=True)
class IndicatorReport:
    by_kind: dict[str, int]
    by_status: dict[str, int]
    by_actor: dict[str, int]
    by_phase: dict[str, int]
    versions_per_lineage: dict[int, int]
    evolution: list[tuple[int, int]]  # (seq, cumulative resource count)


@dataclass(frozen=True)
class FeedbackRecord:
    actor: str
    kr: tuple[str, int]
    rating: int
    new_problem: str | None
    comment: str | None
    stamp: TemporalStamp
    feedback_kr: tuple[str, int] = field(default=("", 0))


@dataclass(frozen=True)
class Recommendation:
    kr: tuple[str, int]
    predicted_rating: float | None  # None -> recency fallback entry


def jaccard(terms: set[str], tokens: set[str]) -> float:
    union = terms | tokens
    if not union:
        return 0.0
    return len(terms & tokens) / len(union)


def item_similarity(
    ratings_by_item: dict[tuple[str, int], dict[str, int]],
    item_a: tuple[str, int],
    item_b: tuple[str, int],
    min_co_raters: int = 1,
) -> float:
    """Cosine over the two items' rating vectors, restricted to co-raters."""
    ratings_a = ratings_by_item.get(item_a, {})
    ratings_b = ratings_by_item.get(item_b, {})
    co_raters = sorted(set(ratings_a) & set(ratings_b))
    if len(co_raters) < min_co_raters:
        return 0.0
    dot = sum(ratings_a[a] * ratings_b[a] for a in co_raters)
    norm_a = math.sqrt(sum(ratings_a[a] ** 2 for a in co_raters))
    norm_b = math.sqrt(sum(ratings_b[a] ** 2 for a in co_raters))
    if norm_a == 0 or norm_b == 0:
        return 0.0
    return dot / (norm_a * norm_b)


class ExploitationEngine:
    def __init__(
        self,
        repository: Repository,
        weights: RetrievalWeights = RetrievalWeights(),
        cf_min_co_raters: int = 1,
    ):
        self._repo = repository
        self.weights = weights
        self.cf_min_co_raters = cf_min_co_raters

    # ------------------------------------------------------------------
    # Explore
    # ------------------------------------------------------------------

    def explore(self) -> VocabularyReport:
        with self._repo.lock:
            state = self._repo.state
            attribute_keys: dict[str, int] = {}
            for annotation in state.annotations.values():
                for pair in annotation.attributes:
                    attribute_keys[pair.folded_key] = attribute_keys.get(pair.folded_key, 0) + 1
            kinds: dict[str, int] = {}
            actors: dict[str, int] = {}
            phases: dict[str, int] = {}
            for resource in state.all_versions():
                kinds[resource.kind.value] = kinds.get(resource.kind.value, 0) + 1
                actors[resource.author] = actors.get(resource.author, 0) + 1
                if resource.phase_at_write is not None:
                    phases[resource.phase_at_write.value] = phases.get(resource.phase_at_write.value, 0) + 1
            return VocabularyReport(
                attribute_keys=dict(sorted(attribute_keys.items())),
                kinds=dict(sorted(kinds.items())),
                actors=dict(sorted(actors.items())),
                phases=dict(sorted(phases.items())),
            )

    # ------------------------------------------------------------------
    # Query
    # ------------------------------------------------------------------

    def query(self, q: CaseQuery) -> list[CaseMatch]:
        q.require_criteria()
        if q.as_of is not None:
            state = self._repo.snapshot_at(q.as_of)
            return self._query_state(state, q)
        with self._repo.lock:
            return self._query_state(self._repo.state, q)

    def _query_state(self, state: RepositoryState, q: CaseQuery) -> list[CaseMatch]:
        term_set = {token for term in q.terms for token in tokenize(term)}
        matches = []
        for resource in state.newest_versions():
            if q.dp_scope is not None and resource.dp_id != q.dp_scope:
                continue
            match = score_resource(resource, q, term_set, self.weights)
            if match is not None:
                matches.append(match)
        matches.sort(key=lambda m: (-m.score, -m.stamp.seq, m.kr[0]))
        return matches

    # ------------------------------------------------------------------
    # Analyze
    # ------------------------------------------------------------------

    def analyze(self, dp_scope: str | None = None) -> IndicatorReport:
        with self._repo.lock:
            state = self._repo.state
            if dp_scope is not None and dp_scope not in state.problems:
                raise UnknownProblem(f"no decision problem {dp_scope}")
            rows = [
                r for r in state.all_versions()
                if dp_scope is None or r.dp_id == dp_scope
            ]
            by_kind: dict[str, int] = {}
            by_status: dict[str, int] = {}
            by_actor: dict[str, int] = {}
            by_phase: dict[str, int] = {}
            per_lineage: dict[str, int] = {}
            for r in rows:
                by_kind[r.kind.value] = by_kind.get(r.kind.value, 0) + 1
                by_status[r.status.value] = by_status.get(r.status.value, 0) + 1
                by_actor[r.author] = by_actor.get(r.author, 0) + 1
                if r.phase_at_write is not None:
                    by_phase[r.phase_at_write.value] = by_phase.get(r.phase_at_write.value, 0) + 1
                per_lineage[r.kr_id] = max(per_lineage.get(r.kr_id, 0), r.version)
            distribution: dict[int, int] = {}
            for count in per_lineage.values():
                distribution[count] = distribution.get(count, 0) + 1
            evolution = [
                (r.stamp.seq, i)
                for i, r in enumerate(sorted(rows, key=lambda r: r.stamp.seq), start=1)
            ]
            return IndicatorReport(
                by_kind=dict(sorted(by_kind.items())),
                by_status=dict(sorted(by_status.items())),
                by_actor=dict(sorted(by_actor.items())),
                by_phase=dict(sorted(by_phase.items())),
                versions_per_lineage=dict(sorted(distribution.items())),
                evolution=evolution,
            )

    # ------------------------------------------------------------------
    # Feedback + recommendation
    # ------------------------------------------------------------------

    def record_feedback(
        self,
        actor: str,
        kr: tuple[str, int],
        rating: int,
        new_problem: str | None = None,
        comment: str | None = None,
    ) -> FeedbackRecord:
        """Capitalize a relevance assessment; re-rating supersedes in place."""
        if not isinstance(rating, int) or rating < 1 or rating > 5:
            raise RatingOutOfRange(f"rating {rating!r} outside 1..5")
        with self._repo.lock:
            state = self._repo.state
            target = state.version_row(kr[0], kr[1])  # raises UnknownLineage
            if new_problem is not None and new_problem not in state.problems:
                raise UnknownProblem(f"no decision problem {new_problem}")
            payload = {
                "target": [kr[0], kr[1]],
                "rating": rating,
                "new_problem": new_problem,
                "comment": comment,
            }
            existing = self._find_feedback_lineage(state, actor, kr)
            if existing is None:
                row = self._repo.declare(actor, KRKind.FEEDBACK, payload, dp_id=target.dp_id)
            else:
                row = self._repo.append_version(actor, existing, payload)
            return FeedbackRecord(
                actor=actor, kr=kr, rating=rating, new_problem=new_problem,
                comment=comment, stamp=row.stamp, feedback_kr=row.key,
            )

    def _find_feedback_lineage(self, state: RepositoryState, actor: str, kr: tuple[str, int]) -> str | None:
        for lineage in state.lineages.values():
            if lineage.kind is not KRKind.FEEDBACK:
                continue
            newest = lineage.newest
            if newest.author == actor and tuple(newest.payload["target"]) == kr:
                return lineage.kr_id
        return None

    def live_ratings(self, state: RepositoryState | None = None) -> dict[tuple[str, int], dict[str, int]]:
        """item -> {actor: rating}, using only each feedback lineage's newest version."""
        state = state if state is not None else self._repo.state
        by_item: dict[tuple[str, int], dict[str, int]] = {}
        for lineage in state.lineages.values():
            if lineage.kind is not KRKind.FEEDBACK:
                continue
            newest = lineage.newest
            item = tuple(newest.payload["target"])
            by_item.setdefault(item, {})[newest.author] = newest.payload["rating"]
        return by_item

    def recommend(self, for_actor: str, limit: int) -> list[Recommendation]:
        if limit < 1:
            raise EmptyQuery("limit must be >= 1")
        with self._repo.lock:
            state = self._repo.state
            if for_actor not in state.actors:
                raise UnknownActor(f"no actor {for_actor}")
            ratings_by_item = self.live_ratings(state)
            own = {item: r for item, raters in ratings_by_item.items()
                   for a, r in raters.items() if a == for_actor}
            candidates = [
                r for r in state.newest_versions()
                if r.kind is not KRKind.FEEDBACK and r.key not in own
            ]
            predicted: list[tuple[float, KnowledgeResource]] = []
            fallback: list[KnowledgeResource] = []
            for resource in candidates:
                prediction = self._predict(ratings_by_item, own, resource.key)
                if prediction is None:
                    fallback.append(resource)
                else:
                    predicted.append((prediction, resource))
            predicted.sort(key=lambda pair: (-pair[0], -pair[1].stamp.seq, pair[1].kr_id))
            fallback.sort(key=lambda r: (-r.stamp.seq, r.kr_id))
            ranked = [Recommendation(kr=r.key, predicted_rating=p) for p, r in predicted]
            ranked.extend(Recommendation(kr=r.key, predicted_rating=None) for r in fallback)
            return ranked[:limit]

    def _predict(
        self,
        ratings_by_item: dict[tuple[str, int], dict[str, int]],
        own: dict[tuple[str, int], int],
        item: tuple[str, int],
    ) -> float | None:
        numerator = 0.0
        denominator = 0.0
        for other, rating in own.items():
            if other == item:
                continue
            sim = item_similarity(ratings_by_item, item, other, self.cf_min_co_raters)
            if sim > 0:
                numerator += sim * rating
                denominator += sim
        if denominator == 0:
            return None
        return numerator / denominator


def score_resource(
    resource: KnowledgeResource,
    q: CaseQuery,
    term_set: set[str],
    weights: RetrievalWeights,
) -> CaseMatch | None:
    """Score one resource; None when a present criterion rules it out.

    Present criteria act as filters (their component must be positive) and
    contribute their component to the weighted sum; absent criteria
    contribute a full component of 1.
    """
    if q.role is None:
        role_c = 1.0
    else:
        role_c = 1.0 if resource.author_role == q.role else 0.0
        if role_c == 0.0:
            return None
    if q.phase is None:
        phase_c = 1.0
    else:
        phase_c = 1.0 if resource.phase_at_write == q.phase else 0.0
        if phase_c == 0.0:
            return None
    if not term_set:
        term_c = 1.0
    else:
        term_c = jaccard(term_set, tokenize(searchable_text(resource)))
        if term_c == 0.0:
            return None
    score = weights.role * role_c + weights.phase * phase_c + weights.terms * term_c
    if score == 0.0:
        return None
    return CaseMatch(
        kr=resource.key,
        score=score,
        matched_on=MatchBreakdown(role_component=role_c, phase_component=phase_c, term_component=term_c),
        stamp=resource.stamp,
    )
