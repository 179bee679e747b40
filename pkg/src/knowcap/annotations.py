"""Anchored attribute-value annotations.

An annotation is a free-text note plus user-defined attribute/value pairs,
tied to a target at either whole-document or fragment granularity.  Targets
may be documents or other annotations (an annotation can itself be annotated,
so threads and reuse chains grow without bound).

Fragment anchors store character offsets plus a context quote (up to
CONTEXT_WINDOW characters either side of the exact text).  When a document
has been edited the offsets are relocated by searching for
prefix + exact + suffix in the current content; if the quote can no longer
be found the annotation is reported orphaned, never deleted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DanglingAnchor, EmptyAnnotation, EmptyField, InvalidFragment, Orphaned, QuoteMismatch
from .model import TemporalStamp

# Characters of context captured on each side of the exact quote.  Fixed so
# that re-anchoring is deterministic across writers.
CONTEXT_WINDOW = 32

TARGET_DOCUMENT = "document"
TARGET_ANNOTATION = "annotation"


@dataclass(frozen=True)
class ContextQuote:
    prefix: str
    exact: str
    suffix: str


@dataclass(frozen=True)
class FragmentLocator:
    """Pinpoints a character span inside the target's text body.

    ``segment_path`` addresses structural segments; plain-text bodies have
    only the root segment, so the path must be empty here.
    """

    start_offset: int
    end_offset: int
    context_quote: ContextQuote
    segment_path: tuple[int, ...] = ()

    def __post_init__(self):
        if self.start_offset < 0 or self.end_offset <= self.start_offset:
            raise InvalidFragment(
                f"offsets ({self.start_offset}, {self.end_offset}) violate 0 <= start < end"
            )
        if not self.context_quote.exact:
            raise InvalidFragment("exact quote must be non-empty")
        if len(self.context_quote.prefix) > CONTEXT_WINDOW or len(self.context_quote.suffix) > CONTEXT_WINDOW:
            raise InvalidFragment(f"context quote sides are capped at {CONTEXT_WINDOW} characters")
        if self.segment_path:
            raise InvalidFragment("plain-text targets have no structural segments")

    def matches_at_offsets(self, content: str) -> bool:
        return content[self.start_offset : self.end_offset] == self.context_quote.exact


def make_fragment(content: str, start_offset: int, end_offset: int) -> FragmentLocator:
    """Build a locator for content[start:end], capturing the context quote."""
    if start_offset < 0 or end_offset <= start_offset:
        raise InvalidFragment(f"offsets ({start_offset}, {end_offset}) violate 0 <= start < end")
    if end_offset > len(content):
        raise InvalidFragment(f"end offset {end_offset} beyond content length {len(content)}")
    quote = ContextQuote(
        prefix=content[max(0, start_offset - CONTEXT_WINDOW) : start_offset],
        exact=content[start_offset:end_offset],
        suffix=content[end_offset : end_offset + CONTEXT_WINDOW],
    )
    return FragmentLocator(start_offset=start_offset, end_offset=end_offset, context_quote=quote)


@dataclass(frozen=True)
class Anchor:
    """Whole-target anchor when ``fragment`` is None, fine-grain otherwise."""

    target_kind: str  # TARGET_DOCUMENT | TARGET_ANNOTATION
    target: str  # doc_uri or annotation_id
    fragment: FragmentLocator | None = None

    def __post_init__(self):
        if self.target_kind not in (TARGET_DOCUMENT, TARGET_ANNOTATION):
            raise InvalidFragment(f"unknown anchor target kind {self.target_kind!r}")


@dataclass(frozen=True)
class AttributePair:
    attribute: str  # stored verbatim; queries fold case and trim
    value: str

    def __post_init__(self):
        if not self.attribute.strip():
            raise EmptyField("attribute key must be non-empty")

    @property
    def folded_key(self) -> str:
        return self.attribute.strip().lower()


@dataclass(frozen=True)
class Annotation:
    annotation_id: str
    author: str
    t_a: TemporalStamp
    anchor: Anchor
    body: str
    attributes: tuple[AttributePair, ...]
    dp_id: str
    parent: str | None = None  # thread reply
    derived_from: str | None = None  # reuse lineage


@dataclass(frozen=True)
class ResolvedSpan:
    start_offset: int
    end_offset: int


@dataclass(frozen=True)
class WholeDocument:
    """Resolution result for coarse-grain anchors."""


def require_content(body: str, attributes: tuple[AttributePair, ...] | list[AttributePair]) -> None:
    if not body and not attributes:
        raise EmptyAnnotation("annotation needs a body or at least one attribute")


def validate_fragment_against(fragment: FragmentLocator, content: str) -> None:
    """Creation-time fidelity check: exact must equal the slice it points at."""
    if fragment.end_offset > len(content) or not fragment.matches_at_offsets(content):
        found = content[fragment.start_offset : fragment.end_offset]
        raise QuoteMismatch(
            f"exact quote {fragment.context_quote.exact!r} != target text {found!r} at "
            f"({fragment.start_offset}, {fragment.end_offset})"
        )


def _occurrences(haystack: str, needle: str) -> list[int]:
    positions = []
    pos = haystack.find(needle)
    while pos != -1:
        positions.append(pos)
        pos = haystack.find(needle, pos + 1)
    return positions


def resolve_anchor(anchor: Anchor, current_content: str) -> ResolvedSpan | WholeDocument:
    """Locate the anchored span in the target's current text.

    Original offsets win if the exact quote still sits there; otherwise the
    span is relocated by searching for prefix+exact+suffix, preferring the
    match nearest the original start offset (ties resolve to the earlier
    position).  Raises Orphaned when the quote cannot be found at all.
    """
    fragment = anchor.fragment
    if fragment is None:
        return WholeDocument()
    if fragment.end_offset <= len(current_content) and fragment.matches_at_offsets(current_content):
        return ResolvedSpan(fragment.start_offset, fragment.end_offset)

    quote = fragment.context_quote
    needle = quote.prefix + quote.exact + quote.suffix
    starts = [pos + len(quote.prefix) for pos in _occurrences(current_content, needle)]
    if not starts:
        raise Orphaned(f"context quote for span ({fragment.start_offset}, {fragment.end_offset}) not found")
    best = min(starts, key=lambda s: (abs(s - fragment.start_offset), s))
    return ResolvedSpan(best, best + len(quote.exact))


def anchor_to_payload(anchor: Anchor) -> dict:
    payload: dict = {"target_kind": anchor.target_kind, "target": anchor.target, "fragment": None}
    if anchor.fragment is not None:
        f = anchor.fragment
        payload["fragment"] = {
            "start_offset": f.start_offset,
            "end_offset": f.end_offset,
            "segment_path": list(f.segment_path),
            "prefix": f.context_quote.prefix,
            "exact": f.context_quote.exact,
            "suffix": f.context_quote.suffix,
        }
    return payload


def anchor_from_payload(payload: dict) -> Anchor:
    fragment = None
    if payload.get("fragment") is not None:
        f = payload["fragment"]
        fragment = FragmentLocator(
            start_offset=f["start_offset"],
            end_offset=f["end_offset"],
            context_quote=ContextQuote(prefix=f["prefix"], exact=f["exact"], suffix=f["suffix"]),
            segment_path=tuple(f.get("segment_path", ())),
        )
    return Anchor(target_kind=payload["target_kind"], target=payload["target"], fragment=fragment)


def attributes_to_payload(attributes: tuple[AttributePair, ...] | list[AttributePair]) -> list[list[str]]:
    return [[pair.attribute, pair.value] for pair in attributes]


def attributes_from_payload(payload: list) -> tuple[AttributePair, ...]:
    return tuple(AttributePair(attribute=key, value=value) for key, value in payload)


@dataclass
class ThreadNode:
    annotation: Annotation
    children: list["ThreadNode"] = field(default_factory=list)

    def size(self) -> int:
        return 1 + sum(child.size() for child in self.children)


def build_thread(
    root_id: str,
    annotations: dict[str, Annotation],
    children_index: dict[str, list[str]],
) -> ThreadNode:
    """Root plus all transitive follow-ups, children ordered by t_a ascending."""
    if root_id not in annotations:
        raise DanglingAnchor(f"annotation {root_id} does not exist")

    def node_for(ann_id: str) -> ThreadNode:
        child_ids = sorted(children_index.get(ann_id, ()), key=lambda cid: annotations[cid].t_a.seq)
        return ThreadNode(annotations[ann_id], [node_for(cid) for cid in child_ids])

    return node_for(root_id)


def reuse_lineage(leaf_id: str, annotations: dict[str, Annotation]) -> list[Annotation]:
    """Walk derived_from links from a leaf back to the original."""
    if leaf_id not in annotations:
        raise DanglingAnchor(f"annotation {leaf_id} does not exist")
    chain = []
    current: str | None = leaf_id
    while current is not None:
        ann = annotations[current]
        chain.append(ann)
        current = ann.derived_from
    return chain
