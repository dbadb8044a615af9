"""Grouping of an annotator's mentions into entities.

Two mentions belong to the same entity when they are connected under the
transitive closure of (a) identical normalized surface text or (b) a shared
entity_id / explicit coreference link. An entity is only protected when all
of its mentions are masked, so the identifier class of a mixed entity is the
most severe one among its mentions.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .model import ENTITY_TYPES, AnnotationSet, Document, EntityMention, mention_tokens

_SEVERITY = {"DIRECT": 2, "QUASI": 1, "NO_MASK": 0}


def normalize_surface(text: str) -> str:
    """Whitespace-collapsed, case-sensitive form used for exact string matching.

    Case folding is deliberately avoided: two spans differing only in case
    ("May" the month vs. "MAY" a code) may denote distinct entities.
    """
    return " ".join(text.split())


@dataclass(frozen=True)
class Entity:
    """A group of coreferent mentions by one annotator in one document."""

    entity_key: str
    mentions: tuple[EntityMention, ...]
    token_set: frozenset[int]
    identifier_class: str
    entity_type: str


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def mention_partition(annotation: AnnotationSet) -> list[list[EntityMention]]:
    """Partition an annotation set's mentions into coreference groups.

    Order-independent: the result is sorted by each group's smallest
    (start_offset, end_offset, mention_id), and mentions within a group
    keep document order.
    """
    mentions = list(annotation.mentions)
    uf = _UnionFind(len(mentions))

    by_text: dict[str, int] = {}
    by_entity_id: dict[str, int] = {}
    by_mention_id: dict[str, int] = {}
    for i, m in enumerate(mentions):
        key = normalize_surface(m.span_text)
        if key in by_text:
            uf.union(i, by_text[key])
        else:
            by_text[key] = i
        if m.entity_id:
            if m.entity_id in by_entity_id:
                uf.union(i, by_entity_id[m.entity_id])
            else:
                by_entity_id[m.entity_id] = i
        by_mention_id[m.mention_id] = i

    for left, right in annotation.relations:
        if left in by_mention_id and right in by_mention_id:
            uf.union(by_mention_id[left], by_mention_id[right])

    groups: dict[int, list[int]] = {}
    for i in range(len(mentions)):
        groups.setdefault(uf.find(i), []).append(i)

    def sort_key(m: EntityMention) -> tuple[int, int, str]:
        return (m.start_offset, m.end_offset, m.mention_id)

    result = [sorted((mentions[i] for i in members), key=sort_key)
              for members in groups.values()]
    result.sort(key=lambda group: sort_key(group[0]))
    return result


def _dominant_type(group: list[EntityMention]) -> str:
    counts = Counter(m.entity_type for m in group)
    best = max(counts.values())
    # Ties broken by the fixed inventory order.
    for entity_type in ENTITY_TYPES:
        if counts.get(entity_type) == best:
            return entity_type
    return group[0].entity_type


def group_entities(doc: Document, annotator: str) -> list[Entity]:
    """Group one annotator's mentions on a document into entities."""
    annotation = doc.annotations[annotator]
    entities = []
    for group in mention_partition(annotation):
        token_set: frozenset[int] = frozenset()
        for m in group:
            token_set |= mention_tokens(doc, m)
        identifier_class = max((m.identifier_type for m in group),
                               key=lambda t: _SEVERITY.get(t, -1))
        entities.append(Entity(
            entity_key=group[0].mention_id,
            mentions=tuple(group),
            token_set=token_set,
            identifier_class=identifier_class,
            entity_type=_dominant_type(group),
        ))
    return entities


def identifier_partition(
    entities: list[Entity],
) -> tuple[list[Entity], list[Entity], list[Entity]]:
    """Split entities into (direct, quasi, unmasked) by identifier class."""
    direct = [e for e in entities if e.identifier_class == "DIRECT"]
    quasi = [e for e in entities if e.identifier_class == "QUASI"]
    unmasked = [e for e in entities if e.identifier_class not in ("DIRECT", "QUASI")]
    return direct, quasi, unmasked
