"""Document model: texts, annotated entity mentions, tokenization, offset algebra.

Offsets throughout are Unicode code-point indices into the document text,
with [start, end) slice semantics. All types are immutable after
construction and safe to share across workers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import EmptyMention, MentionOutsideText

ENTITY_TYPES = ("PERSON", "CODE", "LOC", "ORG", "DEM", "DATETIME", "QUANTITY", "MISC")
IDENTIFIER_TYPES = ("DIRECT", "QUASI", "NO_MASK")
CONFIDENTIAL_STATUSES = ("NOT_CONFIDENTIAL", "BELIEF", "POLITICS", "SEX", "ETHNIC", "HEALTH")
SPLITS = ("train", "dev", "test", "unassigned")

# Tokenization rules are a published contract: token-indexed files produced by
# other processes carry this fingerprint so both sides can prove they agree on
# token indexing. Bump the version string whenever the rules change.
TOKENIZER_RULES = (
    "maximal runs of Unicode alphanumeric characters form one token; "
    "every other non-whitespace character is a single-character token; "
    "whitespace separates tokens; v1"
)
TOKENIZER_FINGERPRINT = hashlib.sha256(TOKENIZER_RULES.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class TokenSpan:
    """One token: its 0-based index and [start, end) character range."""

    index: int
    start: int
    end: int


@dataclass(frozen=True)
class EntityMention:
    """A single annotated text span.

    entity_id is the annotator-assigned group key connecting mentions of the
    same underlying entity; grouping itself lives in the entities module.
    """

    mention_id: str
    entity_type: str
    start_offset: int
    end_offset: int
    span_text: str
    identifier_type: str
    confidential_status: str = "NOT_CONFIDENTIAL"
    entity_id: str = ""


@dataclass(frozen=True)
class AnnotationSet:
    """All mentions (and optional explicit coreference links) of one annotator."""

    annotator: str
    mentions: tuple[EntityMention, ...]
    relations: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Document:
    """A document plus the per-annotator annotation sets attached to it."""

    doc_id: str
    text: str
    split: str = "unassigned"
    person_to_protect: str | None = None
    annotations: Mapping[str, AnnotationSet] = field(default_factory=dict)

    def annotators(self) -> list[str]:
        return sorted(self.annotations)

    def tokens(self) -> tuple[TokenSpan, ...]:
        return tokenize(self.text)

    def num_tokens(self) -> int:
        return len(self.tokens())


@lru_cache(maxsize=512)
def tokenize(text: str) -> tuple[TokenSpan, ...]:
    """Split text into tokens.

    Maximal runs of alphanumeric characters form one token; every other
    non-whitespace character becomes its own single-character token.
    Deterministic and language-neutral; no token ever contains whitespace.
    """
    tokens: list[TokenSpan] = []
    run_start = -1
    for i, ch in enumerate(text):
        if ch.isalnum():
            if run_start < 0:
                run_start = i
            continue
        if run_start >= 0:
            tokens.append(TokenSpan(len(tokens), run_start, i))
            run_start = -1
        if not ch.isspace():
            tokens.append(TokenSpan(len(tokens), i, i + 1))
    if run_start >= 0:
        tokens.append(TokenSpan(len(tokens), run_start, len(text)))
    return tuple(tokens)


def span_tokens(tokens: Iterable[TokenSpan], start: int, end: int) -> frozenset[int]:
    """Indices of all tokens whose character range intersects [start, end)."""
    return frozenset(t.index for t in tokens if t.start < end and t.end > start)


def mention_tokens(doc: Document, mention: EntityMention) -> frozenset[int]:
    """Token indices covered by a mention, under the any-overlap rule.

    A token counts as covered as soon as one of its characters lies inside
    the mention span: a partially annotated token still carries identifying
    text, so the conservative reading is the safe one.
    """
    if mention.start_offset < 0 or mention.end_offset > len(doc.text):
        raise MentionOutsideText(
            f"mention {mention.mention_id!r} spans [{mention.start_offset}, "
            f"{mention.end_offset}) but document {doc.doc_id!r} has length {len(doc.text)}"
        )
    covered = span_tokens(doc.tokens(), mention.start_offset, mention.end_offset)
    if not covered:
        raise EmptyMention(
            f"mention {mention.mention_id!r} in document {doc.doc_id!r} covers only whitespace"
        )
    return covered


@dataclass(frozen=True)
class Violation:
    """One broken invariant, reported as data rather than an exception."""

    code: str
    message: str
    doc_id: str
    annotator: str | None = None
    mention_id: str | None = None

    def __str__(self) -> str:
        where = self.doc_id
        if self.annotator:
            where += f"/{self.annotator}"
        if self.mention_id:
            where += f"/{self.mention_id}"
        return f"[{self.code}] {where}: {self.message}"


def validate(doc: Document) -> list[Violation]:
    """Check every model invariant on a document; empty list iff well-formed."""
    violations: list[Violation] = []
    n = len(doc.text)

    if doc.split not in SPLITS:
        violations.append(
            Violation("UnknownSplit", f"split {doc.split!r} not one of {SPLITS}", doc.doc_id)
        )

    for annotator in sorted(doc.annotations):
        ann = doc.annotations[annotator]
        seen_ids: set[str] = set()
        for m in ann.mentions:
            if m.mention_id in seen_ids:
                violations.append(
                    Violation("DuplicateMentionId", f"mention_id {m.mention_id!r} repeats",
                              doc.doc_id, annotator, m.mention_id)
                )
            seen_ids.add(m.mention_id)

            if m.start_offset >= m.end_offset:
                violations.append(
                    Violation("InvalidSpan",
                              f"start {m.start_offset} not before end {m.end_offset}",
                              doc.doc_id, annotator, m.mention_id)
                )
                continue
            if m.start_offset < 0 or m.end_offset > n:
                violations.append(
                    Violation("OffsetOutOfRange",
                              f"[{m.start_offset}, {m.end_offset}) outside text of length {n}",
                              doc.doc_id, annotator, m.mention_id)
                )
                continue
            actual = doc.text[m.start_offset:m.end_offset]
            if m.span_text != actual:
                violations.append(
                    Violation("SpanTextMismatch",
                              f"span_text {m.span_text!r} != text slice {actual!r}",
                              doc.doc_id, annotator, m.mention_id)
                )
            if actual.strip() == "":
                violations.append(
                    Violation("WhitespaceOnlySpan", "span covers only whitespace",
                              doc.doc_id, annotator, m.mention_id)
                )
            if m.entity_type not in ENTITY_TYPES:
                violations.append(
                    Violation("UnknownEntityType", f"entity_type {m.entity_type!r}",
                              doc.doc_id, annotator, m.mention_id)
                )
            if m.identifier_type not in IDENTIFIER_TYPES:
                violations.append(
                    Violation("UnknownIdentifierType", f"identifier_type {m.identifier_type!r}",
                              doc.doc_id, annotator, m.mention_id)
                )
            if m.confidential_status not in CONFIDENTIAL_STATUSES:
                violations.append(
                    Violation("UnknownConfidentialStatus",
                              f"confidential_status {m.confidential_status!r}",
                              doc.doc_id, annotator, m.mention_id)
                )

        known = {m.mention_id for m in ann.mentions}
        for left, right in ann.relations:
            for endpoint in (left, right):
                if endpoint not in known:
                    violations.append(
                        Violation("DanglingRelation",
                                  f"relation endpoint {endpoint!r} matches no mention",
                                  doc.doc_id, annotator)
                    )
    return violations
