"""Inter-annotator agreement statistics.

Items can be built per span (keyed by exact offsets, or by start offset only
for partial matching) or per character (where every character of the document
is an item and uncovered characters carry the O label). Agreement is then
summarized as average observed agreement, Fleiss' kappa and Krippendorff's
alpha; explicit coreference decisions are compared with Cohen's kappa.

Chance-corrected statistics return None when the distribution is degenerate
(expected agreement 1 / expected disagreement 0) instead of an arbitrary
conventional value.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .corpus import Corpus
from .entities import mention_partition
from .errors import FewerThanTwoAnnotators, NoComparableItems
from .model import Document, EntityMention

ANNOTATION_KINDS = ("entity_type", "identifier_type", "confidential_status")
OUTSIDE_LABEL = "O"


@dataclass(frozen=True, eq=False)
class AgreementItem:
    unit: str
    match_mode: str
    key: tuple
    labels: dict[str, str]


def _mention_sort_key(m: EntityMention) -> tuple[int, int, str]:
    return (m.start_offset, m.end_offset, m.mention_id)


def _trimmed_offsets(doc: Document, m: EntityMention) -> tuple[int, int]:
    start, end = m.start_offset, m.end_offset
    while start < end and doc.text[start].isspace():
        start += 1
    while end > start and doc.text[end - 1].isspace():
        end -= 1
    return start, end


def _build_span_items(doc: Document, kind: str, match_mode: str,
                      trim: bool) -> tuple[list[AgreementItem], int]:
    """Span items pooled over annotators; returns (items, key collisions).

    When one annotator has two spans mapping to the same key (possible under
    partial matching, where only start offsets are compared), the span that
    comes first in (start, end, mention_id) order is kept and the collision
    is counted so it can be flagged in the report.
    """
    labels_by_key: dict[tuple, dict[str, str]] = {}
    collisions = 0
    for annotator in sorted(doc.annotations):
        mentions = sorted(doc.annotations[annotator].mentions, key=_mention_sort_key)
        for m in mentions:
            start, end = (_trimmed_offsets(doc, m) if trim
                          else (m.start_offset, m.end_offset))
            key = (doc.doc_id, start) if match_mode == "partial" else (doc.doc_id, start, end)
            labels = labels_by_key.setdefault(key, {})
            if annotator in labels:
                collisions += 1
                continue
            labels[annotator] = getattr(m, kind)
    unit = "span_trimmed" if trim else "span"
    items = [AgreementItem(unit, match_mode, key, labels)
             for key, labels in sorted(labels_by_key.items())]
    return items, collisions


def _build_character_items(doc: Document, kind: str) -> list[AgreementItem]:
    annotators = sorted(doc.annotations)
    n = len(doc.text)
    painted: dict[str, list[str]] = {}
    for annotator in annotators:
        row = [OUTSIDE_LABEL] * n
        # Painting in reverse sort order makes the first-sorted mention win
        # wherever spans of one annotator overlap.
        for m in sorted(doc.annotations[annotator].mentions,
                        key=_mention_sort_key, reverse=True):
            label = getattr(m, kind)
            for i in range(max(m.start_offset, 0), min(m.end_offset, n)):
                row[i] = label
        painted[annotator] = row
    return [
        AgreementItem("character", "exact", (doc.doc_id, pos),
                      {a: painted[a][pos] for a in annotators})
        for pos in range(n)
    ]


def build_items(doc: Document, kind: str, unit: str = "span",
                match_mode: str = "exact", trim: bool = False) -> list[AgreementItem]:
    """Agreement items for one document.

    kind is the compared attribute (entity_type, identifier_type or
    confidential_status); unit is span or character. Partial matching
    applies to spans only.
    """
    if kind not in ANNOTATION_KINDS:
        raise ValueError(f"unknown annotation kind {kind!r}")
    if len(doc.annotations) < 2:
        raise FewerThanTwoAnnotators(
            f"document {doc.doc_id!r} has {len(doc.annotations)} annotator(s)"
        )
    if unit == "character":
        if match_mode != "exact":
            raise ValueError("partial matching is undefined for character units")
        return _build_character_items(doc, kind)
    if unit != "span":
        raise ValueError(f"unknown unit {unit!r}")
    if match_mode not in ("exact", "partial"):
        raise ValueError(f"unknown match mode {match_mode!r}")
    items, _ = _build_span_items(doc, kind, match_mode, trim)
    return items


def observed_agreement(items: list[AgreementItem]) -> float:
    """Mean over items of the proportion of agreeing annotator pairs."""
    proportions = []
    for item in items:
        labels = list(item.labels.values())
        if len(labels) < 2:
            continue
        pairs = 0
        agreeing = 0
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                pairs += 1
                agreeing += labels[i] == labels[j]
        proportions.append(agreeing / pairs)
    if not proportions:
        raise NoComparableItems("no item carries two or more labels")
    return math.fsum(proportions) / len(proportions)


def _fleiss_stratum(label_lists: list[list[str]], n_raters: int) -> float | None:
    categories = sorted({label for labels in label_lists for label in labels})
    if len(categories) < 2:
        return None
    n_items = len(label_lists)
    p_i_sum = 0.0
    totals = Counter()
    for labels in label_lists:
        counts = Counter(labels)
        totals.update(counts)
        p_i_sum += (sum(c * c for c in counts.values()) - n_raters) / (
            n_raters * (n_raters - 1))
    p_bar = p_i_sum / n_items
    grand_total = n_items * n_raters
    p_e = math.fsum((totals[c] / grand_total) ** 2 for c in categories)
    return (p_bar - p_e) / (1.0 - p_e)


def fleiss_kappa(items: list[AgreementItem]) -> float | None:
    """Fleiss' kappa, generalized to variable rater counts.

    Items are grouped into strata by how many annotators labeled them, the
    classic fixed-rater formula is applied within each stratum, and the
    strata are combined by an item-weighted average. Strata where all labels
    coincide in a single category (expected agreement 1) are undefined and
    carry no weight; the result is None when every stratum is degenerate.
    """
    strata: dict[int, list[list[str]]] = {}
    for item in items:
        labels = sorted(item.labels.values())
        if len(labels) >= 2:
            strata.setdefault(len(labels), []).append(labels)
    if not strata:
        raise NoComparableItems("no item carries two or more labels")
    weighted = 0.0
    weight_total = 0
    for n_raters in sorted(strata):
        label_lists = strata[n_raters]
        kappa = _fleiss_stratum(label_lists, n_raters)
        if kappa is not None:
            weighted += len(label_lists) * kappa
            weight_total += len(label_lists)
    if weight_total == 0:
        return None
    return weighted / weight_total


def krippendorff_alpha(items: list[AgreementItem]) -> float | None:
    """Krippendorff's alpha with the nominal distance.

    Items labeled by a single annotator are unpairable and contribute
    nothing to the observed disagreement. Returns None when the expected
    disagreement is zero (fewer than two pairable values, or a single
    category everywhere).
    """
    units = [sorted(item.labels.values()) for item in items if len(item.labels) >= 2]
    if not units:
        raise NoComparableItems("no item carries two or more labels")
    n_pairable = sum(len(u) for u in units)
    totals = Counter()
    d_o_sum = 0.0
    for values in units:
        counts = Counter(values)
        totals.update(counts)
        m_u = len(values)
        disagreements = sum(
            counts[a] * counts[b] for a in counts for b in counts if a != b
        )
        d_o_sum += disagreements / (m_u - 1)
    d_o = d_o_sum / n_pairable
    d_e_sum = sum(totals[a] * totals[b] for a in totals for b in totals if a != b)
    if n_pairable < 2 or d_e_sum == 0:
        return None
    d_e = d_e_sum / (n_pairable * (n_pairable - 1))
    return 1.0 - d_o / d_e


def cohen_kappa(pairs: list[tuple[str, str]]) -> float | None:
    """Two-rater chance-corrected agreement over labeled pairs."""
    if not pairs:
        raise NoComparableItems("no labeled pairs")
    n = len(pairs)
    agree = sum(a == b for a, b in pairs)
    first = Counter(a for a, _ in pairs)
    second = Counter(b for _, b in pairs)
    expected = sum(first[c] * second.get(c, 0) for c in first)
    if expected == n * n:
        return None
    return (n * agree - expected) / (n * n - expected)


def _shared_exact_spans(doc: Document, a1: str, a2: str) -> list[tuple[int, int]]:
    def spans_of(annotator: str) -> dict[tuple[int, int], EntityMention]:
        result: dict[tuple[int, int], EntityMention] = {}
        for m in sorted(doc.annotations[annotator].mentions, key=_mention_sort_key):
            result.setdefault((m.start_offset, m.end_offset), m)
        return result

    spans1 = spans_of(a1)
    spans2 = spans_of(a2)
    return sorted(set(spans1) & set(spans2))


def _linked_lookup(doc: Document, annotator: str) -> dict[tuple[int, int], int]:
    """Map each mention span to the index of its coreference group."""
    lookup: dict[tuple[int, int], int] = {}
    for group_index, group in enumerate(mention_partition(doc.annotations[annotator])):
        for m in group:
            lookup.setdefault((m.start_offset, m.end_offset), group_index)
    return lookup


def relation_pairs(docs: list[Document]) -> list[tuple[str, str]]:
    """Linked / not-linked decisions over mention pairs shared by two annotators.

    For every document and every unordered pair of its annotators, the items
    are all unordered pairs of mention spans both annotators marked with
    identical offsets; each side labels a pair LINKED when its two mentions
    fall in the same coreference group for that annotator.
    """
    pairs: list[tuple[str, str]] = []
    comparable_doc = False
    for doc in docs:
        annotators = sorted(doc.annotations)
        if len(annotators) < 2:
            continue
        comparable_doc = True
        for i in range(len(annotators)):
            for j in range(i + 1, len(annotators)):
                a1, a2 = annotators[i], annotators[j]
                shared = _shared_exact_spans(doc, a1, a2)
                groups1 = _linked_lookup(doc, a1)
                groups2 = _linked_lookup(doc, a2)
                for s in range(len(shared)):
                    for t in range(s + 1, len(shared)):
                        linked1 = groups1[shared[s]] == groups1[shared[t]]
                        linked2 = groups2[shared[s]] == groups2[shared[t]]
                        pairs.append(("LINKED" if linked1 else "NOT",
                                      "LINKED" if linked2 else "NOT"))
    if not comparable_doc:
        raise FewerThanTwoAnnotators("no document has two or more annotators")
    return pairs


def cohen_kappa_relations(docs: list[Document]) -> float | None:
    """Cohen's kappa over coreference decisions on shared mention pairs."""
    pairs = relation_pairs(docs)
    if not pairs:
        raise NoComparableItems("no shared mention pairs between annotators")
    return cohen_kappa(pairs)


@dataclass(frozen=True)
class DisagreementTables:
    """Counts of label mismatches on exactly matching spans.

    A given kind of mismatch on a given span is counted once, however many
    annotator pairs exhibit it. Identifier mismatches are tallied only where
    both annotators agree on the entity type, and are factored by that type.
    """

    entity_type_confusion: dict[tuple[str, str], int]
    identifier_confusion: dict[str, dict[tuple[str, str], int]]


def disagreement_tables(corpus: Corpus) -> DisagreementTables:
    type_confusion: set[tuple] = set()
    identifier_confusion: set[tuple] = set()
    for doc in corpus.documents:
        annotators = sorted(doc.annotations)
        if len(annotators) < 2:
            continue
        by_annotator = {
            a: {(m.start_offset, m.end_offset): m
                for m in sorted(doc.annotations[a].mentions,
                                key=_mention_sort_key, reverse=True)}
            for a in annotators
        }
        for i in range(len(annotators)):
            for j in range(i + 1, len(annotators)):
                spans1 = by_annotator[annotators[i]]
                spans2 = by_annotator[annotators[j]]
                for span in set(spans1) & set(spans2):
                    m1, m2 = spans1[span], spans2[span]
                    if m1.entity_type != m2.entity_type:
                        pair = tuple(sorted((m1.entity_type, m2.entity_type)))
                        type_confusion.add((doc.doc_id, span, pair))
                    elif m1.identifier_type != m2.identifier_type:
                        pair = tuple(sorted((m1.identifier_type, m2.identifier_type)))
                        identifier_confusion.add((doc.doc_id, span, m1.entity_type, pair))

    type_table: dict[tuple[str, str], int] = {}
    for _, _, pair in type_confusion:
        type_table[pair] = type_table.get(pair, 0) + 1
    identifier_table: dict[str, dict[tuple[str, str], int]] = {}
    for _, _, entity_type, pair in identifier_confusion:
        table = identifier_table.setdefault(entity_type, {})
        table[pair] = table.get(pair, 0) + 1
    return DisagreementTables(type_table, identifier_table)


@dataclass(frozen=True)
class AgreementRow:
    kind: str
    unit: str
    match_mode: str
    n_items: int
    n_comparable: int
    key_collisions: int
    aoa: float | None
    fleiss_kappa: float | None
    krippendorff_alpha: float | None

    def as_dict(self) -> dict:
        return {
            "kind": self.kind, "unit": self.unit, "match_mode": self.match_mode,
            "n_items": self.n_items, "n_comparable": self.n_comparable,
            "key_collisions": self.key_collisions, "aoa": self.aoa,
            "fleiss_kappa": self.fleiss_kappa,
            "krippendorff_alpha": self.krippendorff_alpha,
        }


@dataclass(frozen=True)
class AgreementReport:
    rows: tuple[AgreementRow, ...]
    relations_kappa: float | None
    n_relation_pairs: int
    disagreements: DisagreementTables

    def as_dict(self) -> dict:
        return {
            "rows": [row.as_dict() for row in self.rows],
            "relations_cohen_kappa": self.relations_kappa,
            "n_relation_pairs": self.n_relation_pairs,
            "entity_type_confusion": [
                {"first": a, "second": b, "count": count}
                for (a, b), count in sorted(self.disagreements.entity_type_confusion.items())
            ],
            "identifier_confusion": [
                {"entity_type": entity_type, "first": a, "second": b, "count": count}
                for entity_type, table in sorted(self.disagreements.identifier_confusion.items())
                for (a, b), count in sorted(table.items())
            ],
        }


def _pooled_row(docs: list[Document], kind: str, unit: str, match_mode: str,
                trim: bool = False) -> AgreementRow:
    items: list[AgreementItem] = []
    collisions = 0
    for doc in docs:
        if unit == "character":
            items.extend(_build_character_items(doc, kind))
        else:
            doc_items, doc_collisions = _build_span_items(doc, kind, match_mode, trim)
            items.extend(doc_items)
            collisions += doc_collisions
    comparable = sum(1 for item in items if len(item.labels) >= 2)
    if comparable == 0:
        aoa = kappa = alpha = None
    else:
        aoa = observed_agreement(items)
        kappa = fleiss_kappa(items)
        alpha = krippendorff_alpha(items)
    return AgreementRow(
        kind=kind, unit="span_trimmed" if trim else unit, match_mode=match_mode,
        n_items=len(items), n_comparable=comparable, key_collisions=collisions,
        aoa=aoa, fleiss_kappa=kappa, krippendorff_alpha=alpha,
    )


def corpus_agreement(corpus: Corpus, kinds=ANNOTATION_KINDS,
                     include_characters: bool = True,
                     include_trimmed: bool = True) -> AgreementReport:
    """Agreement report pooled over all multi-annotator documents."""
    docs = [doc for doc in corpus.documents if len(doc.annotations) >= 2]
    if not docs:
        raise FewerThanTwoAnnotators("no document has two or more annotators")

    rows: list[AgreementRow] = []
    for kind in kinds:
        rows.append(_pooled_row(docs, kind, "span", "exact"))
        rows.append(_pooled_row(docs, kind, "span", "partial"))
        if include_trimmed:
            rows.append(_pooled_row(docs, kind, "span", "exact", trim=True))
            rows.append(_pooled_row(docs, kind, "span", "partial", trim=True))
        if include_characters:
            rows.append(_pooled_row(docs, kind, "character", "exact"))

    try:
        pairs = relation_pairs(docs)
    except FewerThanTwoAnnotators:
        pairs = []
    relations_kappa = cohen_kappa(pairs) if pairs else None

    return AgreementReport(
        rows=tuple(rows),
        relations_kappa=relations_kappa,
        n_relation_pairs=len(pairs),
        disagreements=disagreement_tables(corpus),
    )
