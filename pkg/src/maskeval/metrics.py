"""Privacy and utility metrics over system masks.

Privacy is measured at the entity level: an entity counts as protected only
when every token of every one of its mentions is masked, and the counts are
micro-averaged over all (document, annotator) pairs so that entities marked
by several annotators weigh more. Utility is measured as token-level
precision, optionally weighted by each token's information content.

Zero denominators yield an explicit undefined value (value is None), never
a 0 or 1 by convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus
from .entities import group_entities
from .errors import MissingMask, ParseError, SchemaError, TokenizerMismatch
from .ic import UniformIc
from .model import TOKENIZER_FINGERPRINT, Document, span_tokens


@dataclass(frozen=True)
class SystemMask:
    """The token-index set a system chose to mask in one document."""

    doc_id: str
    masked_tokens: frozenset[int]
    masked_spans: tuple[tuple[int, int], ...] | None = None


def mask_from_spans(doc: Document, spans: list[tuple[int, int]]) -> SystemMask:
    """Project character spans onto tokens with the any-overlap rule."""
    tokens = doc.tokens()
    masked: frozenset[int] = frozenset()
    for start, end in spans:
        masked |= span_tokens(tokens, start, end)
    return SystemMask(doc_id=doc.doc_id, masked_tokens=masked,
                      masked_spans=tuple((int(s), int(e)) for s, e in spans))


def mask_from_tokens(doc_id: str, indices) -> SystemMask:
    return SystemMask(doc_id=doc_id, masked_tokens=frozenset(int(i) for i in indices))


def load_masks(path: str | Path, corpus: Corpus) -> dict[str, SystemMask]:
    """Read a system-mask file and bind it to a corpus.

    Two layouts are accepted:
      * simple: {"<doc_id>": [[start, end], ...], ...} with character spans;
      * extended: {"mask_format_version": 1, "unit": "char"|"token",
        "tokenizer_fingerprint": "...", "masks": {...}} where token-unit
        masks list token indices and require a matching fingerprint.

    Mask entries for unknown doc_ids are ignored here; strictness about
    missing entries is applied where the metrics are computed.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), position=exc.pos) from exc
    if not isinstance(data, dict):
        raise SchemaError("mask file must be a JSON object")

    extended_markers = {"masks", "unit", "mask_format_version", "tokenizer_fingerprint"}
    if extended_markers & set(data):
        if "masks" not in data:
            raise SchemaError("extended mask file needs a 'masks' map",
                              field_path="masks")
        unit = data.get("unit", "char")
        entries = data["masks"]
        if unit == "token":
            fingerprint = data.get("tokenizer_fingerprint")
            if fingerprint != TOKENIZER_FINGERPRINT:
                raise TokenizerMismatch(expected=TOKENIZER_FINGERPRINT,
                                        found=str(fingerprint))
        elif unit != "char":
            raise SchemaError(f"unknown unit {unit!r}", field_path="unit")
    else:
        unit = "char"
        entries = data

    if not isinstance(entries, dict):
        raise SchemaError("masks must map doc_id to spans or token indices",
                          field_path="masks")

    by_id = {doc.doc_id: doc for doc in corpus.documents}
    masks: dict[str, SystemMask] = {}
    for doc_id, value in entries.items():
        if doc_id not in by_id:
            continue
        if unit == "token":
            mask = mask_from_tokens(doc_id, value)
            n_tokens = by_id[doc_id].num_tokens()
            invalid = [i for i in sorted(mask.masked_tokens)
                       if i < 0 or i >= n_tokens]
            if invalid:
                raise SchemaError(
                    f"token indices {invalid} invalid for document {doc_id!r} "
                    f"({n_tokens} tokens)", field_path=f"masks.{doc_id}")
            masks[doc_id] = mask
        else:
            try:
                spans = [(int(s), int(e)) for s, e in value]
            except (TypeError, ValueError) as exc:
                raise SchemaError(
                    f"mask entry for {doc_id!r} must list [start, end] pairs",
                    field_path=f"masks.{doc_id}") from exc
            masks[doc_id] = mask_from_spans(by_id[doc_id], spans)
    return masks


@dataclass(frozen=True)
class Ratio:
    """A metric together with the counts it was computed from."""

    numerator: float
    denominator: float

    @property
    def value(self) -> float | None:
        if self.denominator == 0:
            return None
        return self.numerator / self.denominator

    @property
    def defined(self) -> bool:
        return self.denominator != 0

    def as_dict(self) -> dict:
        return {"numerator": self.numerator, "denominator": self.denominator,
                "value": self.value}


@dataclass(frozen=True)
class MetricsReport:
    er_di: Ratio
    er_qi: Ratio
    r_token: Ratio
    p_token: Ratio
    wp: Ratio

    def as_dict(self) -> dict:
        return {
            "entity_recall_direct": self.er_di.as_dict(),
            "entity_recall_quasi": self.er_qi.as_dict(),
            "token_recall": self.r_token.as_dict(),
            "token_precision": self.p_token.as_dict(),
            "weighted_precision": self.wp.as_dict(),
        }


def evaluable_documents(corpus: Corpus) -> list[Document]:
    """Documents carrying at least one annotation set."""
    return [doc for doc in corpus.documents if doc.annotations]


def resolve_mask(doc: Document, masks: dict[str, SystemMask],
                 lenient: bool = False) -> frozenset[int]:
    mask = masks.get(doc.doc_id)
    if mask is None:
        if lenient:
            return frozenset()
        raise MissingMask(doc.doc_id)
    return mask.masked_tokens


def annotator_token_sets(doc: Document) -> dict[str, frozenset[int]]:
    """T_a for each annotator: all tokens of their DIRECT and QUASI entities."""
    result: dict[str, frozenset[int]] = {}
    for annotator in sorted(doc.annotations):
        covered: frozenset[int] = frozenset()
        for entity in group_entities(doc, annotator):
            if entity.identifier_class in ("DIRECT", "QUASI"):
                covered |= entity.token_set
        result[annotator] = covered
    return result


def _entity_recall(corpus: Corpus, masks: dict[str, SystemMask],
                   identifier_class: str, lenient: bool = False) -> Ratio:
    masked_entities = 0
    total_entities = 0
    for doc in evaluable_documents(corpus):
        masked_tokens = resolve_mask(doc, masks, lenient)
        for annotator in sorted(doc.annotations):
            for entity in group_entities(doc, annotator):
                if entity.identifier_class != identifier_class:
                    continue
                total_entities += 1
                if entity.token_set <= masked_tokens:
                    masked_entities += 1
    return Ratio(masked_entities, total_entities)


def entity_recall_direct(corpus: Corpus, masks: dict[str, SystemMask],
                         lenient: bool = False) -> Ratio:
    """Micro-averaged recall over direct-identifier entities.

    An entity is a true positive only when all of its mention tokens are
    masked; one readable mention is enough to disclose the identifier.
    """
    return _entity_recall(corpus, masks, "DIRECT", lenient)


def entity_recall_quasi(corpus: Corpus, masks: dict[str, SystemMask],
                        lenient: bool = False) -> Ratio:
    """Micro-averaged recall over quasi-identifier entities."""
    return _entity_recall(corpus, masks, "QUASI", lenient)


def token_recall(corpus: Corpus, masks: dict[str, SystemMask],
                 lenient: bool = False) -> Ratio:
    """Token-level recall over all identifiers, micro-averaged over annotators."""
    hit = 0
    total = 0
    for doc in evaluable_documents(corpus):
        masked_tokens = resolve_mask(doc, masks, lenient)
        for annotator, covered in annotator_token_sets(doc).items():
            hit += len(covered & masked_tokens)
            total += len(covered)
    return Ratio(hit, total)


def token_precision(corpus: Corpus, masks: dict[str, SystemMask],
                    lenient: bool = False) -> Ratio:
    """Unweighted token-level precision, micro-averaged over annotators."""
    hit = 0
    total = 0
    for doc in evaluable_documents(corpus):
        masked_tokens = resolve_mask(doc, masks, lenient)
        token_sets = annotator_token_sets(doc)
        for annotator, covered in token_sets.items():
            hit += len(masked_tokens & covered)
        total += len(token_sets) * len(masked_tokens)
    return Ratio(hit, total)


def weighted_precision(corpus: Corpus, masks: dict[str, SystemMask],
                       ic=None, lenient: bool = False) -> Ratio:
    """Token-level precision with each token weighted by information content.

    numerator   = sum over (doc, annotator, masked token in the annotator's
                  token set) of the token's weight;
    denominator = sum over docs of (number of annotators on the doc) times
                  the total weight of the doc's masked tokens.

    Weight sums use exact summation so the result is independent of
    document and token order. With the uniform provider this equals the
    unweighted precision.
    """
    if ic is None:
        ic = UniformIc()
    numerator_terms: list[float] = []
    denominator_terms: list[float] = []
    for doc in evaluable_documents(corpus):
        masked_tokens = resolve_mask(doc, masks, lenient)
        token_sets = annotator_token_sets(doc)
        n_annotators = len(token_sets)
        for index in sorted(masked_tokens):
            weight = ic.weight(doc, index)
            denominator_terms.append(n_annotators * weight)
            for annotator in sorted(token_sets):
                if index in token_sets[annotator]:
                    numerator_terms.append(weight)
    return Ratio(math.fsum(numerator_terms), math.fsum(denominator_terms))


def evaluate(corpus: Corpus, masks: dict[str, SystemMask],
             ic=None, lenient: bool = False) -> MetricsReport:
    """Compute the full metric bundle for one system's masks."""
    return MetricsReport(
        er_di=entity_recall_direct(corpus, masks, lenient),
        er_qi=entity_recall_quasi(corpus, masks, lenient),
        r_token=token_recall(corpus, masks, lenient),
        p_token=token_precision(corpus, masks, lenient),
        wp=weighted_precision(corpus, masks, ic, lenient),
    )
