"""Reading, writing and summarizing standoff-annotated corpora.

The on-disk form is a UTF-8 JSON file. The canonical layout written by
save_corpus is a map from doc_id to a record; a top-level list of records
(each carrying its own "doc_id") is accepted on input as well, since
published corpora in this format commonly use the list form.

Record fields:
    text           full document text (required)
    dataset_type   train / dev / test (optional; absent means unassigned)
    task           free-text description naming the person to protect (optional)
    annotations    map annotator_id -> {"entity_mentions": [...], "relations": [...]}

Mention fields:
    entity_mention_id, entity_type, start_offset, end_offset, identifier_type,
    entity_id are required; span_text is validated when present and derived
    from the text otherwise; confidential_status defaults to NOT_CONFIDENTIAL.
Unknown category strings raise SchemaError rather than being coerced: a
silently re-labeled mention corrupts every downstream privacy metric.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .entities import mention_partition
from .errors import ParseError, SchemaError
from .model import (
    CONFIDENTIAL_STATUSES,
    ENTITY_TYPES,
    IDENTIFIER_TYPES,
    AnnotationSet,
    Document,
    EntityMention,
    Violation,
    validate,
)

FORMAT_VERSION = 1


@dataclass
class LoadReport:
    """Violations found while loading; affected documents are kept, not dropped."""

    violations: list[Violation] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    source_path: str = ""
    load_report: LoadReport = field(default_factory=LoadReport, compare=False)

    def __getitem__(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.doc_id == doc_id:
                return doc
        raise KeyError(doc_id)

    def doc_ids(self) -> list[str]:
        return [d.doc_id for d in self.documents]


def _require(record: dict, key: str, path: str):
    if key not in record:
        raise SchemaError(f"missing required field {key!r}", field_path=path + "." + key)
    return record[key]


def _parse_mention(raw: dict, text: str, path: str) -> EntityMention:
    mention_id = str(_require(raw, "entity_mention_id", path))
    entity_type = _require(raw, "entity_type", path)
    start = _require(raw, "start_offset", path)
    end = _require(raw, "end_offset", path)
    identifier_type = _require(raw, "identifier_type", path)
    entity_id = str(_require(raw, "entity_id", path))
    if not isinstance(start, int) or not isinstance(end, int):
        raise SchemaError("start_offset/end_offset must be integers", field_path=path)

    if entity_type not in ENTITY_TYPES:
        raise SchemaError(f"unknown entity_type {entity_type!r}",
                          field_path=path + ".entity_type")
    if identifier_type not in IDENTIFIER_TYPES:
        raise SchemaError(f"unknown identifier_type {identifier_type!r}",
                          field_path=path + ".identifier_type")
    confidential = raw.get("confidential_status", "NOT_CONFIDENTIAL")
    if confidential is None:
        confidential = "NOT_CONFIDENTIAL"
    if confidential not in CONFIDENTIAL_STATUSES:
        raise SchemaError(f"unknown confidential_status {confidential!r}",
                          field_path=path + ".confidential_status")

    span_text = raw.get("span_text")
    if span_text is None:
        span_text = text[max(start, 0):max(end, 0)]

    return EntityMention(
        mention_id=mention_id,
        entity_type=entity_type,
        start_offset=start,
        end_offset=end,
        span_text=span_text,
        identifier_type=identifier_type,
        confidential_status=confidential,
        entity_id=entity_id,
    )


def _parse_document(doc_id: str, record: dict, path: str,
                    split_override: str | None = None) -> Document:
    if not isinstance(record, dict):
        raise SchemaError("document record must be an object", field_path=path)
    text = _require(record, "text", path)
    if not isinstance(text, str):
        raise SchemaError("text must be a string", field_path=path + ".text")

    split = split_override or record.get("dataset_type", "unassigned")
    if split not in ("train", "dev", "test", "unassigned"):
        raise SchemaError(f"unknown dataset_type {split!r}", field_path=path + ".dataset_type")

    annotations_raw = _require(record, "annotations", path)
    if not isinstance(annotations_raw, dict):
        raise SchemaError("annotations must map annotator ids to annotation sets",
                          field_path=path + ".annotations")

    annotations: dict[str, AnnotationSet] = {}
    for annotator, ann_raw in annotations_raw.items():
        ann_path = f"{path}.annotations.{annotator}"
        if not annotator:
            raise SchemaError("annotator id must be nonempty", field_path=ann_path)
        mentions_raw = _require(ann_raw, "entity_mentions", ann_path)
        mentions = tuple(
            _parse_mention(m, text, f"{ann_path}.entity_mentions[{i}]")
            for i, m in enumerate(mentions_raw)
        )
        relations_raw = ann_raw.get("relations", [])
        relations = tuple((str(a), str(b)) for a, b in relations_raw)
        annotations[annotator] = AnnotationSet(annotator, mentions, relations)

    return Document(
        doc_id=doc_id,
        text=text,
        split=split,
        person_to_protect=record.get("task"),
        annotations=annotations,
    )


def _reject_duplicate_keys(pairs):
    """Plain JSON parsing keeps only the last of duplicated keys; a duplicated
    doc_id or annotator id would silently drop a document or annotation set."""
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise SchemaError(f"duplicate key {key!r} in JSON object")
        seen.add(key)
    return dict(pairs)


def load_corpus(path: str | Path, split_manifest: str | Path | None = None) -> Corpus:
    """Load a corpus file; validation findings land in the corpus load report.

    Syntax and schema problems raise (ParseError / SchemaError); semantic
    invariant violations such as offset mismatches are collected per document
    so nothing is silently dropped.
    """
    path = Path(path)
    raw_text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(raw_text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), position=exc.pos) from exc

    splits: dict[str, str] = {}
    if split_manifest is not None:
        manifest_text = Path(split_manifest).read_text(encoding="utf-8")
        try:
            splits = json.loads(manifest_text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in split manifest: {exc.msg}",
                             path=str(split_manifest), position=exc.pos) from exc

    documents: list[Document] = []
    seen: set[str] = set()

    if isinstance(data, dict):
        items = list(data.items())
    elif isinstance(data, list):
        items = []
        for i, record in enumerate(data):
            if not isinstance(record, dict):
                raise SchemaError("list entries must be objects", field_path=f"[{i}]")
            doc_id = _require(record, "doc_id", f"[{i}]")
            items.append((str(doc_id), record))
    else:
        raise SchemaError("top level must be a map of documents or a list of records")

    report = LoadReport()
    for doc_id, record in items:
        if doc_id in seen:
            raise SchemaError(f"duplicate doc_id {doc_id!r}", field_path=doc_id)
        seen.add(doc_id)
        doc = _parse_document(doc_id, record, path=doc_id,
                              split_override=splits.get(doc_id))
        report.violations.extend(validate(doc))
        documents.append(doc)

    return Corpus(documents=tuple(documents), source_path=str(path), load_report=report)


def _mention_to_json(m: EntityMention) -> dict:
    return {
        "entity_mention_id": m.mention_id,
        "entity_type": m.entity_type,
        "start_offset": m.start_offset,
        "end_offset": m.end_offset,
        "span_text": m.span_text,
        "identifier_type": m.identifier_type,
        "confidential_status": m.confidential_status,
        "entity_id": m.entity_id,
    }


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus in the canonical map form; load(save(c)) == c structurally."""
    out: dict[str, dict] = {}
    for doc in corpus.documents:
        record: dict = {"text": doc.text, "dataset_type": doc.split}
        if doc.person_to_protect is not None:
            record["task"] = doc.person_to_protect
        record["annotations"] = {}
        for annotator, ann in doc.annotations.items():
            entry: dict = {"entity_mentions": [_mention_to_json(m) for m in ann.mentions]}
            if ann.relations:
                entry["relations"] = [list(pair) for pair in ann.relations]
            record["annotations"][annotator] = entry
        out[doc.doc_id] = record
    Path(path).write_text(
        json.dumps(out, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )


@dataclass(frozen=True)
class TypeStats:
    mentions: int = 0
    direct: int = 0
    quasi: int = 0
    confidential: int = 0


@dataclass(frozen=True)
class SplitStats:
    documents: int = 0
    annotations: int = 0


@dataclass(frozen=True)
class CorpusStats:
    n_documents: int
    n_document_annotations: int
    n_entities: int
    n_mentions: int
    n_tokens: int
    per_entity_type: dict[str, TypeStats]
    per_confidential_status: dict[str, int]
    per_split: dict[str, SplitStats]


def compute_stats(corpus: Corpus) -> CorpusStats:
    """Corpus-wide counts over all annotators' mention sets.

    Entities are counted as distinct coreference groups per (document,
    annotator) pair, matching how the privacy metrics aggregate them.
    """
    n_doc_annotations = 0
    n_entities = 0
    n_mentions = 0
    n_tokens = 0
    mention_counts = {t: 0 for t in ENTITY_TYPES}
    direct_counts = {t: 0 for t in ENTITY_TYPES}
    quasi_counts = {t: 0 for t in ENTITY_TYPES}
    conf_by_type = {t: 0 for t in ENTITY_TYPES}
    conf_counts = {c: 0 for c in CONFIDENTIAL_STATUSES}
    split_docs: dict[str, int] = {}
    split_annotations: dict[str, int] = {}

    for doc in corpus.documents:
        n_tokens += doc.num_tokens()
        split_docs[doc.split] = split_docs.get(doc.split, 0) + 1
        split_annotations.setdefault(doc.split, 0)
        for annotator in sorted(doc.annotations):
            ann = doc.annotations[annotator]
            n_doc_annotations += 1
            split_annotations[doc.split] += 1
            n_entities += len(mention_partition(ann))
            for m in ann.mentions:
                n_mentions += 1
                if m.entity_type in mention_counts:
                    mention_counts[m.entity_type] += 1
                    if m.identifier_type == "DIRECT":
                        direct_counts[m.entity_type] += 1
                    elif m.identifier_type == "QUASI":
                        quasi_counts[m.entity_type] += 1
                    if m.confidential_status != "NOT_CONFIDENTIAL":
                        conf_by_type[m.entity_type] += 1
                if m.confidential_status in conf_counts:
                    conf_counts[m.confidential_status] += 1

    per_type = {
        t: TypeStats(mention_counts[t], direct_counts[t], quasi_counts[t], conf_by_type[t])
        for t in ENTITY_TYPES
    }
    per_split = {
        s: SplitStats(split_docs[s], split_annotations[s]) for s in sorted(split_docs)
    }
    return CorpusStats(
        n_documents=len(corpus.documents),
        n_document_annotations=n_doc_annotations,
        n_entities=n_entities,
        n_mentions=n_mentions,
        n_tokens=n_tokens,
        per_entity_type=per_type,
        per_confidential_status=conf_counts,
        per_split=per_split,
    )
