"""Error analysis and report emission.

Reports are emitted either as a single structured JSON file or as a
directory of CSV files (one per section). Emission is deterministic:
keys are ordered, floats are fixed to 4 decimals with round-half-even,
and the same bundle always produces identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .agreement import AgreementReport
from .corpus import Corpus, CorpusStats
from .entities import group_entities
from .errors import MaskEvalError
from .metrics import MetricsReport, SystemMask, evaluable_documents, resolve_mask
from .model import ENTITY_TYPES

REPORT_VERSION = 1

_SAMPLE_CAP = 20


@dataclass(frozen=True)
class BreakdownRow:
    false_negatives: int
    total: int

    @property
    def proportion(self) -> float | None:
        if self.total == 0:
            return None
        return self.false_negatives / self.total

    def as_dict(self) -> dict:
        return {"false_negatives": self.false_negatives, "total": self.total,
                "proportion": self.proportion}


@dataclass(frozen=True)
class ErrorBreakdown:
    per_entity_type: dict[str, BreakdownRow]
    per_identifier_class: dict[str, BreakdownRow]
    false_negative_samples: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "per_entity_type": {t: row.as_dict()
                                for t, row in sorted(self.per_entity_type.items())},
            "per_identifier_class": {c: row.as_dict()
                                     for c, row in sorted(self.per_identifier_class.items())},
            "false_negative_samples": list(self.false_negative_samples),
        }


def false_negative_breakdown(corpus: Corpus, masks: dict[str, SystemMask],
                             lenient: bool = False,
                             sample_cap: int = _SAMPLE_CAP) -> ErrorBreakdown:
    """Count unprotected entities per entity type and identifier class.

    An entity is a false negative when some annotator marked it DIRECT or
    QUASI and at least one token of one of its mentions is left unmasked.
    Counts reconcile with the recall numerators and denominators.
    """
    fn_by_type = {t: 0 for t in ENTITY_TYPES}
    total_by_type = {t: 0 for t in ENTITY_TYPES}
    fn_by_class = {"DIRECT": 0, "QUASI": 0}
    total_by_class = {"DIRECT": 0, "QUASI": 0}
    samples: list[str] = []

    for doc in evaluable_documents(corpus):
        masked_tokens = resolve_mask(doc, masks, lenient)
        for annotator in sorted(doc.annotations):
            for entity in group_entities(doc, annotator):
                if entity.identifier_class not in ("DIRECT", "QUASI"):
                    continue
                total_by_type[entity.entity_type] += 1
                total_by_class[entity.identifier_class] += 1
                if not entity.token_set <= masked_tokens:
                    fn_by_type[entity.entity_type] += 1
                    fn_by_class[entity.identifier_class] += 1
                    if len(samples) < sample_cap:
                        samples.append(entity.mentions[0].span_text)

    return ErrorBreakdown(
        per_entity_type={t: BreakdownRow(fn_by_type[t], total_by_type[t])
                         for t in ENTITY_TYPES},
        per_identifier_class={c: BreakdownRow(fn_by_class[c], total_by_class[c])
                              for c in ("DIRECT", "QUASI")},
        false_negative_samples=tuple(samples),
    )


@dataclass
class ReportBundle:
    """Everything one run wants to write out; sections are optional."""

    metrics: MetricsReport | None = None
    errors: ErrorBreakdown | None = None
    agreement: AgreementReport | None = None
    stats: CorpusStats | None = None
    metadata: dict = field(default_factory=dict)


def _round_floats(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return float(format(value, ".4f"))
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def bundle_to_dict(bundle: ReportBundle) -> dict:
    out: dict = {"report_version": REPORT_VERSION}
    if bundle.metadata:
        out["metadata"] = dict(sorted(bundle.metadata.items()))
    if bundle.metrics is not None:
        out["metrics"] = bundle.metrics.as_dict()
    if bundle.errors is not None:
        out["error_breakdown"] = bundle.errors.as_dict()
    if bundle.agreement is not None:
        out["agreement"] = bundle.agreement.as_dict()
    if bundle.stats is not None:
        stats = bundle.stats
        out["stats"] = {
            "n_documents": stats.n_documents,
            "n_document_annotations": stats.n_document_annotations,
            "n_entities": stats.n_entities,
            "n_mentions": stats.n_mentions,
            "n_tokens": stats.n_tokens,
            "per_entity_type": {
                t: {"mentions": s.mentions, "direct": s.direct,
                    "quasi": s.quasi, "confidential": s.confidential}
                for t, s in sorted(stats.per_entity_type.items())
            },
            "per_confidential_status": dict(sorted(stats.per_confidential_status.items())),
            "per_split": {
                name: {"documents": s.documents, "annotations": s.annotations}
                for name, s in sorted(stats.per_split.items())
            },
        }
    return out


def _csv_bytes(header: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buffer.getvalue()


def _fmt(value) -> str | None:
    if value is None:
        return None
    if isinstance(value, float):
        return format(value, ".4f")
    return value


def _csv_sections(bundle: ReportBundle) -> dict[str, str]:
    sections: dict[str, str] = {}
    if bundle.metrics is not None:
        rows = []
        for name, ratio in bundle.metrics.as_dict().items():
            rows.append([name, _fmt(ratio["numerator"]),
                         _fmt(ratio["denominator"]), _fmt(ratio["value"])])
        sections["metrics.csv"] = _csv_bytes(
            ["metric", "numerator", "denominator", "value"], rows)
    if bundle.errors is not None:
        rows = [[t, row.false_negatives, row.total, _fmt(row.proportion)]
                for t, row in sorted(bundle.errors.per_entity_type.items())]
        sections["false_negatives_by_entity_type.csv"] = _csv_bytes(
            ["entity_type", "false_negatives", "total", "proportion"], rows)
        rows = [[c, row.false_negatives, row.total, _fmt(row.proportion)]
                for c, row in sorted(bundle.errors.per_identifier_class.items())]
        sections["false_negatives_by_identifier_class.csv"] = _csv_bytes(
            ["identifier_class", "false_negatives", "total", "proportion"], rows)
    if bundle.agreement is not None:
        rows = [[r.kind, r.unit, r.match_mode, r.n_items, r.n_comparable,
                 r.key_collisions, _fmt(r.aoa), _fmt(r.fleiss_kappa),
                 _fmt(r.krippendorff_alpha)]
                for r in bundle.agreement.rows]
        sections["agreement.csv"] = _csv_bytes(
            ["kind", "unit", "match_mode", "n_items", "n_comparable",
             "key_collisions", "aoa", "fleiss_kappa", "krippendorff_alpha"], rows)
        rows = [[a, b, count] for (a, b), count in
                sorted(bundle.agreement.disagreements.entity_type_confusion.items())]
        sections["entity_type_confusion.csv"] = _csv_bytes(
            ["first", "second", "count"], rows)
        rows = [[entity_type, a, b, count]
                for entity_type, table in
                sorted(bundle.agreement.disagreements.identifier_confusion.items())
                for (a, b), count in sorted(table.items())]
        sections["identifier_confusion.csv"] = _csv_bytes(
            ["entity_type", "first", "second", "count"], rows)
    if bundle.stats is not None:
        stats = bundle.stats
        rows = [["n_documents", stats.n_documents],
                ["n_document_annotations", stats.n_document_annotations],
                ["n_entities", stats.n_entities],
                ["n_mentions", stats.n_mentions],
                ["n_tokens", stats.n_tokens]]
        sections["stats.csv"] = _csv_bytes(["statistic", "value"], rows)
        rows = [[t, s.mentions, s.direct, s.quasi, s.confidential]
                for t, s in sorted(stats.per_entity_type.items())]
        sections["stats_by_entity_type.csv"] = _csv_bytes(
            ["entity_type", "mentions", "direct", "quasi", "confidential"], rows)
        rows = [[c, n] for c, n in sorted(stats.per_confidential_status.items())]
        sections["stats_by_confidential_status.csv"] = _csv_bytes(
            ["confidential_status", "count"], rows)
        rows = [[name, s.documents, s.annotations]
                for name, s in sorted(stats.per_split.items())]
        sections["stats_by_split.csv"] = _csv_bytes(
            ["split", "documents", "annotations"], rows)
    return sections


def emit(bundle: ReportBundle, format: str, path: str | Path) -> list[Path]:
    """Write a bundle; returns the paths written.

    'structured' writes a single JSON file at path; 'csv' treats path as a
    directory and writes one file per section.
    """
    path = Path(path)
    if format == "structured":
        payload = _round_floats(bundle_to_dict(bundle))
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, sort_keys=True, indent=1,
                                   ensure_ascii=False) + "\n", encoding="utf-8")
        return [path]
    if format == "csv":
        path.mkdir(parents=True, exist_ok=True)
        written = []
        for name, content in sorted(_csv_sections(bundle).items()):
            target = path / name
            target.write_text(content, encoding="utf-8")
            written.append(target)
        return written
    raise MaskEvalError(f"unknown report format {format!r}")
