"""Deterministic rule-based masker.

A small stack of recognizers (regexes over codes, dates, amounts and
honorific-led names, plus gazetteer lookups) produces predicted mentions,
which are resolved longest-span-first into a non-overlapping set and
projected onto tokens. This gives the evaluation pipeline a complete,
dependency-free system to run end to end; no score claims are attached
to it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import GazetteerLoadError, OverlappingSpans
from .metrics import SystemMask, mask_from_spans
from .model import Document

_MONTHS = ("January", "February", "March", "April", "May", "June", "July",
           "August", "September", "October", "November", "December")
_MONTH_ALT = "|".join(_MONTHS)

MASK_STYLES = ("stars", "category-tag", "fixed-token")


@dataclass(frozen=True)
class PredictedMention:
    start: int
    end: int
    text: str
    entity_type: str
    identifier_type: str
    recognizer: str


@dataclass(frozen=True)
class Recognizer:
    """A named pattern mapping matches to an entity type and identifier policy."""

    name: str
    pattern: re.Pattern
    entity_type: str
    identifier_type: str

    def find(self, text: str) -> list[tuple[int, int]]:
        return [m.span() for m in self.pattern.finditer(text)]


# Order matters for ties in overlap resolution: plausible years beat bare
# digit runs, and case numbers beat both.
DEFAULT_RECOGNIZERS = ("case_number", "date", "year", "amount", "honorific_name",
                       "digit_run", "countries", "nationalities", "cities")


@dataclass(frozen=True)
class MaskerConfig:
    enabled: tuple[str, ...] = DEFAULT_RECOGNIZERS
    min_digit_run: int = 4
    gazetteer_paths: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.min_digit_run < 1:
            raise ValueError("min_digit_run must be >= 1")


def _packaged_gazetteer(name: str) -> list[str]:
    try:
        data = resources.files("maskeval.gazetteers").joinpath(f"{name}.txt").read_text("utf-8")
    except (FileNotFoundError, ModuleNotFoundError) as exc:
        raise GazetteerLoadError(f"packaged gazetteer {name!r} missing") from exc
    return _parse_gazetteer(data, source=name)


def _parse_gazetteer(data: str, source: str) -> list[str]:
    entries = []
    for line in data.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    if not entries:
        raise GazetteerLoadError(f"gazetteer {source!r} contains no entries")
    return entries


def load_gazetteer(path: str | Path) -> list[str]:
    """One entry per line, UTF-8, '#' comments."""
    try:
        data = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise GazetteerLoadError(f"cannot read gazetteer {path}: {exc}") from exc
    return _parse_gazetteer(data, source=str(path))


def _gazetteer_pattern(entries: Sequence[str]) -> re.Pattern:
    # Longest entries first so multi-word names win over their prefixes.
    ordered = sorted(entries, key=len, reverse=True)
    return re.compile(r"\b(?:" + "|".join(re.escape(e) for e in ordered) + r")\b")


def build_recognizers(config: MaskerConfig) -> list[Recognizer]:
    def gazetteer(name: str, entity_type: str) -> Recognizer:
        path = config.gazetteer_paths.get(name)
        entries = load_gazetteer(path) if path else _packaged_gazetteer(name)
        return Recognizer(name, _gazetteer_pattern(entries), entity_type, "QUASI")

    available = {
        "case_number": lambda: Recognizer(
            "case_number",
            re.compile(r"\b[Nn]os?\.\s?\d+(?:/\d+)*"),
            "CODE", "DIRECT"),
        "digit_run": lambda: Recognizer(
            "digit_run",
            re.compile(r"\d{%d,}" % config.min_digit_run),
            "CODE", "QUASI"),
        "date": lambda: Recognizer(
            "date",
            re.compile(
                r"\b(?:\d{1,2}\s+(?:%s)\s+\d{4}|(?:%s)\s+\d{1,2},\s+\d{4})\b"
                % (_MONTH_ALT, _MONTH_ALT)),
            "DATETIME", "QUASI"),
        "year": lambda: Recognizer(
            "year",
            re.compile(r"\b(?:1[89]\d\d|20\d\d)\b"),
            "DATETIME", "QUASI"),
        "amount": lambda: Recognizer(
            "amount",
            re.compile(
                r"(?:[€$£]\s?\d[\d,.]*\d|[€$£]\s?\d|"
                r"\b\d[\d,.]*\s?(?:euros?|dollars?|pounds?|EUR|USD|GBP)\b)"),
            "QUANTITY", "QUASI"),
        "honorific_name": lambda: Recognizer(
            "honorific_name",
            re.compile(r"\b(?:Mr|Ms|Mrs|Dr)\.?\s+(?:[A-Z]\.\s?)*[A-Z][a-z]+"
                       r"(?:\s+[A-Z][a-z]+)*"),
            "PERSON", "DIRECT"),
        "countries": lambda: gazetteer("countries", "LOC"),
        "nationalities": lambda: gazetteer("nationalities", "DEM"),
        "cities": lambda: gazetteer("cities", "LOC"),
    }
    recognizers = []
    for name in config.enabled:
        if name not in available:
            raise ValueError(f"unknown recognizer {name!r}")
        recognizers.append(available[name]())
    return recognizers


def _resolve_overlaps(candidates: list[tuple[int, int, int, Recognizer]]) -> list[tuple[int, int, Recognizer]]:
    """Keep the longest span first; ties go to the earlier recognizer."""
    ordered = sorted(candidates, key=lambda c: (-(c[1] - c[0]), c[2], c[0], c[1]))
    kept: list[tuple[int, int, Recognizer]] = []
    for start, end, _, recognizer in ordered:
        if all(end <= k_start or start >= k_end for k_start, k_end, _ in kept):
            kept.append((start, end, recognizer))
    kept.sort(key=lambda k: (k[0], k[1]))
    return kept


def run_masker(doc: Document, config: MaskerConfig | None = None,
               recognizers: list[Recognizer] | None = None
               ) -> tuple[SystemMask, list[PredictedMention]]:
    """Predict mentions on one document and project them to a token mask."""
    if recognizers is None:
        recognizers = build_recognizers(config or MaskerConfig())
    candidates = []
    for priority, recognizer in enumerate(recognizers):
        for start, end in recognizer.find(doc.text):
            candidates.append((start, end, priority, recognizer))
    resolved = _resolve_overlaps(candidates)
    predicted = [
        PredictedMention(start=start, end=end, text=doc.text[start:end],
                         entity_type=r.entity_type, identifier_type=r.identifier_type,
                         recognizer=r.name)
        for start, end, r in resolved
    ]
    mask = mask_from_spans(doc, [(p.start, p.end) for p in predicted])
    return mask, predicted


def merge_spans(spans: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Union of character spans as a sorted list of disjoint spans."""
    ordered = sorted((int(s), int(e)) for s, e in spans if int(e) > int(s))
    merged: list[tuple[int, int]] = []
    for start, end in ordered:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def apply_mask(text: str, spans: Iterable, style: str = "stars",
               placeholder: str = "***") -> str:
    """Render masked text.

    spans may be (start, end) or (start, end, label) tuples, or
    PredictedMention objects. Styles: stars replaces every masked character
    with '*' (length-preserving); category-tag replaces each span with
    "[LABEL]"; fixed-token replaces each span with the placeholder. Text
    outside the spans is left untouched. Overlapping spans are rejected.
    """
    if style not in MASK_STYLES:
        raise ValueError(f"unknown mask style {style!r}")

    normalized: list[tuple[int, int, str]] = []
    for span in spans:
        if isinstance(span, PredictedMention):
            normalized.append((span.start, span.end, span.entity_type))
        elif len(span) == 3:
            normalized.append((int(span[0]), int(span[1]), str(span[2])))
        else:
            normalized.append((int(span[0]), int(span[1]), "MASK"))
    normalized.sort(key=lambda s: (s[0], s[1]))

    previous_end = 0
    for start, end, _ in normalized:
        if start < previous_end:
            raise OverlappingSpans(f"span [{start}, {end}) overlaps an earlier span")
        if start < 0 or end > len(text) or start >= end:
            raise ValueError(f"span [{start}, {end}) invalid for text of length {len(text)}")
        previous_end = end

    result = text
    for start, end, label in reversed(normalized):
        if style == "stars":
            replacement = "*" * (end - start)
        elif style == "category-tag":
            replacement = f"[{label}]"
        else:
            replacement = placeholder
        result = result[:start] + replacement + result[end:]
    return result
