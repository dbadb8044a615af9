"""Readers for the corpus and system-mask files the exporter scores.

Only the fields the exporter needs are read: document ids, texts, and the
sets of token indices to score. Mask files may list character spans (the
simple map form) or token indices (the extended form with a tokenizer
fingerprint).
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import InputError
from .tokenizer import TOKENIZER_FINGERPRINT, tokenize


def read_texts(corpus_path: str | Path) -> dict[str, str]:
    """doc_id -> text from a standoff corpus file (map or list layout)."""
    try:
        data = json.loads(Path(corpus_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"corpus file is not valid JSON: {exc}") from exc

    texts: dict[str, str] = {}
    if isinstance(data, dict):
        items = data.items()
    elif isinstance(data, list):
        try:
            items = [(record["doc_id"], record) for record in data]
        except (TypeError, KeyError) as exc:
            raise InputError("list-form corpus records need a doc_id") from exc
    else:
        raise InputError("corpus file must hold a map or list of documents")

    for doc_id, record in items:
        if not isinstance(record, dict) or "text" not in record:
            raise InputError(f"document {doc_id!r} has no text field")
        texts[str(doc_id)] = record["text"]
    return texts


def read_masks(masks_path: str | Path, texts: dict[str, str]) -> dict[str, list[int]]:
    """doc_id -> sorted token indices to score."""
    try:
        data = json.loads(Path(masks_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"mask file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("mask file must hold a JSON object")

    extended_markers = {"masks", "unit", "mask_format_version", "tokenizer_fingerprint"}
    if extended_markers & set(data):
        if "masks" not in data:
            raise InputError("extended mask file needs a 'masks' map")
        unit = data.get("unit", "char")
        if unit == "token":
            fingerprint = data.get("tokenizer_fingerprint")
            if fingerprint != TOKENIZER_FINGERPRINT:
                raise InputError(
                    f"mask file tokenizer fingerprint {fingerprint!r} does not "
                    f"match {TOKENIZER_FINGERPRINT!r}")
        elif unit != "char":
            raise InputError(f"unknown mask unit {unit!r}")
        entries = data["masks"]
    else:
        unit = "char"
        entries = data

    masks: dict[str, list[int]] = {}
    for doc_id, value in entries.items():
        if doc_id not in texts:
            continue
        if unit == "token":
            masks[doc_id] = sorted({int(i) for i in value})
        else:
            spans = tokenize(texts[doc_id])
            chosen = set()
            for start, end in value:
                for index, (t_start, t_end) in enumerate(spans):
                    if t_start < end and t_end > start:
                        chosen.add(index)
            masks[doc_id] = sorted(chosen)
    return masks
