"""Information-content providers for utility-weighted precision.

A provider assigns every (document, token) pair a nonnegative weight in
nats: the higher the weight, the more information the token carries and
the more expensive it is to mask it needlessly. Three providers are
available: uniform (all tokens weigh 1), unigram (weights from corpus
frequencies), and external (weights computed elsewhere, typically by a
masked language model, and loaded from an exchange file).

Exchange file format (UTF-8 JSON):

    {
      "format": "ic-weights",
      "version": 1,
      "tokenizer_fingerprint": "<fingerprint of the tokenizer rules>",
      "model": "<free-text provenance>",          # optional
      "documents": {
        "<doc_id>": [{"token_index": 3, "probability": 0.0017}, ...]
      }
    }

The fingerprint must match the running tokenizer's so token indices mean
the same thing on both sides.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus
from .errors import MissingEntry, ParseError, ProbabilityOutOfRange, SchemaError, TokenizerMismatch
from .model import TOKENIZER_FINGERPRINT, Document

IC_FORMAT_NAME = "ic-weights"
IC_FORMAT_VERSION = 1

# The weighting formula is unbounded as p approaches 0; clamping keeps the
# precision denominator finite, and the resulting cap (about 23 nats) already
# dwarfs any realistically observable token.
PROBABILITY_FLOOR = 1e-10


class UniformIc:
    """Every token weighs exactly 1; weighted precision reduces to plain precision."""

    kind = "uniform"

    def weight(self, doc: Document, token_index: int) -> float:
        return 1.0


class UnigramIc:
    """Weights from add-one-smoothed corpus frequencies of case-folded tokens.

    weight = -log((count + 1) / (N + V)); rarer tokens weigh strictly more,
    and unseen tokens get the smoothed floor probability, so every weight is
    finite and nonnegative.
    """

    kind = "unigram"

    def __init__(self, corpus: Corpus):
        self.counts: dict[str, int] = {}
        total = 0
        for doc in corpus.documents:
            for token in doc.tokens():
                text = doc.text[token.start:token.end].casefold()
                self.counts[text] = self.counts.get(text, 0) + 1
                total += 1
        self.total = total
        self.vocabulary_size = max(len(self.counts), 1)

    def probability(self, token_text: str) -> float:
        count = self.counts.get(token_text.casefold(), 0)
        return (count + 1) / (self.total + self.vocabulary_size)

    def weight(self, doc: Document, token_index: int) -> float:
        token = doc.tokens()[token_index]
        return -math.log(self.probability(doc.text[token.start:token.end]))


@dataclass
class ExternalIc:
    """Weights backed by probabilities computed out of process."""

    probabilities: dict[str, dict[int, float]]
    tokenizer_fingerprint: str = TOKENIZER_FINGERPRINT
    model: str = ""
    kind: str = field(default="external", init=False)

    def weight(self, doc: Document, token_index: int) -> float:
        by_token = self.probabilities.get(doc.doc_id)
        if by_token is None or token_index not in by_token:
            raise MissingEntry(
                f"no probability for token {token_index} of document {doc.doc_id!r}"
            )
        return -math.log(max(by_token[token_index], PROBABILITY_FLOOR))


def load_ic_file(path: str | Path, expected_fingerprint: str = TOKENIZER_FINGERPRINT) -> ExternalIc:
    """Load an exchange file, checking format, fingerprint and probability ranges.

    Probabilities below 0 or above 1 are rejected; an exact 0 (a model
    underflow) is accepted and clamped to the floor at query time.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), position=exc.pos) from exc

    if not isinstance(data, dict) or data.get("format") != IC_FORMAT_NAME:
        raise SchemaError(f"not an {IC_FORMAT_NAME!r} file", field_path="format")
    if data.get("version") != IC_FORMAT_VERSION:
        raise SchemaError(f"unsupported version {data.get('version')!r}", field_path="version")
    fingerprint = data.get("tokenizer_fingerprint")
    if not fingerprint:
        raise SchemaError("missing tokenizer_fingerprint", field_path="tokenizer_fingerprint")
    if fingerprint != expected_fingerprint:
        raise TokenizerMismatch(expected=expected_fingerprint, found=fingerprint)

    documents = data.get("documents")
    if not isinstance(documents, dict):
        raise SchemaError("documents must be a map", field_path="documents")

    probabilities: dict[str, dict[int, float]] = {}
    for doc_id, entries in documents.items():
        by_token: dict[int, float] = {}
        for i, entry in enumerate(entries):
            where = f"documents.{doc_id}[{i}]"
            if "token_index" not in entry or "probability" not in entry:
                raise SchemaError("entry needs token_index and probability", field_path=where)
            p = entry["probability"]
            if not isinstance(p, (int, float)) or p < 0.0 or p > 1.0:
                raise ProbabilityOutOfRange(
                    f"probability {p!r} outside [0, 1] at {where}"
                )
            by_token[int(entry["token_index"])] = float(p)
        probabilities[doc_id] = by_token
    return ExternalIc(probabilities=probabilities,
                      tokenizer_fingerprint=fingerprint,
                      model=str(data.get("model", "")))


def write_ic_file(path: str | Path, probabilities: dict[str, dict[int, float]],
                  model: str = "", tokenizer_fingerprint: str = TOKENIZER_FINGERPRINT) -> None:
    """Write an exchange file in the format documented above."""
    payload = {
        "format": IC_FORMAT_NAME,
        "version": IC_FORMAT_VERSION,
        "tokenizer_fingerprint": tokenizer_fingerprint,
        "model": model,
        "documents": {
            doc_id: [{"token_index": i, "probability": by_token[i]}
                     for i in sorted(by_token)]
            for doc_id, by_token in sorted(probabilities.items())
        },
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
