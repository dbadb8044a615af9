"""Document tokenization shared with the evaluation toolkit.

The rules below are a published contract of the weight exchange format:
maximal runs of Unicode alphanumeric characters form one token, every other
non-whitespace character is a single-character token, whitespace separates
tokens. The fingerprint of the rules string is embedded in every exchange
file so the consumer can verify both sides index tokens identically.
"""

from __future__ import annotations

import hashlib

TOKENIZER_RULES = (
    "maximal runs of Unicode alphanumeric characters form one token; "
    "every other non-whitespace character is a single-character token; "
    "whitespace separates tokens; v1"
)
TOKENIZER_FINGERPRINT = hashlib.sha256(TOKENIZER_RULES.encode("utf-8")).hexdigest()[:16]


def tokenize(text: str) -> list[tuple[int, int]]:
    """[start, end) character spans of the document tokens, in order."""
    spans: list[tuple[int, int]] = []
    run_start = -1
    for i, ch in enumerate(text):
        if ch.isalnum():
            if run_start < 0:
                run_start = i
            continue
        if run_start >= 0:
            spans.append((run_start, i))
            run_start = -1
        if not ch.isspace():
            spans.append((i, i + 1))
    if run_start >= 0:
        spans.append((run_start, len(text)))
    return spans
