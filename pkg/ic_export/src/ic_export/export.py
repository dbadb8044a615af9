"""Export job: score masked tokens and write the weight exchange file.

Exchange file format (UTF-8 JSON), as consumed by the evaluation toolkit's
external weight provider:

    {
      "format": "ic-weights",
      "version": 1,
      "tokenizer_fingerprint": "<fingerprint of the shared token rules>",
      "model": "<model path or id>",
      "provenance": {"corpus": "...", "masks": "..."},
      "documents": {"<doc_id>": [{"token_index": 3, "probability": 0.0017}, ...]}
    }
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .inputs import read_masks, read_texts
from .scoring import MaskedLmScorer
from .tokenizer import TOKENIZER_FINGERPRINT

IC_FORMAT_NAME = "ic-weights"
IC_FORMAT_VERSION = 1


@dataclass
class ExportJob:
    corpus_path: str
    masks_path: str
    model_path: str
    output_path: str
    batch_size: int = 8
    device: str = "cpu"


def export_probabilities(job: ExportJob) -> Path:
    """Run the job end to end; returns the path written."""
    texts = read_texts(job.corpus_path)
    masks = read_masks(job.masks_path, texts)
    scorer = MaskedLmScorer.load(job.model_path, device=job.device,
                                 batch_size=job.batch_size)

    documents = {}
    for doc_id in sorted(masks):
        scored = scorer.score_document(texts[doc_id], masks[doc_id])
        documents[doc_id] = [
            {"token_index": index, "probability": scored[index]}
            for index in sorted(scored)
        ]

    payload = {
        "format": IC_FORMAT_NAME,
        "version": IC_FORMAT_VERSION,
        "tokenizer_fingerprint": TOKENIZER_FINGERPRINT,
        "model": str(job.model_path),
        "provenance": {"corpus": str(job.corpus_path), "masks": str(job.masks_path)},
        "documents": documents,
    }
    return _atomic_write(Path(job.output_path), payload)


def _atomic_write(target: Path, payload: dict) -> Path:
    target.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(dir=target.parent, suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=1)
            f.write("\n")
        os.replace(temp_name, target)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return target
