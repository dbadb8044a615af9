"""Evaluation toolkit for text anonymization systems.

Parses standoff-annotated corpora with per-annotator masking decisions,
groups mentions into entities, and scores system masks with entity-level
privacy recall and information-weighted utility precision. Also computes
inter-annotator agreement and ships a rule-based baseline masker.
"""

from .corpus import Corpus, CorpusStats, compute_stats, load_corpus, save_corpus
from .entities import Entity, group_entities, identifier_partition
from .ic import ExternalIc, UniformIc, UnigramIc, load_ic_file, write_ic_file
from .metrics import (
    MetricsReport,
    Ratio,
    SystemMask,
    entity_recall_direct,
    entity_recall_quasi,
    evaluate,
    load_masks,
    mask_from_spans,
    token_precision,
    token_recall,
    weighted_precision,
)
from .model import (
    TOKENIZER_FINGERPRINT,
    AnnotationSet,
    Document,
    EntityMention,
    TokenSpan,
    mention_tokens,
    tokenize,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet", "Corpus", "CorpusStats", "Document", "Entity",
    "EntityMention", "ExternalIc", "MetricsReport", "Ratio", "SystemMask",
    "TokenSpan", "TOKENIZER_FINGERPRINT", "UniformIc", "UnigramIc",
    "compute_stats", "entity_recall_direct", "entity_recall_quasi", "evaluate",
    "group_entities", "identifier_partition", "load_corpus", "load_ic_file",
    "load_masks", "mask_from_spans", "mention_tokens", "save_corpus",
    "token_precision", "token_recall", "tokenize", "validate",
    "weighted_precision", "write_ic_file",
]
