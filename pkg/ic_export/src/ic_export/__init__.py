"""Per-token predictability exporter.

Scores the tokens a system masked with a masked language model and writes
the probabilities to the weight exchange format the evaluation toolkit's
external provider consumes.
"""

from .export import ExportJob, export_probabilities
from .scoring import MaskedLmScorer
from .tokenizer import TOKENIZER_FINGERPRINT, TOKENIZER_RULES, tokenize

__version__ = "0.1.0"

__all__ = ["ExportJob", "MaskedLmScorer", "TOKENIZER_FINGERPRINT",
           "TOKENIZER_RULES", "export_probabilities", "tokenize"]
