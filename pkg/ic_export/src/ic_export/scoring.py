"""Masked-LM scoring of document tokens.

Every token to score is replaced by the model's mask symbol (each of its
subtokens is masked), the model fills the blanks in one pass per window,
and the probability assigned to the token's original first subtoken at its
masked position is reported. Documents longer than the model window are
scored in overlapping windows with a stride of half a window; each position
is read from the window where it sits most centrally.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AlignmentError, ModelLoadError
from .tokenizer import tokenize

# softmax output can underflow to exactly 0.0 in float32; the exchange
# format wants probabilities in (0, 1]
MIN_PROBABILITY = 1e-38


@dataclass
class MaskedLmScorer:
    """A loaded masked language model plus its subword tokenizer."""

    model: object
    tokenizer: object
    device: str = "cpu"
    batch_size: int = 8

    @classmethod
    def load(cls, model_path: str, device: str = "cpu", batch_size: int = 8
             ) -> "MaskedLmScorer":
        try:
            from transformers import AutoModelForMaskedLM, AutoTokenizer
        except ImportError as exc:
            raise ModelLoadError(f"transformers is not importable: {exc}") from exc
        try:
            tokenizer = AutoTokenizer.from_pretrained(model_path)
            model = AutoModelForMaskedLM.from_pretrained(model_path)
            model = model.to(device)
        except ModelLoadError:
            raise
        except Exception as exc:
            raise ModelLoadError(f"cannot load model {model_path!r} "
                                 f"on device {device!r}: {exc}") from exc
        if tokenizer.mask_token_id is None:
            raise ModelLoadError(f"tokenizer of {model_path!r} has no mask token")
        model.eval()
        return cls(model=model, tokenizer=tokenizer, device=device,
                   batch_size=batch_size)

    @property
    def window_size(self) -> int:
        return int(self.model.config.max_position_embeddings)

    def score_document(self, text: str, token_indices: list[int]) -> dict[int, float]:
        """Probability of each requested document token's original value.

        token_indices refer to the document tokenization from the shared
        rules; the returned map has one entry per requested index.
        """
        import torch

        if not token_indices:
            return {}
        spans = tokenize(text)
        for index in token_indices:
            if index < 0 or index >= len(spans):
                raise AlignmentError(
                    f"token index {index} outside the document's {len(spans)} tokens")

        encoded = self.tokenizer(text, return_offsets_mapping=True,
                                 add_special_tokens=True, truncation=False)
        input_ids = list(encoded["input_ids"])
        offsets = encoded["offset_mapping"]

        subtokens_of: dict[int, list[int]] = {}
        first_subtoken: dict[int, int] = {}
        for index in sorted(set(token_indices)):
            t_start, t_end = spans[index]
            positions = [j for j, (s, e) in enumerate(offsets)
                         if e > s and s < t_end and e > t_start]
            if not positions:
                raise AlignmentError(
                    f"token {index} [{t_start}, {t_end}) maps to no model subtoken")
            subtokens_of[index] = positions
            first_subtoken[index] = positions[0]

        original_ids = list(input_ids)
        for positions in subtokens_of.values():
            for j in positions:
                input_ids[j] = self.tokenizer.mask_token_id

        needed = sorted({first_subtoken[i] for i in subtokens_of})
        log_probs = self._positional_log_probs(input_ids, needed)

        result: dict[int, float] = {}
        for index, j in first_subtoken.items():
            p = float(torch.exp(log_probs[j][original_ids[j]]))
            result[index] = min(max(p, MIN_PROBABILITY), 1.0)
        return result

    def _positional_log_probs(self, input_ids: list[int], positions: list[int]):
        """Log-probability rows for the requested positions, window-scored."""
        import torch

        window = self.window_size
        n = len(input_ids)
        if n <= window:
            starts = [0]
        else:
            stride = max(window // 2, 1)
            starts = list(range(0, n - window + 1, stride))
            if starts[-1] != n - window:
                starts.append(n - window)

        def best_window(position: int) -> int:
            candidates = [w for w in starts if w <= position < w + min(window, n)]
            return min(candidates,
                       key=lambda w: (abs((position - w) - window / 2), w))

        by_window: dict[int, list[int]] = {}
        for position in positions:
            by_window.setdefault(best_window(position), []).append(position)

        rows: dict[int, torch.Tensor] = {}
        window_starts = sorted(by_window)
        for batch_start in range(0, len(window_starts), self.batch_size):
            batch = window_starts[batch_start:batch_start + self.batch_size]
            tensors = [torch.tensor(input_ids[w:w + window]) for w in batch]
            lengths = [t.shape[0] for t in tensors]
            padded = torch.nn.utils.rnn.pad_sequence(tensors, batch_first=True).to(self.device)
            attention = torch.zeros_like(padded)
            for row_index, length in enumerate(lengths):
                attention[row_index, :length] = 1
            with torch.no_grad():
                logits = self.model(input_ids=padded, attention_mask=attention).logits
            log_probs = torch.log_softmax(logits, dim=-1)
            for row_index, w in enumerate(batch):
                for position in by_window[w]:
                    rows[position] = log_probs[row_index, position - w].cpu()
        return rows
