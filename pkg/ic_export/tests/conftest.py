"""Builds a tiny masked language model once per session.

The model is trained from scratch on a synthetic corpus where function
words are everywhere and the two surnames occur a handful of times, so a
competent masked LM must find the function words far more predictable.
Training takes a few seconds on CPU and keeps the suite fully offline.
"""

import json
import random
from pathlib import Path

import pytest
import torch

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "a", "in", "on", "of", "was", "to", "and", "by", "at",
    "court", "case", "judge", "appeal", "witness", "town", "filed",
    "heard", "ruled", "document", "year", "report", "claim", "against",
    "hearing", "order", "state", "law", "second", "final",
    "zyg", "##mund", "kwi", "##atek", ".",
]

TEMPLATES = [
    "the court heard the case in the town .",
    "the judge ruled on the appeal .",
    "a witness filed the report to the court .",
    "the claim was heard by the judge .",
    "the case was filed against the state .",
    "a document of the year was filed .",
    "the order of the court was final .",
    "the hearing was in the town .",
    "the appeal was heard in the second year .",
    "a report on the case was filed by the witness .",
    "the law of the state was ruled on .",
    "the judge heard the witness at the hearing .",
]

RARE_SENTENCES = [
    "the witness zygmund filed a claim .",
    "kwiatek was heard by the court .",
    "the judge ruled against zygmund .",
    "a report by kwiatek was filed .",
]


def _training_sentences(rng: random.Random) -> list[str]:
    sentences = []
    for _ in range(40):
        sentences.extend(TEMPLATES)
    sentences.extend(RARE_SENTENCES * 2)
    rng.shuffle(sentences)
    return sentences


def _train(model, tokenizer, sentences, steps=250, batch_size=16):
    rng = random.Random(11)
    optimizer = torch.optim.AdamW(model.parameters(), lr=5e-3)
    model.train()
    encoded = [tokenizer(s)["input_ids"] for s in sentences]
    special_ids = {tokenizer.cls_token_id, tokenizer.sep_token_id,
                   tokenizer.pad_token_id}
    for _ in range(steps):
        batch = [rng.choice(encoded) for _ in range(batch_size)]
        longest = max(len(ids) for ids in batch)
        input_ids = torch.full((batch_size, longest), tokenizer.pad_token_id,
                               dtype=torch.long)
        labels = torch.full((batch_size, longest), -100, dtype=torch.long)
        attention = torch.zeros((batch_size, longest), dtype=torch.long)
        for row, ids in enumerate(batch):
            attention[row, :len(ids)] = 1
            for col, token_id in enumerate(ids):
                input_ids[row, col] = token_id
                if token_id not in special_ids and rng.random() < 0.3:
                    labels[row, col] = token_id
                    input_ids[row, col] = tokenizer.mask_token_id
        loss = model(input_ids=input_ids, attention_mask=attention,
                     labels=labels).loss
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    model.eval()
    return float(loss.detach())


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> Path:
    from transformers import BertConfig, BertForMaskedLM, BertTokenizerFast

    torch.manual_seed(1234)
    target = tmp_path_factory.mktemp("tiny-mlm")
    vocab_file = target / "vocab.txt"
    vocab_file.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(str(vocab_file), do_lower_case=True)

    config = BertConfig(
        vocab_size=len(VOCAB), hidden_size=64, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=128,
        max_position_embeddings=48,
        pad_token_id=tokenizer.pad_token_id,
    )
    model = BertForMaskedLM(config)
    _train(model, tokenizer, _training_sentences(random.Random(7)))

    model.save_pretrained(target)
    tokenizer.save_pretrained(target)
    return target


PROBE_SENTENCES = [
    "the court heard zygmund on the appeal .",
    "a claim by kwiatek was filed in the town .",
    "the judge ruled against zygmund at the hearing .",
    "the witness kwiatek filed the report .",
    "the order against zygmund was final .",
    "a document of kwiatek was heard in court .",
    "the state filed the case against zygmund .",
    "the appeal of kwiatek was ruled on .",
    "the hearing of zygmund was in the second year .",
    "a report on kwiatek was filed by the witness .",
]

FUNCTION_WORDS = ("the", "a", "in", "on", "of", "was", "by", "at", "to")
RARE_NAMES = ("zygmund", "kwiatek")


@pytest.fixture(scope="session")
def probe_corpus(tmp_path_factory) -> Path:
    """Ten-sentence corpus; each sentence holds a function word and a surname."""
    target = tmp_path_factory.mktemp("probe")
    corpus = {
        f"probe-{i:02d}": {"text": sentence, "annotations": {}}
        for i, sentence in enumerate(PROBE_SENTENCES)
    }
    path = target / "corpus.json"
    path.write_text(json.dumps(corpus, indent=1), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def probe_masks(tmp_path_factory, probe_corpus) -> Path:
    """Masks covering one function word and one surname per sentence."""
    corpus = json.loads(probe_corpus.read_text(encoding="utf-8"))
    masks = {}
    for doc_id, record in corpus.items():
        text = record["text"]
        spans = []
        surname = next(n for n in RARE_NAMES if n in text)
        spans.append([text.index(surname), text.index(surname) + len(surname)])
        words = text.split()
        function = next(w for w in words if w in FUNCTION_WORDS)
        start = text.index(function + " ")
        spans.append([start, start + len(function)])
        masks[doc_id] = spans
    path = probe_corpus.parent / "masks.json"
    path.write_text(json.dumps(masks, indent=1), encoding="utf-8")
    return path
