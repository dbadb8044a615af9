import json
import random

import pytest

from maskeval import compute_stats, load_corpus, save_corpus
from maskeval.corpus import Corpus
from maskeval.errors import ParseError, SchemaError

from generators import random_corpus


def two_doc_payload():
    return {
        "case-1": {
            "text": "Ms Vera Holm lives in Oslo.",
            "dataset_type": "train",
            "task": "Protect Vera Holm.",
            "annotations": {
                "a1": {"entity_mentions": [
                    {"entity_mention_id": "m1", "entity_type": "PERSON",
                     "start_offset": 3, "end_offset": 12, "span_text": "Vera Holm",
                     "identifier_type": "DIRECT", "confidential_status": "NOT_CONFIDENTIAL",
                     "entity_id": "e1"},
                    {"entity_mention_id": "m2", "entity_type": "LOC",
                     "start_offset": 22, "end_offset": 26, "span_text": "Oslo",
                     "identifier_type": "QUASI", "confidential_status": "NOT_CONFIDENTIAL",
                     "entity_id": "e2"},
                ]},
                "a2": {"entity_mentions": [
                    {"entity_mention_id": "m1", "entity_type": "PERSON",
                     "start_offset": 3, "end_offset": 12, "span_text": "Vera Holm",
                     "identifier_type": "DIRECT", "confidential_status": "NOT_CONFIDENTIAL",
                     "entity_id": "x1"},
                ]},
            },
        },
        "case-2": {
            "text": "A nurse was treated for anorexia in 2010.",
            "dataset_type": "dev",
            "annotations": {
                "a1": {"entity_mentions": [
                    {"entity_mention_id": "m1", "entity_type": "DEM",
                     "start_offset": 2, "end_offset": 7, "span_text": "nurse",
                     "identifier_type": "QUASI", "confidential_status": "NOT_CONFIDENTIAL",
                     "entity_id": "e1"},
                    {"entity_mention_id": "m2", "entity_type": "DEM",
                     "start_offset": 24, "end_offset": 32, "span_text": "anorexia",
                     "identifier_type": "NO_MASK", "confidential_status": "HEALTH",
                     "entity_id": "e2"},
                    {"entity_mention_id": "m3", "entity_type": "DATETIME",
                     "start_offset": 36, "end_offset": 40, "span_text": "2010",
                     "identifier_type": "QUASI", "confidential_status": "NOT_CONFIDENTIAL",
                     "entity_id": "e3"},
                ]},
            },
        },
    }


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.json"
    path.write_text(json.dumps(two_doc_payload()), encoding="utf-8")
    return path


def test_load_two_documents(corpus_file):
    corpus = load_corpus(corpus_file)
    assert corpus.doc_ids() == ["case-1", "case-2"]
    assert corpus.load_report.clean
    doc = corpus["case-1"]
    assert doc.split == "train"
    assert doc.person_to_protect == "Protect Vera Holm."
    assert sorted(doc.annotations) == ["a1", "a2"]
    assert doc.annotations["a1"].mentions[1].span_text == "Oslo"


def test_load_accepts_list_form(tmp_path):
    records = [dict(doc_id=doc_id, **record)
               for doc_id, record in two_doc_payload().items()]
    path = tmp_path / "list_form.json"
    path.write_text(json.dumps(records), encoding="utf-8")
    corpus = load_corpus(path)
    assert corpus.doc_ids() == ["case-1", "case-2"]


def test_load_missing_start_offset_names_field(tmp_path):
    payload = two_doc_payload()
    del payload["case-1"]["annotations"]["a1"]["entity_mentions"][0]["start_offset"]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(SchemaError) as exc:
        load_corpus(path)
    assert "start_offset" in str(exc.value)
    assert "case-1" in str(exc.value)


def test_load_unknown_entity_type_is_schema_error(tmp_path):
    payload = two_doc_payload()
    payload["case-1"]["annotations"]["a1"]["entity_mentions"][0]["entity_type"] = "ANIMAL"
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(SchemaError):
        load_corpus(path)


def test_load_malformed_json_is_parse_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_corpus(path)
    assert exc.value.position is not None


def test_load_reports_violations_without_dropping(tmp_path):
    payload = two_doc_payload()
    payload["case-1"]["annotations"]["a1"]["entity_mentions"][0]["span_text"] = "WRONG"
    path = tmp_path / "violations.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    corpus = load_corpus(path)
    assert len(corpus.documents) == 2
    assert [v.code for v in corpus.load_report.violations] == ["SpanTextMismatch"]


def test_split_manifest_overrides(tmp_path, corpus_file):
    manifest = tmp_path / "splits.json"
    manifest.write_text(json.dumps({"case-1": "test"}), encoding="utf-8")
    corpus = load_corpus(corpus_file, split_manifest=manifest)
    assert corpus["case-1"].split == "test"
    assert corpus["case-2"].split == "dev"


def test_round_trip_empty(tmp_path):
    path = tmp_path / "empty.json"
    save_corpus(Corpus(documents=()), path)
    assert load_corpus(path).documents == ()


def test_round_trip_two_docs(tmp_path, corpus_file):
    first = load_corpus(corpus_file)
    saved = tmp_path / "saved.json"
    save_corpus(first, saved)
    second = load_corpus(saved)
    assert second.documents == first.documents
    # save -> load -> save is byte-stable
    again = tmp_path / "again.json"
    save_corpus(second, again)
    assert again.read_bytes() == saved.read_bytes()


def test_round_trip_random_corpora(tmp_path):
    rng = random.Random(23)
    for i in range(30):
        corpus = random_corpus(rng)
        path = tmp_path / f"c{i}.json"
        save_corpus(corpus, path)
        assert load_corpus(path).documents == corpus.documents


def test_stats_hand_counts(corpus_file):
    stats = compute_stats(load_corpus(corpus_file))
    assert stats.n_documents == 2
    assert stats.n_document_annotations == 3
    assert stats.n_mentions == 6
    # case-1/a1: 2 entities; case-1/a2: 1; case-2/a1: 3
    assert stats.n_entities == 6
    assert stats.per_entity_type["PERSON"].mentions == 2
    assert stats.per_entity_type["PERSON"].direct == 2
    assert stats.per_entity_type["DEM"].mentions == 2
    assert stats.per_entity_type["DEM"].quasi == 1
    assert stats.per_entity_type["DEM"].confidential == 1
    assert stats.per_confidential_status["HEALTH"] == 1
    assert stats.per_confidential_status["NOT_CONFIDENTIAL"] == 5
    assert stats.per_split["train"].documents == 1
    assert stats.per_split["train"].annotations == 2
    assert stats.per_split["dev"].documents == 1
    # invariant: per-type mentions and per-status counts sum to n_mentions
    assert sum(r.mentions for r in stats.per_entity_type.values()) == stats.n_mentions
    assert sum(stats.per_confidential_status.values()) == stats.n_mentions


def test_stats_empty_corpus():
    stats = compute_stats(Corpus(documents=()))
    assert stats.n_documents == 0
    assert stats.n_mentions == 0
    assert stats.n_tokens == 0
    assert stats.per_split == {}


def test_stats_additive_over_disjoint_corpora():
    rng = random.Random(31)
    for _ in range(20):
        a = random_corpus(rng)
        b = random_corpus(rng)
        renamed = tuple(
            type(d)(doc_id="b-" + d.doc_id, text=d.text, split=d.split,
                    person_to_protect=d.person_to_protect, annotations=d.annotations)
            for d in b.documents
        )
        merged = Corpus(documents=a.documents + renamed)
        sa, sb, sm = compute_stats(a), compute_stats(Corpus(renamed)), compute_stats(merged)
        assert sm.n_documents == sa.n_documents + sb.n_documents
        assert sm.n_mentions == sa.n_mentions + sb.n_mentions
        assert sm.n_entities == sa.n_entities + sb.n_entities
        assert sm.n_tokens == sa.n_tokens + sb.n_tokens
        for t in sm.per_entity_type:
            assert sm.per_entity_type[t].mentions == (
                sa.per_entity_type[t].mentions + sb.per_entity_type[t].mentions)


def test_load_rejects_duplicate_json_keys(tmp_path):
    path = tmp_path / "dup.json"
    path.write_text('{"case-1": {"text": "a", "annotations": {}}, '
                    '"case-1": {"text": "b", "annotations": {}}}',
                    encoding="utf-8")
    with pytest.raises(SchemaError) as exc:
        load_corpus(path)
    assert "case-1" in str(exc.value)
