"""Chunking, fallback embedding and exact retrieval, checked against
independent oracles (hand-computed FNV buckets, brute-force cosine ranking)."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from repoassist.docindex import (
    CHUNK_OVERLAP,
    CHUNK_SIZE,
    DocIndex,
    FallbackHashEmbedder,
    FormatVersionMismatch,
    split_into_chunks,
)
from repoassist.errors import EmptyIndexError


# Independent FNV-1a 64 oracle, written before the embedder and kept separate.
def oracle_fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) % (1 << 64)
    return h


def oracle_embed(text: str) -> list[float]:
    counts = [0.0] * 256
    for tok in text.lower().split():
        counts[oracle_fnv1a64(tok.encode("utf-8")) % 256] += 1.0
    norm = math.sqrt(sum(c * c for c in counts))
    return [c / norm for c in counts]


# --- chunking ---


def test_short_document_is_one_chunk():
    text = "para one text\n\npara two text\n\npara three text"
    assert len(text) < 900
    assert split_into_chunks(text) == [text]


def test_long_paragraph_windows_with_exact_overlap():
    text = "x" * 5000
    chunks = split_into_chunks(text)
    # windows precomputed from the rule: starts 0,1000,2000,3000,4000; width 1200
    assert len(chunks) == 5
    assert [len(c) for c in chunks] == [1200, 1200, 1200, 1200, 1000]
    for a, b in zip(chunks, chunks[1:]):
        assert a[-CHUNK_OVERLAP:] == b[:CHUNK_OVERLAP]


def test_paragraph_packing_respects_size_bound():
    paras = ["p" * 500, "q" * 500, "r" * 500]
    chunks = split_into_chunks("\n\n".join(paras))
    assert chunks == ["p" * 500 + "\n\n" + "q" * 500, "r" * 500]
    assert all(len(c) <= CHUNK_SIZE for c in chunks)


def test_empty_document_rejected():
    with pytest.raises(ValueError):
        DocIndex().ingest_document("d.md", "")


@given(st.text(alphabet=st.sampled_from("ab \n"), min_size=1, max_size=4000))
def test_chunks_never_exceed_size_and_cover_content(text):
    chunks = split_into_chunks(text)
    assert all(len(c) <= CHUNK_SIZE for c in chunks)
    if text.strip():
        consumed = "".join(chunks).replace("\n\n", "").replace(" ", "")
        bare = text.replace("\n", "").replace(" ", "")
        # windowed overlap may duplicate characters, never drop them
        assert len(consumed) >= len(bare)
    else:
        assert chunks == []


# --- fallback embedder vs hand-computed oracle ---


def test_known_bucket_indices():
    # frozen from the independent oracle run: ship -> 223, model -> 58
    emb = FallbackHashEmbedder()
    v = emb.embed(["ship ship model"])[0]
    nonzero = np.nonzero(v)[0].tolist()
    assert nonzero == [58, 223]
    assert v[223] == pytest.approx(2 / math.sqrt(5))
    assert v[58] == pytest.approx(1 / math.sqrt(5))
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)


def test_embedder_matches_oracle_on_sentences():
    emb = FallbackHashEmbedder()
    sentences = ["background music in the menu", "Ships are rendered as boxes", "a b c a"]
    for s in sentences:
        assert emb.embed([s])[0].tolist() == oracle_embed(s)


def test_identical_inputs_identical_vectors():
    emb = FallbackHashEmbedder()
    a, b = emb.embed(["same text twice", "same text twice"])
    assert np.array_equal(a, b)


def test_repeated_token_is_parallel():
    emb = FallbackHashEmbedder()
    a = emb.embed(["a"])[0]
    b = emb.embed(["a a"])[0]
    assert np.allclose(a, b)


def test_whitespace_only_text_rejected():
    with pytest.raises(ValueError):
        FallbackHashEmbedder().embed(["   "])


@given(st.lists(st.sampled_from("alpha beta gamma delta".split()), min_size=1, max_size=12))
def test_embeddings_are_unit_norm(tokens):
    v = FallbackHashEmbedder().embed([" ".join(tokens)])[0]
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)


# --- retrieval ---

WORDS = (
    "ship menu music sound render model box view grid shot server player "
    "volume track effect button label resource asset length fallback update"
).split()


def random_index(rng: random.Random, n_chunks: int) -> DocIndex:
    index = DocIndex()
    for d in range(n_chunks):
        text = " ".join(rng.choices(WORDS, k=rng.randint(3, 20)))
        index.ingest_document(f"doc{d:03d}.md", text)
    return index


def brute_force_ranking(index: DocIndex, query_text: str) -> list[str]:
    q = oracle_embed(query_text)
    scored = []
    for chunk in index.chunks:
        emb = chunk.embedding.tolist()
        dot = sum(a * b for a, b in zip(emb, q))
        na = math.sqrt(sum(a * a for a in emb))
        nb = math.sqrt(sum(b * b for b in q))
        scored.append((-round(dot / (na * nb), 12), chunk.chunk_id))
    scored.sort()
    return [cid for _, cid in scored]


def test_self_similarity_scores_one():
    index = DocIndex()
    index.ingest_document("a.md", "the menu toggles background music")
    top = index.query("the menu toggles background music", k=1)
    assert top[0].score == pytest.approx(1.0, abs=1e-6)
    assert top[0].chunk.source == "a.md"


def test_query_matches_brute_force_on_random_index():
    rng = random.Random(20240917)
    index = random_index(rng, 50)
    for _ in range(20):
        query = " ".join(rng.choices(WORDS, k=rng.randint(1, 8)))
        for k in (1, 4, 10):
            got = [sc.chunk.chunk_id for sc in index.query(query, k)]
            assert got == brute_force_ranking(index, query)[:k]


def test_k_larger_than_index_returns_all_sorted():
    rng = random.Random(7)
    index = random_index(rng, 5)
    got = index.query("ship menu", k=50)
    assert len(got) == 5
    assert [sc.chunk.chunk_id for sc in got] == brute_force_ranking(index, "ship menu")


def test_scores_sorted_descending_with_id_tiebreak():
    index = DocIndex()
    # identical text in two documents -> identical vectors -> exact tie
    index.ingest_document("a.md", "ship ship model")
    index.ingest_document("b.md", "ship ship model")
    got = index.query("ship ship model", k=2)
    assert got[0].score == pytest.approx(got[1].score)
    assert got[0].chunk.chunk_id < got[1].chunk.chunk_id


def test_empty_index_query_raises():
    with pytest.raises(EmptyIndexError):
        DocIndex().query("anything", k=1)


# --- persistence ---


def test_save_load_round_trip_preserves_queries(tmp_path):
    rng = random.Random(99)
    index = random_index(rng, 100)
    path = tmp_path / "kb.jsonl"
    index.save(path)
    loaded = DocIndex.load(path)
    assert len(loaded) == len(index)
    for a, b in zip(index.chunks, loaded.chunks):
        assert a.chunk_id == b.chunk_id
        assert a.text == b.text
        assert np.array_equal(a.embedding, b.embedding)
    for _ in range(20):
        query = " ".join(rng.choices(WORDS, k=rng.randint(1, 6)))
        want = [(sc.chunk.chunk_id, sc.score) for sc in index.query(query, 4)]
        got = [(sc.chunk.chunk_id, sc.score) for sc in loaded.query(query, 4)]
        assert got == want


def test_loaded_index_is_frozen(tmp_path):
    index = DocIndex()
    index.ingest_document("a.md", "some text")
    path = tmp_path / "kb.jsonl"
    index.save(path)
    loaded = DocIndex.load(path)
    assert loaded.frozen
    with pytest.raises(RuntimeError):
        loaded.ingest_document("b.md", "more text")


def test_version_bump_rejected(tmp_path):
    index = DocIndex()
    index.ingest_document("a.md", "some text")
    path = tmp_path / "kb.jsonl"
    index.save(path)
    lines = path.read_text().splitlines()
    lines[0] = lines[0].replace('"format_version": 1', '"format_version": 2')
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(FormatVersionMismatch):
        DocIndex.load(path)


def test_unwritable_path_raises_oserror(tmp_path):
    index = DocIndex()
    index.ingest_document("a.md", "some text")
    with pytest.raises(OSError):
        index.save(tmp_path / "no" / "such" / "dir" / "kb.jsonl")


# --- remote embeddings backend ---


def test_remote_embedder_matches_fallback_vectors():
    from repoassist.docindex import RemoteEmbedder
    from repoassist.scripted import load_scenarios, make_scripted_app
    from repoassist.testing.serving import BackgroundServer

    from conftest import SCENARIOS

    app = make_scripted_app(load_scenarios(SCENARIOS))
    with BackgroundServer(app) as server:
        remote = RemoteEmbedder(server.base_url, model="fallback-hash")
        texts = ["ship ship model", "background music in the menu"]
        got = remote.embed(texts)
        want = FallbackHashEmbedder().embed(texts)
        for g, w in zip(got, want):
            assert np.allclose(g, w, atol=1e-12)
        assert remote.dimension == 256


def test_remote_embedder_unreachable_raises():
    from repoassist.docindex import RemoteEmbedder
    from repoassist.errors import EmbeddingBackendError

    remote = RemoteEmbedder("http://127.0.0.1:9", model="m", timeout=2.0)
    with pytest.raises(EmbeddingBackendError):
        remote.embed(["text"])
