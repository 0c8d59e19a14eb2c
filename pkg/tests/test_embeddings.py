import json

import httpx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import make_sentences
from glosa_sum.embeddings import (
    EmbeddingProviderConfig,
    HttpEmbeddingClient,
    cosine,
    embed_query,
    embed_sentences,
    load_cache,
    normalize_rows,
    semantic_distance,
    write_cache,
)
from glosa_sum.errors import CacheMiss, ConfigError, DimensionMismatch, HttpFailure


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))
    return path


class TestCache:
    def test_full_cache(self, tmp_path):
        p = write_jsonl(tmp_path / "c.jsonl", [{"index": i, "vector": [1.0, i + 1.0]} for i in (2, 0, 1)])
        emb = embed_sentences(make_sentences(3), EmbeddingProviderConfig(mode="cache", cache_path=str(p)))
        assert emb.n == 3 and emb.dim == 2
        np.testing.assert_allclose(np.linalg.norm(emb.rows, axis=1), 1.0, atol=1e-12)

    def test_three_four_five(self, tmp_path):
        p = write_jsonl(tmp_path / "c.jsonl", [{"index": 0, "vector": [3, 4]}])
        emb = embed_sentences(make_sentences(1), EmbeddingProviderConfig(mode="cache", cache_path=str(p)))
        np.testing.assert_allclose(emb.rows[0], [0.6, 0.8], atol=1e-15)

    def test_cache_miss(self, tmp_path):
        p = write_jsonl(tmp_path / "c.jsonl", [{"index": 0, "vector": [1, 0]}])
        with pytest.raises(CacheMiss) as exc:
            embed_sentences(make_sentences(2), EmbeddingProviderConfig(mode="cache", cache_path=str(p)))
        assert exc.value.index == 1

    def test_dimension_mismatch(self, tmp_path):
        p = write_jsonl(tmp_path / "c.jsonl", [{"index": 0, "vector": [1, 0]}, {"index": 1, "vector": [1, 0, 0]}])
        with pytest.raises(DimensionMismatch):
            embed_sentences(make_sentences(2), EmbeddingProviderConfig(mode="cache", cache_path=str(p)))

    def test_loads_are_bit_identical(self, tmp_path, rng):
        p = tmp_path / "c.jsonl"
        write_cache(p, rng.standard_normal((5, 7)))
        cfg = EmbeddingProviderConfig(mode="cache", cache_path=str(p))
        a = embed_sentences(make_sentences(5), cfg).rows
        b = embed_sentences(make_sentences(5), cfg).rows
        assert a.tobytes() == b.tobytes()

    def test_duplicate_index_rejected(self, tmp_path):
        p = write_jsonl(tmp_path / "c.jsonl", [{"index": 0, "vector": [1, 0]}] * 2)
        with pytest.raises(Exception, match="duplicate"):
            load_cache(p)

    def test_cache_mode_requires_path(self):
        with pytest.raises(ConfigError):
            EmbeddingProviderConfig(mode="cache").validate()


def test_zero_vector_guard(caplog):
    rows = normalize_rows([[0.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
    np.testing.assert_array_equal(rows[0], [1.0, 0.0, 0.0])
    assert "zero-norm" in caplog.text


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (4, 5), elements=st.floats(-1e3, 1e3)).filter(lambda a: np.all(np.linalg.norm(a, axis=1) > 1e-3)))
def test_normalization_idempotent(raw):
    once = normalize_rows(raw)
    np.testing.assert_allclose(np.linalg.norm(once, axis=1), 1.0, atol=1e-6)
    assert np.max(np.abs(normalize_rows(once) - once)) <= 1e-9


@pytest.mark.parametrize("u,v,cos,dist", [
    ((1.0, 0.0), (1.0, 0.0), 1.0, 0.0),
    ((1.0, 0.0), (0.0, 1.0), 0.0, 1.0),
    ((1.0, 0.0), (-1.0, 0.0), -1.0, 2.0),
])
def test_cosine_and_distance(u, v, cos, dist):
    assert cosine(np.array(u), np.array(v)) == cos
    assert semantic_distance(np.array(u), np.array(v)) == dist


def test_cosine_clamps_rounding():
    u = np.array([1.0 + 1e-15, 0.0])
    assert cosine(u, u) == 1.0


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (2, 3), elements=st.floats(-10, 10)).filter(lambda a: np.all(np.linalg.norm(a, axis=1) > 1e-3)))
def test_distance_symmetry(raw):
    u, v = normalize_rows(raw)
    assert semantic_distance(u, v) == semantic_distance(v, u)
    assert semantic_distance(u, u) == pytest.approx(0.0, abs=1e-12)


class TestMock:
    def test_deterministic_and_normalized(self):
        cfg = EmbeddingProviderConfig(mode="mock", mock_dim=16)
        a = embed_sentences(make_sentences(4), cfg)
        b = embed_sentences(make_sentences(4), cfg)
        assert a.rows.tobytes() == b.rows.tobytes()
        np.testing.assert_allclose(np.linalg.norm(a.rows, axis=1), 1.0)
        assert a.dim == 16

    def test_same_text_same_vector(self):
        cfg = EmbeddingProviderConfig(mode="mock")
        s = make_sentences(2, ["Same words.", "Same words."])
        rows = embed_sentences(s, cfg).rows
        np.testing.assert_array_equal(rows[0], rows[1])


def _fake_service(calls, fail_first=0, status=503, shuffle=True):
    state = {"failures": 0}

    def handler(request: httpx.Request):
        body = json.loads(request.content)
        calls.append((body, request.headers.get("authorization")))
        if state["failures"] < fail_first:
            state["failures"] += 1
            return httpx.Response(status, text="busy")
        data = [{"index": i, "embedding": [float(len(t)), 1.0, float(i)]} for i, t in enumerate(body["input"])]
        if shuffle:
            data.reverse()
        return httpx.Response(200, json={"data": data})

    return httpx.MockTransport(handler)


class TestHttp:
    def cfg(self, **kw):
        base = dict(mode="http", endpoint_url="http://embed.test/v1/embeddings", model_id="m",
                    batch_size=2, max_retries=2, max_in_flight=1)
        base.update(kw)
        return EmbeddingProviderConfig(**base)

    def test_batches_and_reorders(self, monkeypatch):
        monkeypatch.setenv("GLOSA_EMBEDDING_TOKEN", "secret")
        calls = []
        sents = make_sentences(5, ["a.", "bb.", "ccc.", "dddd.", "eeeee."])
        emb = embed_sentences(sents, self.cfg(), transport=_fake_service(calls))
        assert [len(b["input"]) for b, _ in calls] == [2, 2, 1]
        assert all(b["model"] == "m" for b, _ in calls)
        assert calls[0][1] == "Bearer secret"
        expected = normalize_rows([[2, 1, 0], [3, 1, 1], [4, 1, 0], [5, 1, 1], [6, 1, 0]])
        np.testing.assert_allclose(emb.rows, expected)
        assert emb.source == "http"

    def test_retry_then_success(self):
        calls, sleeps = [], []
        client = HttpEmbeddingClient(self.cfg(), transport=_fake_service(calls, fail_first=2), sleep=sleeps.append)
        out = client.embed_texts(["x.", "y."])
        assert len(out) == 2 and len(calls) == 3
        assert sleeps == [0.5, 1.0]

    def test_retries_exhausted(self):
        calls = []
        client = HttpEmbeddingClient(self.cfg(), transport=_fake_service(calls, fail_first=10), sleep=lambda s: None)
        with pytest.raises(HttpFailure) as exc:
            client.embed_texts(["x."])
        assert exc.value.status == 503 and exc.value.attempts == 3

    def test_client_error_not_retried(self):
        calls = []
        client = HttpEmbeddingClient(self.cfg(), transport=_fake_service(calls, fail_first=10, status=400),
                                     sleep=lambda s: None)
        with pytest.raises(HttpFailure) as exc:
            client.embed_texts(["x."])
        assert exc.value.attempts == 1

    def test_concurrent_batches_merge_by_index(self):
        calls = []
        texts = [f"{'w' * i}." for i in range(1, 12)]
        client = HttpEmbeddingClient(self.cfg(max_in_flight=4), transport=_fake_service(calls))
        out = client.embed_texts(texts)
        assert [v[0] for v in out] == [float(len(t)) for t in texts]

    def test_query_embedding(self):
        q = embed_query("a query", self.cfg(), transport=_fake_service([]))
        assert q.shape == (3,)
        assert np.linalg.norm(q) == pytest.approx(1.0)
