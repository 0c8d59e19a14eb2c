"""Sentence embeddings: JSONL cache, HTTP service and a deterministic mock."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CacheMiss, ConfigError, DimensionMismatch, HttpFailure, ProviderError

logger = logging.getLogger(__name__)

ZERO_NORM = 1e-12


@dataclass(frozen=True)
class EmbeddingMatrix:
    rows: np.ndarray
    source: str
    model_id: str

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def subset(self, indices: Sequence[int]) -> "EmbeddingMatrix":
        return EmbeddingMatrix(self.rows[list(indices)], self.source, self.model_id)


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    mode: str = "mock"  # cache | http | mock
    cache_path: str | None = None
    query_cache_path: str | None = None
    endpoint_url: str | None = None
    model_id: str = "mock-hash"
    batch_size: int = 32
    max_retries: int = 3
    timeout: float = 30.0
    max_in_flight: int = 4
    token_env: str = "GLOSA_EMBEDDING_TOKEN"
    mock_dim: int = 64
    seed: int = 42

    def validate(self) -> None:
        if self.mode not in ("cache", "http", "mock"):
            raise ConfigError(f"unknown embedding mode {self.mode!r}")
        if self.mode == "cache" and not self.cache_path:
            raise ConfigError("cache mode requires cache_path")
        if self.mode == "http" and not self.endpoint_url:
            raise ConfigError("http mode requires endpoint_url")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.mock_dim < 2:
            raise ConfigError("mock_dim must be >= 2")


def normalize_rows(raw) -> np.ndarray:
    """L2-normalize each row; zero rows become the first basis vector."""
    rows = np.array(raw, dtype=np.float64, copy=True)
    if rows.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {rows.shape}")
    if rows.shape[1] < 2:
        raise DimensionMismatch("embedding dimension must be at least 2")
    if not np.all(np.isfinite(rows)):
        raise DimensionMismatch("embedding contains non-finite entries")
    norms = np.linalg.norm(rows, axis=1)
    zero = norms < ZERO_NORM
    if zero.any():
        logger.warning("replacing %d zero-norm embedding(s) with e_1", int(zero.sum()))
        rows[zero] = 0.0
        rows[zero, 0] = 1.0
        norms[zero] = 1.0
    return rows / norms[:, None]


def cosine(u, v) -> float:
    return float(np.clip(np.dot(u, v), -1.0, 1.0))


def semantic_distance(u, v) -> float:
    return 1.0 - cosine(u, v)


def distance_matrix(rows: np.ndarray) -> np.ndarray:
    """Pairwise ``1 - cos`` for normalized rows, exact zero diagonal."""
    d = 1.0 - np.clip(rows @ rows.T, -1.0, 1.0)
    np.fill_diagonal(d, 0.0)
    return d


def _stack(vectors: list) -> np.ndarray:
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise DimensionMismatch(f"rows of differing dimension: {sorted(dims)}")
    return np.asarray(vectors, dtype=np.float64)


def load_cache(path) -> dict[int, list[float]]:
    vectors: dict[int, list[float]] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ProviderError(f"cannot read embedding cache {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            idx, vec = obj["index"], obj["vector"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ProviderError(f"{path}:{lineno}: malformed cache record") from exc
        if not isinstance(idx, int) or not isinstance(vec, list):
            raise ProviderError(f"{path}:{lineno}: malformed cache record")
        if idx in vectors:
            raise ProviderError(f"{path}:{lineno}: duplicate index {idx}")
        vectors[idx] = vec
    return vectors


def write_cache(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, row in enumerate(rows):
            fh.write(json.dumps({"index": i, "vector": [float(x) for x in row]}) + "\n")


def mock_vector(text: str, dim: int, seed: int = 42) -> np.ndarray:
    digest = hashlib.sha256(f"{seed}\x00{text}".encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    return rng.standard_normal(dim)


class HttpEmbeddingClient:
    """Batched client for ``POST {"input": [...], "model": ...}`` endpoints."""

    def __init__(self, cfg: EmbeddingProviderConfig, transport=None, sleep=time.sleep):
        import httpx

        headers = {}
        token = os.environ.get(cfg.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self.cfg = cfg
        self._sleep = sleep
        self._client = httpx.Client(timeout=cfg.timeout, headers=headers, transport=transport)

    def close(self) -> None:
        self._client.close()

    def _post_batch(self, texts: list[str]) -> list[list[float]]:
        import httpx

        payload = {"input": texts, "model": self.cfg.model_id}
        status = None
        detail = ""
        attempts = 0
        for attempt in range(self.cfg.max_retries + 1):
            attempts = attempt + 1
            try:
                resp = self._client.post(self.cfg.endpoint_url, json=payload)
            except httpx.HTTPError as exc:
                detail = str(exc)
            else:
                status = resp.status_code
                if resp.status_code == 200:
                    return self._parse(resp.json(), len(texts))
                detail = resp.text[:200]
                # client errors other than throttling will not improve on retry
                if 400 <= resp.status_code < 500 and resp.status_code != 429:
                    break
            if attempt < self.cfg.max_retries:
                self._sleep(0.5 * 2**attempt)
        raise HttpFailure(status, attempts, detail)

    @staticmethod
    def _parse(body, expected: int) -> list[list[float]]:
        try:
            data = sorted(body["data"], key=lambda item: item["index"])
            vectors = [item["embedding"] for item in data]
            indices = [item["index"] for item in data]
        except (KeyError, TypeError) as exc:
            raise HttpFailure(200, 1, "malformed response body") from exc
        if indices != list(range(expected)):
            raise HttpFailure(200, 1, f"response indices {indices} do not cover the batch")
        return vectors

    def embed_texts(self, texts: list[str]) -> list[list[float]]:
        size = self.cfg.batch_size
        batches = [texts[i:i + size] for i in range(0, len(texts), size)]
        with ThreadPoolExecutor(max_workers=max(1, self.cfg.max_in_flight)) as pool:
            results = list(pool.map(self._post_batch, batches))
        return [vec for batch in results for vec in batch]


def embed_texts(texts: list[str], cfg: EmbeddingProviderConfig, transport=None) -> np.ndarray:
    """Raw (unnormalized) vectors for arbitrary texts in mock or http mode."""
    if cfg.mode == "mock":
        return np.vstack([mock_vector(t, cfg.mock_dim, cfg.seed) for t in texts])
    if cfg.mode == "http":
        client = HttpEmbeddingClient(cfg, transport=transport)
        try:
            return _stack(client.embed_texts(list(texts)))
        finally:
            client.close()
    raise ConfigError(f"mode {cfg.mode!r} cannot embed free text")


def embed_sentences(sentences, cfg: EmbeddingProviderConfig, transport=None) -> EmbeddingMatrix:
    if not sentences:
        raise ValueError("no sentences to embed")
    cfg.validate()
    if cfg.mode == "cache":
        cached = load_cache(cfg.cache_path)
        missing = [s.index for s in sentences if s.index not in cached]
        if missing:
            raise CacheMiss(missing[0])
        raw = _stack([cached[s.index] for s in sentences])
    else:
        raw = embed_texts([s.text for s in sentences], cfg, transport=transport)
    return EmbeddingMatrix(normalize_rows(raw), source=cfg.mode, model_id=cfg.model_id)


def embed_query(query: str, cfg: EmbeddingProviderConfig, transport=None) -> np.ndarray:
    if cfg.mode == "cache":
        if not cfg.query_cache_path:
            raise ConfigError("a query in cache mode needs query_cache_path")
        cached = load_cache(cfg.query_cache_path)
        if 0 not in cached:
            raise CacheMiss(0)
        raw = _stack([cached[0]])
    else:
        raw = embed_texts([query], cfg, transport=transport)
    return normalize_rows(raw)[0]
