"""Embedding providers and the on-disk vector cache.

Vectors are cached as line-delimited JSON records keyed by (model id,
content hash of the text), so any audit is replayable offline once the
cache is populated. Completed batches are flushed to disk before the next
provider call, so a mid-run provider failure preserves partial progress.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np


class ProviderError(RuntimeError):
    """Raised when an embedding or LLM provider fails after retries."""


def content_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EmbeddingMatrix:
    """One vector per question, all of the same dimension."""

    vectors: np.ndarray
    model_id: str
    question_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        arr = np.asarray(self.vectors, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("embedding vectors must form a 2-d array")
        if arr.shape[0] != len(self.question_ids):
            raise ValueError("one vector per question id required")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding vectors contain non-finite values")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(norms == 0.0):
            bad = self.question_ids[int(np.argmax(norms == 0.0))]
            raise ValueError(f"all-zero embedding vector for question {bad!r}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "vectors", arr)
        object.__setattr__(self, "question_ids", tuple(self.question_ids))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector_for(self, qid: str) -> np.ndarray:
        try:
            return self.vectors[self.question_ids.index(qid)]
        except ValueError:
            raise KeyError(f"no embedding for question {qid!r}") from None


@dataclass
class EmbeddingProviderConfig:
    """Connection settings; credentials come from the environment only."""

    model_id: str
    batch_size: int = 100
    max_attempts: int = 3
    backoff_s: float = 0.25
    cache_path: str | Path | None = None
    endpoint: str | None = None
    api_key_env: str = "EMBEDDINGS_API_KEY"

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


class EmbeddingProvider(Protocol):
    model_id: str

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]: ...


class HashEmbeddingProvider:
    """Deterministic offline provider: each text hashes to a seed that draws
    a unit vector. Useful for tests and synthetic sessions; carries no
    semantic signal."""

    def __init__(self, dim: int = 64, model_id: str | None = None):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim
        self.model_id = model_id or f"hash-{dim}"

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        out = []
        for text in texts:
            digest = hashlib.sha256(f"{self.model_id}\x00{text}".encode()).digest()
            seed = int.from_bytes(digest[:8], "big")
            vec = np.random.default_rng(seed).normal(size=self.dim)
            vec /= np.linalg.norm(vec)
            out.append(vec.tolist())
        return out


class CacheOnlyProvider:
    """Never calls out; any cache miss is an error naming the missing text."""

    def __init__(self, model_id: str):
        self.model_id = model_id

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        preview = texts[0][:60] if texts else ""
        raise ProviderError(
            f"model {self.model_id!r} is cache-only but {len(texts)} text(s) "
            f"are not cached (first: {preview!r}); supply a live provider or "
            "a complete cache"
        )


class HttpEmbeddingProvider:
    """OpenAI-style embeddings endpoint: POST {model, input} -> data[i].embedding."""

    def __init__(self, config: EmbeddingProviderConfig):
        if not config.endpoint:
            config.endpoint = os.environ.get("EMBEDDINGS_ENDPOINT")
        if not config.endpoint:
            raise ProviderError(
                "no embeddings endpoint configured (set EMBEDDINGS_ENDPOINT)"
            )
        self.config = config
        self.model_id = config.model_id

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        import requests

        headers = {}
        key = os.environ.get(self.config.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        resp = requests.post(
            self.config.endpoint,
            json={"model": self.model_id, "input": list(texts)},
            headers=headers,
            timeout=60,
        )
        if resp.status_code != 200:
            raise ProviderError(
                f"embeddings endpoint returned {resp.status_code}: {resp.text[:200]}"
            )
        payload = resp.json()
        return [item["embedding"] for item in payload["data"]]


class SentenceTransformerProvider:
    """Local sentence-transformers model; imported lazily so the dependency
    stays optional."""

    def __init__(self, model_id: str = "all-MiniLM-L6-v2"):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:  # pragma: no cover - environment dependent
            raise ProviderError("sentence-transformers is not installed") from exc
        self.model_id = f"sbert:{model_id}"
        self._model = SentenceTransformer(model_id)

    def embed_batch(self, texts: Sequence[str]) -> list[list[float]]:  # pragma: no cover
        return self._model.encode(list(texts), convert_to_numpy=True).tolist()


class EmbeddingCache:
    """Append-only JSONL store of {key, model, vector}. Writes are
    serialized; reads hit an in-memory index."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._index: dict[tuple[str, str], list[float]] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    self._index[(rec["model"], rec["key"])] = rec["vector"]

    def get(self, model_id: str, text: str) -> list[float] | None:
        return self._index.get((model_id, content_key(text)))

    def put_many(self, model_id: str, texts: Sequence[str], vectors) -> None:
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                for text, vec in zip(texts, vectors):
                    key = content_key(text)
                    if (model_id, key) in self._index:
                        continue
                    self._index[(model_id, key)] = list(vec)
                    fh.write(
                        json.dumps(
                            {"key": key, "model": model_id, "vector": list(vec)}
                        )
                        + "\n"
                    )

    def __len__(self) -> int:
        return len(self._index)


def embed_questions(
    texts: Sequence[str],
    provider: EmbeddingProvider,
    ids: Sequence[str] | None = None,
    cache: EmbeddingCache | None = None,
    batch_size: int = 100,
    max_attempts: int = 3,
    backoff_s: float = 0.25,
) -> EmbeddingMatrix:
    """Embed texts through the provider, batched and cached.

    Cached texts cost no provider request; misses go out in ceil(misses /
    batch_size) batches, each retried up to ``max_attempts`` times with
    backoff. Every returned batch is validated (uniform dimension, non-zero)
    and written to the cache before the next request.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    texts = list(texts)
    for i, t in enumerate(texts):
        if not t or not t.strip():
            raise ValueError(f"text {i} is empty")
    if ids is None:
        ids = tuple(content_key(t)[:16] for t in texts)
    if len(ids) != len(texts):
        raise ValueError("ids and texts must align")

    resolved: dict[str, list[float]] = {}
    misses: list[str] = []
    for t in texts:
        if t in resolved:
            continue
        hit = cache.get(provider.model_id, t) if cache is not None else None
        if hit is not None:
            resolved[t] = hit
        elif t not in misses:
            misses.append(t)

    dim: int | None = None
    if resolved:
        dims = {len(v) for v in resolved.values()}
        if len(dims) != 1:
            raise ValueError(f"cached vectors have mixed dimensions: {sorted(dims)}")
        dim = dims.pop()

    for start in range(0, len(misses), batch_size):
        batch = misses[start : start + batch_size]
        last_error: Exception | None = None
        vectors = None
        for attempt in range(max_attempts):
            try:
                vectors = provider.embed_batch(batch)
                break
            except ProviderError:
                raise
            except Exception as exc:  # transient transport errors
                last_error = exc
                if attempt + 1 < max_attempts:
                    time.sleep(backoff_s * (2**attempt))
        if vectors is None:
            raise ProviderError(
                f"provider {provider.model_id!r} failed after {max_attempts} "
                f"attempts: {last_error}"
            )
        if len(vectors) != len(batch):
            raise ValueError(
                f"provider returned {len(vectors)} vectors for {len(batch)} texts"
            )
        for text, vec in zip(batch, vectors):
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ValueError(
                    f"dimension mismatch: got {len(vec)}, expected {dim}"
                )
            if not any(vec) or not all(math.isfinite(x) for x in vec):
                raise ValueError("provider returned a zero or non-finite vector")
            resolved[text] = list(vec)
        if cache is not None:
            cache.put_many(provider.model_id, batch, [resolved[t] for t in batch])

    matrix = np.asarray([resolved[t] for t in texts], dtype=np.float64)
    return EmbeddingMatrix(
        vectors=matrix, model_id=provider.model_id, question_ids=tuple(ids)
    )


def make_provider(
    spec: str, config: EmbeddingProviderConfig | None = None
) -> EmbeddingProvider:
    """Resolve a provider from a CLI-style spec: ``hash``, ``hash-32``,
    ``cache:<model>``, ``http:<model>``, or ``sbert:<model>``."""
    if spec == "hash" or (spec.startswith("hash-") and spec[5:].isdigit()):
        dim = int(spec[5:]) if spec.startswith("hash-") else 64
        return HashEmbeddingProvider(dim=dim)
    if spec.startswith("cache:"):
        return CacheOnlyProvider(spec.split(":", 1)[1])
    if spec.startswith("http:"):
        cfg = config or EmbeddingProviderConfig(model_id=spec.split(":", 1)[1])
        cfg.model_id = spec.split(":", 1)[1]
        return HttpEmbeddingProvider(cfg)
    if spec.startswith("sbert:"):
        return SentenceTransformerProvider(spec.split(":", 1)[1])
    raise ValueError(f"unknown embedding provider spec {spec!r}")
