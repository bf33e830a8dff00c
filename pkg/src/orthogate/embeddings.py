"""Pluggable providers of pooled note embeddings.

Two implementations share one small contract (``dim`` plus ``embed``):

* ``FileEmbedder`` serves vectors produced offline by a real encoder, keyed by
  record id, from a JSONL file ``{"id": ..., "vec": [...]}``.
* ``HashEmbedder`` is a deterministic feature-hashing embedder for desk-scale
  runs and tests: no model weights, any script, stable across processes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Mapping, Protocol, runtime_checkable

import numpy as np

from .corpus import ClinicalRecord

DEFAULT_DIM = 768


class EmbeddingError(ValueError):
    def __init__(self, message: str, *, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MissingEmbeddingError(KeyError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"no embedding stored for id {record_id!r}")


@runtime_checkable
class EmbeddingSource(Protocol):
    dim: int

    def embed(self, record: ClinicalRecord) -> np.ndarray: ...


def _check_vector(values, dim: int, line: int | None = None) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != dim:
        raise EmbeddingError(
            f"expected vector of dim {dim}, got shape {vec.shape}", line=line
        )
    if not np.all(np.isfinite(vec)):
        raise EmbeddingError("vector contains a non-finite entry", line=line)
    return vec


class HashEmbedder:
    """Feature-hashing embedder: signed token counts folded into ``dim`` buckets.

    Tokens are whitespace-delimited and lowercased. Each token is hashed with a
    keyed 128-bit blake2b; the two 64-bit halves give the bucket index and the
    sign. The accumulated vector is L2-normalized (the zero vector stays zero),
    so output norm is exactly 0 or 1 within float error.
    """

    kind = "hash"

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 0):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self.seed = seed
        self._key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")

    def embed(self, record: ClinicalRecord) -> np.ndarray:
        return self.embed_text(record.text)

    def embed_text(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in text.split():
            digest = hashlib.blake2b(
                token.lower().encode("utf-8"), digest_size=16, key=self._key
            ).digest()
            index = int.from_bytes(digest[:8], "little") % self.dim
            sign = 1.0 if int.from_bytes(digest[8:], "little") % 2 == 0 else -1.0
            vec[index] += sign
        norm = float(np.sqrt(np.dot(vec, vec)))
        if norm > 0.0:
            vec /= norm
        return vec


class FileEmbedder:
    """Id-indexed embeddings loaded from a JSONL file and validated up front."""

    kind = "file"

    def __init__(self, vectors: Mapping[str, np.ndarray], dim: int, path: str | None = None):
        self.dim = dim
        self.path = path
        self._vectors = dict(vectors)

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._vectors

    def embed(self, record: ClinicalRecord) -> np.ndarray:
        try:
            return self._vectors[record.id]
        except KeyError:
            raise MissingEmbeddingError(record.id) from None


def load_embedding_file(path: str | Path) -> FileEmbedder:
    """Build a FileEmbedder, checking id uniqueness, lengths and finiteness per line."""
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as err:
                raise EmbeddingError(f"invalid JSON: {err.msg}", line=line_no) from None
            if not isinstance(obj, dict) or "id" not in obj or "vec" not in obj:
                raise EmbeddingError('expected {"id": ..., "vec": [...]}', line=line_no)
            record_id = obj["id"]
            if not isinstance(record_id, str) or not record_id:
                raise EmbeddingError("id must be a non-empty string", line=line_no)
            if record_id in vectors:
                raise EmbeddingError(f"duplicate id {record_id!r}", line=line_no)
            values = obj["vec"]
            if not isinstance(values, list) or not values:
                raise EmbeddingError("vec must be a non-empty array", line=line_no)
            if dim is None:
                dim = len(values)
            vectors[record_id] = _check_vector(values, dim, line=line_no)
    if dim is None:
        raise EmbeddingError(f"embedding file {path} is empty")
    return FileEmbedder(vectors, dim=dim, path=str(path))


def save_embedding_file(path: str | Path, vectors: Mapping[str, Iterable[float]]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record_id, vec in vectors.items():
            handle.write(
                json.dumps({"id": record_id, "vec": list(map(float, vec))}) + "\n"
            )


def parse_embedding_spec(spec: str) -> EmbeddingSource:
    """Build a source from a CLI/config spec.

    ``hash:<dim>:<seed>`` (or ``hash:<dim>`` / ``hash``) selects the hashing
    embedder; anything else is a path to an embedding JSONL file.
    """
    if spec == "hash" or spec.startswith("hash:"):
        parts = spec.split(":")
        dim = int(parts[1]) if len(parts) > 1 and parts[1] else DEFAULT_DIM
        seed = int(parts[2]) if len(parts) > 2 and parts[2] else 0
        return HashEmbedder(dim=dim, seed=seed)
    return load_embedding_file(spec)
