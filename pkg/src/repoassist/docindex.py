"""Document-level grounding: chunking, embedding, exact top-k retrieval, persistence.

Search is exact (full scan + sort); corpora here are hundreds of chunks and
determinism matters more than speed. The fallback embedder makes the whole
ingest-to-query path a pure function of the document bytes, so every test can
run without a live embeddings endpoint.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests

from .errors import EmbeddingBackendError, EmptyIndexError, FormatVersionMismatch

CHUNK_SIZE = 1200
CHUNK_OVERLAP = 200
DEFAULT_K = 4

FORMAT_VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class DocChunk:
    chunk_id: str
    source: str
    ordinal: int
    text: str
    embedding: np.ndarray = field(compare=False, repr=False)


@dataclass(frozen=True)
class ScoredChunk:
    chunk: DocChunk
    score: float


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _FNV_MASK
    return h


class FallbackHashEmbedder:
    """Deterministic embedder: FNV-1a 64 of each lowercased whitespace token,
    modulo 256 buckets, token counts L2-normalized."""

    embedder_id = "fallback-hash-v1"
    dimension = 256

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        out = []
        for text in texts:
            tokens = text.lower().split()
            if not tokens:
                raise ValueError("cannot embed empty text")
            v = np.zeros(self.dimension, dtype=np.float64)
            for tok in tokens:
                v[fnv1a64(tok.encode("utf-8")) % self.dimension] += 1.0
            out.append(v / np.linalg.norm(v))
        return out


class RemoteEmbedder:
    """OpenAI-compatible embeddings client (`POST {base}/v1/embeddings`)."""

    def __init__(self, base_url: str, model: str, timeout: float = 30.0, session=None):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.timeout = timeout
        self._session = session or requests.Session()
        self.embedder_id = f"remote:{model}"
        self.dimension: int | None = None

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        for text in texts:
            if not text:
                raise ValueError("cannot embed empty text")
        try:
            resp = self._session.post(
                f"{self.base_url}/v1/embeddings",
                json={"model": self.model, "input": list(texts)},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise EmbeddingBackendError(str(exc)) from exc
        if resp.status_code != 200:
            raise EmbeddingBackendError(f"embeddings endpoint returned {resp.status_code}")
        try:
            data = sorted(resp.json()["data"], key=lambda d: d["index"])
            vectors = [np.asarray(d["embedding"], dtype=np.float64) for d in data]
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbeddingBackendError(f"malformed embeddings response: {exc}") from exc
        if len(vectors) != len(texts):
            raise EmbeddingBackendError("embeddings response cardinality mismatch")
        out = []
        for v in vectors:
            norm = float(np.linalg.norm(v))
            if not np.isfinite(v).all() or norm == 0.0:
                raise EmbeddingBackendError("non-finite or zero embedding returned")
            out.append(v / norm)
        if self.dimension is None and out:
            self.dimension = out[0].shape[0]
        return out


def split_into_chunks(text: str, chunk_size: int = CHUNK_SIZE, overlap: int = CHUNK_OVERLAP) -> list[str]:
    """Paragraph-packing splitter.

    Consecutive paragraphs are packed (joined by a blank line) while the chunk
    stays within chunk_size. A single paragraph longer than chunk_size is cut
    into fixed windows of chunk_size advancing by chunk_size - overlap, so
    adjacent windows share exactly `overlap` characters.
    """
    paragraphs = [p.strip() for p in re.split(r"\n\s*\n", text) if p.strip()]
    chunks: list[str] = []
    packed: list[str] = []
    packed_len = 0

    def flush():
        nonlocal packed_len
        if packed:
            chunks.append("\n\n".join(packed))
            packed.clear()
            packed_len = 0

    step = chunk_size - overlap
    for para in paragraphs:
        if len(para) > chunk_size:
            flush()
            for start in range(0, len(para), step):
                chunks.append(para[start : start + chunk_size])
                if start + chunk_size >= len(para):
                    break
            continue
        joined = packed_len + (2 if packed else 0) + len(para)
        if packed and joined > chunk_size:
            flush()
        packed.append(para)
        packed_len = packed_len + (2 if len(packed) > 1 else 0) + len(para)
    flush()
    return chunks


def _chunk_id(source: str, text: str, ordinal: int) -> str:
    digest = hashlib.sha256(f"{source}\x00{text}".encode("utf-8")).hexdigest()[:16]
    return f"{digest}-{ordinal:04d}"


class DocIndex:
    """In-memory chunk index with exact cosine top-k retrieval."""

    def __init__(self, embedder=None):
        self.embedder = embedder or FallbackHashEmbedder()
        self.chunks: list[DocChunk] = []
        self._matrix: np.ndarray | None = None
        self._frozen = False

    def __len__(self) -> int:
        return len(self.chunks)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "DocIndex":
        self._frozen = True
        return self

    def ingest_document(self, path: str, text: str,
                        chunk_size: int = CHUNK_SIZE, overlap: int = CHUNK_OVERLAP) -> list[DocChunk]:
        if self._frozen:
            raise RuntimeError("index is frozen; ingestion is not allowed")
        if not text:
            raise ValueError("document text must be non-empty")
        base = len(self.chunks)
        texts = split_into_chunks(text, chunk_size, overlap)
        vectors = self.embedder.embed(texts)
        existing = {c.chunk_id for c in self.chunks}
        new_chunks = []
        for offset, (chunk_text, vec) in enumerate(zip(texts, vectors)):
            ordinal = base + offset
            cid = _chunk_id(path, chunk_text, ordinal)
            if cid in existing:
                raise ValueError(f"duplicate chunk id {cid}; was {path} ingested twice?")
            new_chunks.append(DocChunk(cid, path, ordinal, chunk_text, vec))
        self.chunks.extend(new_chunks)
        self._matrix = None
        return new_chunks

    def _ensure_matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.stack([c.embedding for c in self.chunks])
        return self._matrix

    def query(self, text: str, k: int = DEFAULT_K) -> list[ScoredChunk]:
        if not self.chunks:
            raise EmptyIndexError("query against an empty index")
        if k < 1:
            raise ValueError("k must be >= 1")
        q = self.embedder.embed([text])[0]
        scores = self._ensure_matrix() @ q
        # ranking quantizes to 1e-12 so mathematically equal cosines compare
        # equal despite last-ulp float noise and the id tie-break stays canonical
        order = sorted(
            range(len(self.chunks)),
            key=lambda i: (-round(float(scores[i]), 12), self.chunks[i].chunk_id),
        )
        return [ScoredChunk(self.chunks[i], float(scores[i])) for i in order[:k]]

    # -- persistence ----------------------------------------------------

    def save(self, path: str | Path) -> None:
        header = {
            "format_version": FORMAT_VERSION,
            "dimension": int(self.embedder.dimension),
            "embedder_id": self.embedder.embedder_id,
        }
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for c in self.chunks:
                record = {
                    "chunk_id": c.chunk_id,
                    "source": c.source,
                    "ordinal": c.ordinal,
                    "text": c.text,
                    "embedding": [float(x) for x in c.embedding],
                }
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path, embedder=None) -> "DocIndex":
        with open(path, "r", encoding="utf-8") as fh:
            header_line = fh.readline()
            try:
                header = json.loads(header_line)
            except json.JSONDecodeError as exc:
                raise FormatVersionMismatch(f"unreadable index header: {exc}") from exc
            if header.get("format_version") != FORMAT_VERSION:
                raise FormatVersionMismatch(
                    f"index format {header.get('format_version')!r}, expected {FORMAT_VERSION}"
                )
            if embedder is None:
                if header["embedder_id"] != FallbackHashEmbedder.embedder_id:
                    raise ValueError(
                        f"index built with {header['embedder_id']!r}; pass a matching embedder"
                    )
                embedder = FallbackHashEmbedder()
            elif embedder.embedder_id != header["embedder_id"]:
                raise ValueError(
                    f"embedder mismatch: index has {header['embedder_id']!r}, "
                    f"got {embedder.embedder_id!r}"
                )
            index = cls(embedder)
            dimension = int(header["dimension"])
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                vector = np.asarray(rec["embedding"], dtype=np.float64)
                if vector.shape != (dimension,):
                    raise ValueError(
                        f"chunk {rec['chunk_id']} has dimension {vector.shape[0]}, "
                        f"index header says {dimension}"
                    )
                index.chunks.append(
                    DocChunk(rec["chunk_id"], rec["source"], rec["ordinal"],
                             rec["text"], vector)
                )
        index.freeze()
        return index


def build_index_from_dir(docs_dir: str | Path, embedder=None,
                         patterns: tuple[str, ...] = ("*.md", "*.txt")) -> DocIndex:
    """Ingest every matching text/markdown file under docs_dir (recursive,
    lexicographic order) into a fresh index."""
    root = Path(docs_dir)
    index = DocIndex(embedder)
    paths = sorted(p for pattern in patterns for p in root.rglob(pattern))
    for p in paths:
        index.ingest_document(str(p.relative_to(root)), p.read_text(encoding="utf-8"))
    return index
