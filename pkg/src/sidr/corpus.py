"""Corpora of fixed-length document vectors.

A corpus is an ordered list of documents, each with a unique id, an
optional raw text, an optional class label, and a feature vector. Rows
may arrive as text only; :func:`embed_tfidf` turns them into vectors
without any external embedding service. :func:`synth_clusters` makes
labeled Gaussian-cluster corpora for simulation and benchmarking.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np


class CorpusError(ValueError):
    """A corpus file or construction violates a corpus invariant."""


@dataclass(frozen=True, eq=False)
class DocRecord:
    """One document: unique id, optional text/label, optional vector."""

    id: str
    text: str | None = None
    label: int | None = None
    vector: np.ndarray | None = None

    def __post_init__(self):
        if self.vector is not None:
            object.__setattr__(
                self, "vector", np.asarray(self.vector, dtype=np.float64)
            )

    def __eq__(self, other):
        if not isinstance(other, DocRecord):
            return NotImplemented
        if (self.id, self.text, self.label) != (other.id, other.text, other.label):
            return False
        if (self.vector is None) != (other.vector is None):
            return False
        return self.vector is None or np.array_equal(self.vector, other.vector)


class Corpus:
    """Ordered, validated collection of documents.

    Invariants enforced at construction: non-empty, unique ids, every
    vector finite and of one shared dimension D >= 2, and labels (when
    present) forming a contiguous range 0..K-1.
    """

    def __init__(self, docs: Sequence[DocRecord]):
        docs = list(docs)
        if not docs:
            raise CorpusError("corpus must contain at least one document")
        seen: set[str] = set()
        dim = 0
        for row, doc in enumerate(docs):
            if not doc.id:
                raise CorpusError(f"row {row}: empty id")
            if doc.id in seen:
                raise CorpusError(f"row {row}: duplicate id {doc.id!r}")
            seen.add(doc.id)
            if doc.vector is None and doc.text is None:
                raise CorpusError(f"row {row} ({doc.id!r}): neither vector nor text")
            if doc.label is not None and doc.label < 0:
                raise CorpusError(f"row {row} ({doc.id!r}): negative label")
            if doc.vector is not None:
                if doc.vector.ndim != 1 or doc.vector.shape[0] < 2:
                    raise CorpusError(
                        f"row {row} ({doc.id!r}): vector must be 1-D with length >= 2"
                    )
                if not np.all(np.isfinite(doc.vector)):
                    raise CorpusError(f"row {row} ({doc.id!r}): non-finite value")
                if dim == 0:
                    dim = doc.vector.shape[0]
                elif doc.vector.shape[0] != dim:
                    raise CorpusError(
                        f"row {row} ({doc.id!r}): vector length "
                        f"{doc.vector.shape[0]} != corpus dim {dim}"
                    )
        labels = sorted({d.label for d in docs if d.label is not None})
        if labels and labels != list(range(len(labels))):
            raise CorpusError(f"labels must form a contiguous 0..K-1 range, got {labels}")
        self.docs: list[DocRecord] = docs
        self.dim: int = dim
        self.label_count: int = len(labels)
        self._index = {d.id: i for i, d in enumerate(docs)}

    def __len__(self) -> int:
        return len(self.docs)

    def __eq__(self, other):
        if not isinstance(other, Corpus):
            return NotImplemented
        return self.docs == other.docs

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.docs]

    @property
    def is_vectorized(self) -> bool:
        return all(d.vector is not None for d in self.docs)

    def index_of(self, doc_id: str) -> int:
        if doc_id not in self._index:
            raise KeyError(f"unknown document id {doc_id!r}")
        return self._index[doc_id]

    def matrix(self) -> np.ndarray:
        """All vectors as an (N, D) array. Requires a fully vectorized corpus."""
        if not self.is_vectorized:
            raise CorpusError("corpus has unvectorized rows; call embed_tfidf first")
        return np.stack([d.vector for d in self.docs])

    def labels_array(self) -> np.ndarray:
        """All labels as an (N,) int array. Requires every row labeled."""
        if any(d.label is None for d in self.docs):
            raise CorpusError("corpus has unlabeled rows")
        return np.array([d.label for d in self.docs], dtype=np.int64)


def load_corpus(path: str | Path, fmt: str = "jsonl") -> Corpus:
    """Load a corpus from a JSONL or CSV file.

    JSONL rows: {"id": str, "text": str|null, "label": int|null,
    "vector": [float]|null}. CSV header: id,label,v0..v{D-1}.
    """
    path = Path(path)
    if fmt == "jsonl":
        docs = _read_jsonl(path)
    elif fmt == "csv":
        docs = _read_csv(path)
    else:
        raise ValueError(f"unknown corpus format {fmt!r}")
    return Corpus(docs)


def _read_jsonl(path: Path) -> list[DocRecord]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for row, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"row {row}: invalid JSON ({exc})") from exc
            if "id" not in obj:
                raise CorpusError(f"row {row}: missing id")
            vector = obj.get("vector")
            docs.append(
                DocRecord(
                    id=str(obj["id"]),
                    text=obj.get("text"),
                    label=obj.get("label"),
                    vector=None if vector is None else np.asarray(vector, dtype=np.float64),
                )
            )
    return docs


def _read_csv(path: Path) -> list[DocRecord]:
    docs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["id", "label"]:
            raise CorpusError("CSV header must start with id,label")
        for row, cells in enumerate(reader):
            if not cells:
                continue
            if len(cells) != len(header):
                raise CorpusError(f"row {row}: expected {len(header)} cells, got {len(cells)}")
            label = int(cells[1]) if cells[1] != "" else None
            try:
                vector = np.array([float(c) for c in cells[2:]], dtype=np.float64)
            except ValueError as exc:
                raise CorpusError(f"row {row}: non-numeric vector entry") from exc
            docs.append(DocRecord(id=cells[0], label=label, vector=vector))
    return docs


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as JSONL. Float round-trip is exact (repr-based)."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.docs:
            obj = {
                "id": doc.id,
                "text": doc.text,
                "label": doc.label,
                "vector": None if doc.vector is None else doc.vector.tolist(),
            }
            fh.write(json.dumps(obj) + "\n")


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop tokens shorter than 2."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2]


def embed_tfidf(corpus: Corpus, target_dim: int = 128, clamp_rank: bool = False) -> Corpus:
    """Vectorize a text corpus: sublinear TF-IDF, L2 rows, truncated SVD.

    Deterministic given corpus order and the fixed tokenization rules.
    Component signs follow a term-space convention so that permuting the
    documents permutes the output rows and nothing else. With clamp_rank,
    an over-large target_dim is lowered to the achievable rank instead of
    raising.
    """
    if any(d.text is None for d in corpus.docs):
        raise CorpusError("embed_tfidf requires text on every document")
    token_lists = [tokenize(d.text) for d in corpus.docs]
    vocab = sorted({t for tokens in token_lists for t in tokens})
    if not vocab:
        raise CorpusError("empty vocabulary after tokenization")
    if clamp_rank:
        target_dim = min(target_dim, len(vocab))
    if not 2 <= target_dim <= len(vocab):
        raise CorpusError(
            f"target_dim must be in [2, vocabulary size {len(vocab)}], got {target_dim}"
        )
    term_index = {t: i for i, t in enumerate(vocab)}

    n = len(corpus)
    df = np.zeros(len(vocab))
    for tokens in token_lists:
        for t in set(tokens):
            df[term_index[t]] += 1
    idf = np.log((1.0 + n) / (1.0 + df)) + 1.0

    weights = np.zeros((n, len(vocab)))
    for i, tokens in enumerate(token_lists):
        counts: dict[int, int] = {}
        for t in tokens:
            j = term_index[t]
            counts[j] = counts.get(j, 0) + 1
        for j, c in counts.items():
            weights[i, j] = (1.0 + math.log(c)) * idf[j]
        norm = np.linalg.norm(weights[i])
        if norm > 0:
            weights[i] /= norm

    u, s, vt = np.linalg.svd(weights, full_matrices=False)
    rank = int(np.sum(s > s[0] * max(weights.shape) * np.finfo(np.float64).eps))
    if clamp_rank:
        target_dim = max(2, min(target_dim, rank))
    if target_dim > rank:
        raise CorpusError(
            f"target_dim {target_dim} exceeds achievable rank {rank} of the TF-IDF matrix"
        )
    # Deterministic sign convention anchored in term space, so the result is
    # equivariant under document-order permutations.
    for j in range(target_dim):
        anchor = int(np.argmax(np.abs(vt[j])))
        if vt[j, anchor] < 0:
            vt[j] = -vt[j]
            u[:, j] = -u[:, j]
    reduced = u[:, :target_dim] * s[:target_dim]

    docs = [
        DocRecord(id=d.id, text=d.text, label=d.label, vector=reduced[i])
        for i, d in enumerate(corpus.docs)
    ]
    return Corpus(docs)


def _simplex_centers(k: int, dim: int) -> np.ndarray:
    """k cluster centers with unit pairwise separation, embedded in R^dim."""
    if dim < k - 1:
        raise CorpusError(f"dim {dim} too small for {k} unit-separated centers (need >= {k - 1})")
    # Scaled basis vectors have unit pairwise distance; rotate their
    # (k-1)-dimensional affine hull onto the first k-1 coordinates.
    raw = np.eye(k) / math.sqrt(2.0)
    raw -= raw.mean(axis=0)
    _, _, vt = np.linalg.svd(np.ones((1, k)))
    basis = vt[1:]  # orthonormal basis of the sum-zero subspace
    coords = raw @ basis.T
    centers = np.zeros((k, dim))
    centers[:, : k - 1] = coords
    return centers


def synth_clusters(
    k: int, n_per: int, dim: int, spread: float, seed: int
) -> Corpus:
    """Labeled corpus of k isotropic Gaussian clusters at unit-separated centers."""
    if k < 2:
        raise CorpusError(f"k must be >= 2, got {k}")
    if n_per < 1:
        raise CorpusError(f"n_per must be >= 1, got {n_per}")
    if dim < 2:
        raise CorpusError(f"dim must be >= 2, got {dim}")
    if spread < 0:
        raise CorpusError(f"spread must be >= 0, got {spread}")
    centers = _simplex_centers(k, dim)
    rng = np.random.default_rng(seed)
    docs = []
    for c in range(k):
        points = centers[c] + spread * rng.standard_normal((n_per, dim))
        for i in range(n_per):
            docs.append(DocRecord(id=f"d{c * n_per + i:04d}", label=c, vector=points[i]))
    return Corpus(docs)


BUNDLED_NAMES = ("articles4", "notes3")


def bundled_corpus(name: str) -> Corpus:
    """Load one of the text corpora shipped with the package.

    "articles4": 62 short articles in 4 classes (15/13/23/11).
    "notes3": 201 short notes in 3 balanced classes.
    """
    if name not in BUNDLED_NAMES:
        raise CorpusError(f"unknown bundled corpus {name!r}; available: {BUNDLED_NAMES}")
    ref = resources.files("sidr.data").joinpath(f"{name}.jsonl")
    with resources.as_file(ref) as path:
        return load_corpus(path, fmt="jsonl")
