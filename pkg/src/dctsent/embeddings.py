"""Word-vector tables, tokenization and sentence lookup.

Tables are read from the plain text vector format used by fastText and
word2vec exports: an optional ``<count> <dim>`` header, then one
``<token> <f1> ... <fd>`` line per word.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, EmptyInputError, ParseError, UsageError

logger = logging.getLogger(__name__)

OOV_POLICIES = ("skip", "zero")


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable vocabulary -> vector table, rows in file order."""

    words: tuple[str, ...]
    vectors: np.ndarray
    source_path: str = ""
    index: dict[str, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[1] < 1 or vectors.shape[0] < 1:
            raise EmptyInputError("embedding table needs at least one entry of dim >= 1")
        if vectors.shape[0] != len(self.words):
            raise DimensionMismatchError(
                f"{len(self.words)} words but {vectors.shape[0]} vectors"
            )
        if not np.isfinite(vectors).all():
            raise ParseError("embedding table contains non-finite values")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        if self.index is None:
            index = {}
            for i, w in enumerate(self.words):
                index.setdefault(w, i)
            if len(index) != len(self.words):
                raise ParseError("duplicate tokens in embedding table")
            object.__setattr__(self, "index", index)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, token):
        return token in self.index

    def __getitem__(self, token) -> np.ndarray:
        return self.vectors[self.index[token]]

    def items(self):
        return zip(self.words, self.vectors)


def _parse_floats(parts, lineno):
    try:
        values = [float(x) for x in parts]
    except ValueError as exc:
        raise ParseError(f"malformed float ({exc})", line=lineno) from None
    if not all(math.isfinite(v) for v in values):
        raise ParseError("non-finite value", line=lineno)
    return values


def _is_header(parts):
    return len(parts) == 2 and all(p.isdigit() for p in parts)


def load_table(path, limit: int | None = None) -> EmbeddingTable:
    """Read a text vector file.

    The header is optional; without one the dimension comes from the first
    data line. Duplicate tokens keep their first occurrence. ``limit`` caps the
    number of entries kept.
    """
    if limit is not None and limit < 1:
        raise UsageError("limit must be a positive integer")
    words: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    dim = None
    declared = None
    n_dupes = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.rstrip("\r\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if lineno == 1 and _is_header(parts):
                declared, dim = int(parts[0]), int(parts[1])
                if dim < 1:
                    raise ParseError("header dimension must be positive", line=1)
                continue
            if limit is not None and len(words) >= limit:
                break
            token, values = parts[0], _parse_floats(parts[1:], lineno)
            if dim is None:
                dim = len(values)
                if dim < 1:
                    raise ParseError("entry has no vector components", line=lineno)
            elif len(values) != dim:
                raise DimensionMismatchError(
                    f"expected {dim} components, found {len(values)}", line=lineno
                )
            if token in seen:
                n_dupes += 1
                continue
            seen.add(token)
            words.append(token)
            rows.append(values)
    if not words:
        raise EmptyInputError(f"{path}: no embedding entries")
    if n_dupes:
        logger.warning("%s: ignored %d duplicate token line(s)", path, n_dupes)
    if declared is not None and limit is None and declared != len(words) + n_dupes:
        logger.warning("%s: header declares %d entries, read %d", path, declared, len(words) + n_dupes)
    return EmbeddingTable(tuple(words), np.array(rows, dtype=np.float64), source_path=os.fspath(path))


def write_table(table: EmbeddingTable, path, header: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as f:
        if header:
            f.write(f"{len(table)} {table.dim}\n")
        for word, vec in table.items():
            f.write(word + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def tokenize(sentence: str, lowercase: bool = True) -> list[str]:
    if lowercase:
        sentence = sentence.lower()
    return sentence.split()


@dataclass(frozen=True)
class SentenceMatrix:
    """N x d word vectors of one sentence. ``N == 0`` marks an empty sentence."""

    rows: np.ndarray
    n_oov: int = 0

    @property
    def n_words(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.rows.shape[0] == 0

    @classmethod
    def from_rows(cls, rows) -> "SentenceMatrix":
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        if not np.isfinite(rows).all():
            raise ParseError("sentence matrix contains non-finite values")
        return cls(rows)


def token_indices(table: EmbeddingTable, tokens: Sequence[str], policy: str = "skip"):
    """Row indices for ``tokens``; -1 stands for a zero row. Returns (indices, n_oov)."""
    if policy not in OOV_POLICIES:
        raise UsageError(f"unknown OOV policy {policy!r}")
    index = table.index
    out = []
    n_oov = 0
    for tok in tokens:
        i = index.get(tok)
        if i is None:
            n_oov += 1
            if policy == "zero":
                out.append(-1)
        else:
            out.append(i)
    return out, n_oov


def lookup_sentence(table: EmbeddingTable, tokens: Iterable[str], policy: str = "skip") -> SentenceMatrix:
    idx, n_oov = token_indices(table, list(tokens), policy)
    rows = np.zeros((len(idx), table.dim))
    for r, i in enumerate(idx):
        if i >= 0:
            rows[r] = table.vectors[i]
    return SentenceMatrix(rows, n_oov=n_oov)
