"""Fixed-length sentence vectors from word-vector sequences.

Two encoders: the plain average of the word vectors, and DCT-II along the
sentence axis, applied to every embedding feature independently. For a
sentence of N words with column signal v_0..v_{N-1} the k-th coefficient is

    c[k] = sqrt(2/N) * sum_n v_n * cos(pi/N * (n + 1/2) * k)

with the same sqrt(2/N) scale for every k (so c[0] = sqrt(2N) * mean, and
the transform is not energy preserving). The vector ``c[0:K]`` concatenates
coefficient blocks 0..K, each block holding all d features, giving (K+1)*d
values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _backend
from ._fallback import dct_basis
from .embeddings import EmbeddingTable, SentenceMatrix, token_indices, tokenize
from .errors import EmptyInputError, EmptySentenceError, ParseError, UsageError

MAX_K = 4
EMPTY_MODES = ("error", "zero")
SHORT_MODES = ("zero", "raw")


@dataclass(frozen=True)
class EncoderSpec:
    kind: str
    k: int | None = None
    allow_large_k: bool = False

    def __post_init__(self):
        if self.kind == "avg":
            if self.k is not None:
                raise UsageError("the avg encoder takes no k")
        elif self.kind == "dct":
            if self.k is None:
                raise UsageError("the dct encoder requires k")
            if self.k < 0:
                raise UsageError(f"k must be >= 0, got {self.k}")
            if self.k > MAX_K and not self.allow_large_k:
                raise UsageError(f"k must be in [0, {MAX_K}], got {self.k}")
        else:
            raise UsageError(f"unknown encoder kind {self.kind!r}")

    @property
    def n_coef(self) -> int:
        return 1 if self.kind == "avg" else self.k + 1

    def width(self, dim: int) -> int:
        return self.n_coef * dim

    def describe(self) -> str:
        if self.kind == "avg":
            return "AVG"
        return "c[0]" if self.k == 0 else f"c[0:{self.k}]"

    @classmethod
    def parse(cls, text: str) -> "EncoderSpec":
        """Accept ``avg``, ``AVG``, ``c[0]``, ``c[0:2]`` or ``dct:2``."""
        t = text.strip()
        if t.lower() == "avg":
            return cls("avg")
        if t.startswith("c[") and t.endswith("]"):
            body = t[2:-1]
            k = 0 if body == "0" else int(body.split(":")[1])
            return cls("dct", k)
        if t.lower().startswith("dct:"):
            return cls("dct", int(t[4:]))
        raise UsageError(f"cannot parse encoder {text!r}")


def dct_coefficient(signal, k: int) -> float:
    """DCT-II coefficient ``k`` of a 1-D signal, evaluated as written for any k >= 0."""
    v = np.asarray(signal, dtype=np.float64)
    n_words = v.shape[0]
    if n_words == 0:
        raise EmptyInputError("cannot transform an empty signal")
    if k < 0:
        raise UsageError("coefficient index must be >= 0")
    if not np.isfinite(v).all():
        raise ParseError("signal contains non-finite values")
    phase = np.pi / n_words * (np.arange(n_words) + 0.5) * k
    return math.sqrt(2.0 / n_words) * float(np.dot(v, np.cos(phase)))


def _check_empty(matrix: SentenceMatrix, empty: str) -> bool:
    if empty not in EMPTY_MODES:
        raise UsageError(f"unknown empty-sentence mode {empty!r}")
    if matrix.is_empty:
        if empty == "error":
            raise EmptySentenceError()
        return True
    return False


def encode_dct(matrix: SentenceMatrix, K: int, empty: str = "error", short: str = "zero") -> np.ndarray:
    if short not in SHORT_MODES:
        raise UsageError(f"unknown short-sentence mode {short!r}")
    if _check_empty(matrix, empty):
        return np.zeros((K + 1) * matrix.dim)
    basis = dct_basis(matrix.n_words, K + 1, raw_short=(short == "raw"))
    # one reduction per coefficient, so block k never depends on K
    return np.concatenate([(b[:, None] * matrix.rows).sum(axis=0) for b in basis])


def encode_avg(matrix: SentenceMatrix, empty: str = "error") -> np.ndarray:
    if _check_empty(matrix, empty):
        return np.zeros(matrix.dim)
    return matrix.rows.mean(axis=0)


def encode(matrix: SentenceMatrix, spec: EncoderSpec, empty: str = "error", short: str = "zero") -> np.ndarray:
    if spec.kind == "avg":
        return encode_avg(matrix, empty)
    return encode_dct(matrix, spec.k, empty, short)


@dataclass
class CorpusStats:
    n_lines: int = 0
    n_tokens: int = 0
    n_oov: int = 0
    n_empty: int = 0
    skipped_lines: list[int] = field(default_factory=list)

    @property
    def oov_rate(self) -> float:
        return self.n_oov / self.n_tokens if self.n_tokens else 0.0

    def to_dict(self) -> dict:
        return {
            "n_lines": self.n_lines,
            "n_tokens": self.n_tokens,
            "n_oov": self.n_oov,
            "oov_rate": self.oov_rate,
            "n_empty": self.n_empty,
            "skipped_lines": list(self.skipped_lines),
        }


def encode_corpus(
    table: EmbeddingTable,
    sentences: Iterable[str],
    spec: EncoderSpec,
    policy: str = "skip",
    lowercase: bool = True,
    empty: str = "error",
    short: str = "zero",
    skip_bad: bool = False,
    dtype=np.float64,
    threads: int | None = None,
) -> tuple[np.ndarray, CorpusStats]:
    """Encode one sentence per line; returns (rows x width matrix, stats).

    A line with no usable tokens raises ``EmptySentenceError`` naming the
    line, unless ``empty="zero"`` (zero row) or ``skip_bad`` (line dropped
    and listed in ``stats.skipped_lines``).
    """
    if empty not in EMPTY_MODES:
        raise UsageError(f"unknown empty-sentence mode {empty!r}")
    if short not in SHORT_MODES:
        raise UsageError(f"unknown short-sentence mode {short!r}")
    stats = CorpusStats()
    idx: list[int] = []
    offsets = [0]
    for lineno, line in enumerate(sentences, start=1):
        stats.n_lines += 1
        tokens = tokenize(line, lowercase)
        rows, n_oov = token_indices(table, tokens, policy)
        stats.n_tokens += len(tokens)
        stats.n_oov += n_oov
        if not rows:
            stats.n_empty += 1
            if empty == "error":
                if skip_bad:
                    stats.skipped_lines.append(lineno)
                    continue
                raise EmptySentenceError(line=lineno)
        idx.extend(rows)
        offsets.append(len(idx))

    n_sent = len(offsets) - 1
    out = np.zeros((n_sent, spec.width(table.dim)), dtype=np.float64)
    if n_sent:
        _backend.encode_ragged(
            np.ascontiguousarray(table.vectors),
            np.asarray(idx, dtype=np.int64),
            np.asarray(offsets, dtype=np.int64),
            spec.n_coef,
            spec.kind == "avg",
            short == "raw",
            out,
            _backend.resolve_threads(threads),
        )
    return out.astype(dtype, copy=False), stats
