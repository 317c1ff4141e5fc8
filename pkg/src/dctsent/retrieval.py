"""Sentence translation retrieval by exact cosine nearest neighbour.

Query i's gold answer is candidate i (line-aligned test sets). Scores are
computed block by block against the full candidate set, so memory stays at
``block x M`` regardless of corpus size.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import _backend
from .alignment import LinearMap, apply_map
from .errors import DimensionMismatchError, EmptyInputError, InvalidInputError

BLOCK = 512


def _unit_rows(x):
    norms = np.linalg.norm(x, axis=1)
    nonzero = norms > 0
    out = np.zeros_like(x)
    out[nonzero] = x[nonzero] / norms[nonzero, None]
    return out, nonzero


def _check_pair(queries, candidates):
    q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    c = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    if q.shape[1] != c.shape[1]:
        raise DimensionMismatchError(f"query width {q.shape[1]} != candidate width {c.shape[1]}")
    if q.shape[0] == 0 or c.shape[0] == 0:
        raise EmptyInputError("retrieval needs at least one query and one candidate")
    if not (np.isfinite(q).all() and np.isfinite(c).all()):
        raise InvalidInputError("retrieval input contains non-finite values")
    return q, c


def _block_scores(qn, q_nonzero, cn, c_nonzero):
    scores = qn @ cn.T
    # zero vs nonzero never wins; zero vs zero scores 0 (already 0 from the product)
    scores[np.ix_(q_nonzero, ~c_nonzero)] = -np.inf
    scores[np.ix_(~q_nonzero, c_nonzero)] = -np.inf
    return scores


def _run_blocks(fn, n_rows, threads):
    starts = range(0, n_rows, BLOCK)
    if threads <= 1 or n_rows <= BLOCK:
        return [fn(lo) for lo in starts]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, starts))


def retrieve_topk(queries, candidates, k: int = 1, threads: int | None = None) -> np.ndarray:
    """Indices of the ``k`` best candidates per query, best first.

    Equal scores rank by lower candidate index.
    """
    q, c = _check_pair(queries, candidates)
    k = min(k, c.shape[0])
    qn, q_nz = _unit_rows(q)
    cn, c_nz = _unit_rows(c)

    def block(lo):
        hi = min(lo + BLOCK, q.shape[0])
        scores = _block_scores(qn[lo:hi], q_nz[lo:hi], cn, c_nz)
        if k == 1:
            return np.argmax(scores, axis=1)[:, None]
        return np.argsort(-scores, axis=1, kind="stable")[:, :k]

    parts = _run_blocks(block, q.shape[0], _backend.resolve_threads(threads))
    return np.vstack(parts)


def retrieve_top1(queries, candidates, threads: int | None = None) -> np.ndarray:
    return retrieve_topk(queries, candidates, 1, threads)[:, 0]


@dataclass(frozen=True)
class RetrievalReport:
    direction: str
    n_queries: int
    correct_at_1: int
    accuracy: float
    encoder: str
    solver: str
    oov_policy: str

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_direction(
    source_vecs,
    target_vecs,
    map: LinearMap | None = None,
    direction: str = "SRC→TGT",
    encoder: str = "unspecified",
    oov_policy: str = "unspecified",
    threads: int | None = None,
) -> RetrievalReport:
    src = np.atleast_2d(np.asarray(source_vecs, dtype=np.float64))
    tgt = np.atleast_2d(np.asarray(target_vecs, dtype=np.float64))
    if src.shape[0] != tgt.shape[0]:
        raise DimensionMismatchError(f"{src.shape[0]} source rows vs {tgt.shape[0]} target rows")
    if map is not None:
        src = apply_map(map, src)
    hits = retrieve_top1(src, tgt, threads)
    correct = int(np.count_nonzero(hits == np.arange(src.shape[0])))
    return RetrievalReport(
        direction=direction,
        n_queries=src.shape[0],
        correct_at_1=correct,
        accuracy=correct / src.shape[0],
        encoder=encoder,
        solver=map.solver if map is not None else "none",
        oov_policy=oov_policy,
    )


def evaluate_zero_shot(
    lang1_vecs,
    lang2_vecs,
    map1: LinearMap,
    map2: LinearMap,
    direction: str = "Lang1→Lang2",
    encoder: str = "unspecified",
    oov_policy: str = "unspecified",
    threads: int | None = None,
) -> RetrievalReport:
    """Map both sides into the pivot space independently, then retrieve."""
    if map1.width != map2.width:
        raise DimensionMismatchError(f"maps target widths {map1.width} and {map2.width}")
    a = apply_map(map1, lang1_vecs)
    b = apply_map(map2, lang2_vecs)
    report = evaluate_direction(a, b, None, direction, encoder, oov_policy, threads)
    solver = map1.solver if map1.solver == map2.solver else f"{map1.solver}+{map2.solver}"
    return RetrievalReport(**{**report.to_dict(), "solver": solver})


def accuracy_at_k(source_vecs, target_vecs, k: int, map: LinearMap | None = None, threads=None) -> float:
    """Diagnostic: fraction of queries whose gold candidate is in the top ``k``."""
    src = np.asarray(source_vecs, dtype=np.float64)
    if map is not None:
        src = apply_map(map, src)
    top = retrieve_topk(src, target_vecs, k, threads)
    gold = np.arange(top.shape[0])[:, None]
    return float((top == gold).any(axis=1).mean())
