"""Closed-form linear maps between two sentence-vector spaces.

Both solvers fit W with rows of S (source) mapped as ``S @ W ~ T``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import formats
from .errors import AlignmentInputError, DimensionMismatchError, InvalidInputError, RankDeficiencyError, UsageError

logger = logging.getLogger(__name__)

SOLVERS = ("least-squares", "procrustes")


@dataclass(frozen=True)
class ParallelBatch:
    source: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.source, dtype=np.float64))
        t = np.atleast_2d(np.asarray(self.target, dtype=np.float64))
        if s.shape[0] != t.shape[0]:
            raise AlignmentInputError(f"source has {s.shape[0]} rows, target has {t.shape[0]}")
        if s.shape[1] != t.shape[1]:
            raise AlignmentInputError(f"source width {s.shape[1]} != target width {t.shape[1]}")
        if s.shape[0] == 0:
            raise AlignmentInputError("empty parallel batch")
        if s.shape[0] < s.shape[1]:
            logger.warning("only %d pairs for width %d; the map is underdetermined", s.shape[0], s.shape[1])
        object.__setattr__(self, "source", s)
        object.__setattr__(self, "target", t)

    @property
    def n_pairs(self) -> int:
        return self.source.shape[0]

    @property
    def width(self) -> int:
        return self.source.shape[1]


@dataclass(frozen=True)
class LinearMap:
    matrix: np.ndarray
    solver: str
    fit_residual: float

    @property
    def width(self) -> int:
        return self.matrix.shape[0]

    def save(self, path) -> None:
        formats.write_xmap(path, self.matrix, self.solver, self.fit_residual)

    def save_tsv(self, path) -> None:
        formats.write_tsv(path, self.matrix)

    @classmethod
    def load(cls, path) -> "LinearMap":
        return cls(*formats.read_xmap(path))

    @classmethod
    def identity(cls, width: int) -> "LinearMap":
        return cls(np.eye(width), "least-squares", 0.0)


def preprocess(x, center: bool = False, normalize: bool = False) -> np.ndarray:
    """Optional mean-centering, then optional unit-length rows."""
    x = np.asarray(x, dtype=np.float64)
    if center:
        x = x - x.mean(axis=0)
    if normalize:
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        x = x / np.where(norms > 0, norms, 1.0)
    return x


def _residual(s, w, t) -> float:
    err = np.linalg.norm(s @ w - t)
    scale = np.linalg.norm(t)
    return float(err / scale) if scale > 0 else float(err)


def _solve_qr(s, t, ridge):
    # pivoted QR of the ridge-augmented system, rank revealing
    p = s.shape[1]
    a, b = s, t
    if ridge > 0:
        a = np.vstack([s, np.sqrt(ridge) * np.eye(p)])
        b = np.vstack([t, np.zeros((p, t.shape[1]))])
    q, r, perm = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(a.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int((diag > tol).sum())
    if rank < p:
        raise RankDeficiencyError(
            f"source matrix has rank {rank} < width {p}; refit with ridge > 0"
        )
    w = np.empty((p, t.shape[1]))
    w[perm] = scipy.linalg.solve_triangular(r, q.T @ b)
    return w


def fit_least_squares(batch: ParallelBatch, ridge: float = 0.0) -> LinearMap:
    """argmin_W ||S W - T||_F^2 + ridge ||W||_F^2 via the normal equations.

    Cholesky on the Gram matrix first; if it fails or is too ill conditioned,
    a pivoted QR decides the rank and either solves or raises.
    """
    if ridge < 0:
        raise UsageError("ridge must be non-negative")
    s, t = batch.source, batch.target
    if not (np.isfinite(s).all() and np.isfinite(t).all()):
        raise InvalidInputError("parallel batch contains non-finite values")
    p = batch.width
    gram = s.T @ s
    if ridge:
        gram[np.diag_indices(p)] += ridge
    w = None
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
        diag = np.abs(np.diag(factor[0]))
        if (diag.min() / diag.max()) ** 2 > p * np.finfo(float).eps:
            w = scipy.linalg.cho_solve(factor, s.T @ t, check_finite=False)
    except np.linalg.LinAlgError:
        pass
    if w is None:
        w = _solve_qr(s, t, ridge)
    return LinearMap(w, "least-squares", _residual(s, w, t))


def fit_procrustes(batch: ParallelBatch) -> LinearMap:
    """Orthogonal W = U V^T from the SVD U S V^T of S^T T."""
    s, t = batch.source, batch.target
    if not (np.isfinite(s).all() and np.isfinite(t).all()):
        raise InvalidInputError("parallel batch contains non-finite values")
    try:
        u, _, vt = np.linalg.svd(s.T @ t)
    except np.linalg.LinAlgError as exc:
        raise InvalidInputError(f"SVD failed: {exc}") from None
    w = u @ vt
    return LinearMap(w, "procrustes", _residual(s, w, t))


def fit_map(batch: ParallelBatch, solver: str = "least-squares", ridge: float = 0.0) -> LinearMap:
    if solver == "least-squares":
        return fit_least_squares(batch, ridge)
    if solver == "procrustes":
        return fit_procrustes(batch)
    raise UsageError(f"unknown solver {solver!r}")


def invert_map(m: LinearMap) -> LinearMap:
    """Reverse-direction map: transpose for Procrustes, pseudo-inverse otherwise."""
    if m.solver == "procrustes":
        return LinearMap(m.matrix.T.copy(), m.solver, float("nan"))
    return LinearMap(np.linalg.pinv(m.matrix), m.solver, float("nan"))


def apply_map(m: LinearMap, vectors) -> np.ndarray:
    x = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if x.shape[1] != m.width:
        raise DimensionMismatchError(f"vectors have width {x.shape[1]}, map expects {m.width}")
    return x @ m.matrix
