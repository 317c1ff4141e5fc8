"""Pure numpy kernels. Same signatures as the compiled ``_ckernels`` module."""

import numpy as np

# sentences per einsum batch; bounds the (B, N, d) gather buffer
_CHUNK = 4096


def dct_basis(n_words, n_coef, raw_short=False):
    """(n_coef, n_words) matrix whose row k holds sqrt(2/N) cos(pi/N (n + 1/2) k).

    Only the first half of each row is evaluated; the rest is mirrored with
    sign (-1)^k so that reversal symmetry holds exactly in floating point.
    Rows with k >= N are zeroed unless ``raw_short`` is set.
    """
    n = np.arange(n_words)
    mirror = np.minimum(n, n_words - 1 - n)
    k = np.arange(n_coef)[:, None]
    basis = np.cos(np.pi / n_words * (mirror + 0.5) * k)
    flip = (n != mirror) & (k % 2 == 1)
    basis[flip] = -basis[flip]
    if n_words % 2 == 1:
        basis[1::2, n_words // 2] = 0.0
    basis *= np.sqrt(2.0 / n_words)
    if not raw_short:
        basis[n_words:] = 0.0
    return basis


def encode_ragged(vectors, idx, offsets, n_coef, avg, raw_short, out, n_threads=1):
    """Encode every sentence of a ragged corpus into ``out``.

    ``idx`` holds table row indices for all sentences back to back, -1 meaning
    a zero row; sentence ``s`` spans ``idx[offsets[s]:offsets[s + 1]]``.
    Empty sentences leave their output row at zero.
    """
    d = vectors.shape[1]
    padded = np.vstack([vectors, np.zeros((1, d))])
    idx = np.where(idx < 0, vectors.shape[0], idx)
    starts = offsets[:-1]
    lengths = np.diff(offsets)
    for length in np.unique(lengths):
        if length == 0:
            continue
        sel_all = np.flatnonzero(lengths == length)
        if avg:
            weights = np.full((1, length), 1.0 / length)
        else:
            weights = dct_basis(length, n_coef, raw_short)
        for lo in range(0, sel_all.size, _CHUNK):
            sel = sel_all[lo:lo + _CHUNK]
            pos = starts[sel][:, None] + np.arange(length)
            words = padded[idx[pos]]
            coefs = np.einsum("kn,bnd->bkd", weights, words)
            out[sel] = coefs.reshape(sel.size, -1)
    return out
