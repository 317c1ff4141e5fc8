"""Corpus encoding throughput: compiled kernel vs numpy fallback.

    python benchmarks/bench_encode.py --sentences 20000 --dim 300 --k 3
"""

import argparse
import time

import numpy as np

from dctsent import _fallback
from dctsent.embeddings import SentenceMatrix
from dctsent.encoder import encode_dct

try:
    from dctsent import _ckernels
except ImportError:
    _ckernels = None


def make_corpus(n_sent, vocab, dim, min_len, max_len, seed):
    rng = np.random.default_rng(seed)
    vectors = rng.normal(size=(vocab, dim))
    lengths = rng.integers(min_len, max_len + 1, n_sent)
    offsets = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    idx = rng.integers(0, vocab, offsets[-1]).astype(np.int64)
    return vectors, idx, offsets


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sentences", type=int, default=20000)
    ap.add_argument("--vocab", type=int, default=50000)
    ap.add_argument("--dim", type=int, default=300)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--min-len", type=int, default=3)
    ap.add_argument("--max-len", type=int, default=40)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    vectors, idx, offsets = make_corpus(args.sentences, args.vocab, args.dim, args.min_len, args.max_len, args.seed)
    n_coef = args.k + 1
    n_sent = offsets.size - 1

    def run(kernel, *extra):
        out = np.zeros((n_sent, n_coef * args.dim))
        kernel(vectors, idx, offsets, n_coef, False, False, out, *extra)
        return out

    def per_sentence():
        for s in range(n_sent):
            encode_dct(SentenceMatrix(vectors[idx[offsets[s]:offsets[s + 1]]]), args.k)

    rows = [("numpy per-sentence loop", lambda: per_sentence()),
            ("numpy length-bucketed (fallback)", lambda: run(_fallback.encode_ragged))]
    if _ckernels is not None:
        rows.append(("cython, 1 thread", lambda: run(_ckernels.encode_ragged, 1)))
        rows.append((f"cython, {args.threads} threads", lambda: run(_ckernels.encode_ragged, args.threads)))
        diff = np.abs(run(_fallback.encode_ragged) - run(_ckernels.encode_ragged, args.threads)).max()
        print(f"max |cython - fallback| = {diff:.2e}")
    else:
        print("compiled kernels not built; fallback only")

    print(f"{n_sent} sentences, {idx.size} tokens, d={args.dim}, c[0:{args.k}]")
    print(f"{'path':36s} {'seconds':>9s} {'sent/s':>11s}")
    for name, fn in rows:
        sec = best_of(fn, args.repeat)
        print(f"{name:36s} {sec:9.3f} {n_sent / sec:11.0f}")


if __name__ == "__main__":
    main()
