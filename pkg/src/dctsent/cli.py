"""Command line entry point: ``dctsent {encode,align,retrieve,probe}``.

Every subcommand writes JSON-lines reports that embed the fully resolved
configuration. Exit codes: 0 success, 1 usage, 2 data/parse, 3 numerical.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from . import __version__, _backend
from .alignment import LinearMap, ParallelBatch, fit_map, invert_map, preprocess
from .embeddings import load_table
from .encoder import EncoderSpec, encode_corpus
from .errors import DataError, DatasetError, DctSentError, UsageError
from .formats import read_vectors, write_vectors
from .probe import ProbeConfig, cross_validate, evaluate_probe, find_task_files, load_probe_file, train_probe
from .retrieval import accuracy_at_k, evaluate_direction, evaluate_zero_shot

logger = logging.getLogger("dctsent")

SOLVER_FLAGS = {"lsq": "least-squares", "procrustes": "procrustes"}
OOV_FLAGS = {"skip": "skip", "zero": "zero"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _resolved_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "timestamp")}
    cfg["threads"] = _backend.resolve_threads(args.threads)
    return cfg


def _emit(records, args, out_path=None):
    lines = []
    for rec in records:
        rec = {"toolkit": "dctsent", "version": __version__, **rec, "config": _resolved_config(args)}
        if args.timestamp:
            rec["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        lines.append(json.dumps(rec, sort_keys=True, ensure_ascii=False))
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _spec_from_args(args) -> EncoderSpec:
    if args.encoder == "avg":
        if args.k is not None:
            raise UsageError("--k only applies to --encoder dct")
        return EncoderSpec("avg")
    if args.k is None:
        raise UsageError("--encoder dct requires --k")
    return EncoderSpec("dct", args.k, allow_large_k=args.allow_large_k)


def _read_lines(path):
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\r\n") for line in f]


def _encode_lines(table, lines, spec, args):
    return encode_corpus(
        table, lines, spec,
        policy=OOV_FLAGS[args.oov],
        lowercase=args.lowercase,
        empty=args.empty,
        short=args.short,
        skip_bad=getattr(args, "skip_bad", False),
        threads=args.threads,
    )


# --- encode -----------------------------------------------------------------

def cmd_encode(args) -> int:
    spec = _spec_from_args(args)
    table = load_table(args.vectors, args.limit)
    matrix, stats = _encode_lines(table, _read_lines(args.input), spec, args)
    if args.float32:
        matrix = matrix.astype(np.float32)
    write_vectors(args.out, matrix, args.format, 4 if args.float32 else 8)
    _emit([{
        "command": "encode",
        "encoder": spec.describe(),
        "rows": int(matrix.shape[0]),
        "cols": int(matrix.shape[1]),
        "stats": stats.to_dict(),
    }], args, args.report)
    return 0


# --- align ------------------------------------------------------------------

def cmd_align(args) -> int:
    src = preprocess(read_vectors(args.src_vecs), args.center, args.normalize)
    tgt = preprocess(read_vectors(args.tgt_vecs), args.center, args.normalize)
    batch = ParallelBatch(src, tgt)
    m = fit_map(batch, SOLVER_FLAGS[args.solver], args.ridge)
    m.save(args.out)
    if args.tsv:
        m.save_tsv(args.tsv)
    _emit([{
        "command": "align",
        "solver": m.solver,
        "n_pairs": batch.n_pairs,
        "width": batch.width,
        "fit_residual": m.fit_residual,
    }], args, args.report)
    return 0


# --- retrieve ---------------------------------------------------------------

def _load_map(path, invert):
    m = LinearMap.load(path)
    return invert_map(m) if invert else m


def _report_record(report, extra=None):
    rec = {"command": "retrieve", **report.to_dict()}
    if extra:
        rec.update(extra)
    return rec


def _retrieve_files(args):
    src = preprocess(read_vectors(args.src), args.center, args.normalize)
    tgt = preprocess(read_vectors(args.tgt), args.center, args.normalize)
    common = dict(encoder=args.encoder_desc, oov_policy=args.oov, threads=args.threads)
    if args.map2 is not None:
        if args.map is None:
            raise UsageError("--map2 requires --map")
        m1 = _load_map(args.map, args.invert)
        m2 = _load_map(args.map2, args.invert)
        direction = args.direction or f"{args.src_lang}→{args.tgt_lang}"
        report = evaluate_zero_shot(src, tgt, m1, m2, direction, **common)
        return [_report_record(report, {"mode": "zero-shot"})]
    m = _load_map(args.map, args.invert) if args.map else None
    direction = args.direction or f"{args.src_lang}→{args.tgt_lang}"
    report = evaluate_direction(src, tgt, m, direction, **common)
    extra = {"mode": "direct"}
    if args.topk > 1:
        extra[f"accuracy_at_{args.topk}"] = accuracy_at_k(src, tgt, args.topk, m, args.threads)
    return [_report_record(report, extra)]


def _retrieve_sweep(args):
    """Re-encode train/test text with AVG and c[0..K]; fit and evaluate both directions."""
    for name in ("src_vectors", "tgt_vectors", "train_src", "train_tgt"):
        if getattr(args, name) is None:
            raise UsageError(f"--sweep requires --{name.replace('_', '-')}")
    src_table = load_table(args.src_vectors, args.limit)
    tgt_table = load_table(args.tgt_vectors, args.limit)
    texts = {
        "train_src": _read_lines(args.train_src),
        "train_tgt": _read_lines(args.train_tgt),
        "test_src": _read_lines(args.src),
        "test_tgt": _read_lines(args.tgt),
    }
    if len(texts["train_src"]) != len(texts["train_tgt"]) or len(texts["test_src"]) != len(texts["test_tgt"]):
        raise DataError("parallel text files differ in line count")
    specs = [EncoderSpec("avg")] + [EncoderSpec("dct", k, allow_large_k=args.allow_large_k) for k in range(args.max_k + 1)]
    solver = SOLVER_FLAGS[args.solver]
    fwd = f"{args.src_lang}→{args.tgt_lang}"
    bwd = f"{args.tgt_lang}→{args.src_lang}"
    records, table = [], {fwd: [], bwd: []}
    for spec in specs:
        enc = {}
        for key, tab in (("train_src", src_table), ("test_src", src_table), ("train_tgt", tgt_table), ("test_tgt", tgt_table)):
            mat, _ = _encode_lines(tab, texts[key], spec, args)
            enc[key] = preprocess(mat, args.center, args.normalize)
        for direction, a, b in ((fwd, "src", "tgt"), (bwd, "tgt", "src")):
            m = fit_map(ParallelBatch(enc[f"train_{a}"], enc[f"train_{b}"]), solver, args.ridge)
            report = evaluate_direction(
                enc[f"test_{a}"], enc[f"test_{b}"], m, direction,
                encoder=spec.describe(), oov_policy=args.oov, threads=args.threads,
            )
            records.append(_report_record(report, {"mode": "sweep", "fit_residual": m.fit_residual}))
            table[direction].append(report.accuracy)
    if args.table_out:
        with open(args.table_out, "w", encoding="utf-8") as f:
            f.write("\t".join(["direction"] + [s.describe() for s in specs]) + "\n")
            for direction, accs in table.items():
                f.write("\t".join([direction] + ["%.2f" % (100 * a) for a in accs]) + "\n")
    return records


def cmd_retrieve(args) -> int:
    records = _retrieve_sweep(args) if args.sweep else _retrieve_files(args)
    _emit(records, args, args.report)
    return 0


# --- probe ------------------------------------------------------------------

def _probe_task(task, path, table, spec, config, args):
    splits = load_probe_file(path)
    for required in ("train", "test"):
        if required not in splits:
            raise DatasetError(f"{path}: missing {required} split")

    def encode_split(name):
        labels = [lab for lab, _ in splits[name]]
        vecs, _ = _encode_lines(table, [s for _, s in splits[name]], spec, args)
        return vecs, labels

    x_tr, y_tr = encode_split("train")
    x_te, y_te = encode_split("test")
    extra = {}
    if "dev" in splits:
        x_dev, y_dev = encode_split("dev")
        state = train_probe(x_tr, y_tr, config, x_dev, y_dev)
    else:
        extra["cv_accuracy"] = cross_validate(x_tr, y_tr, config)
        state = train_probe(x_tr, y_tr, config)
    report = evaluate_probe(state, x_te, y_te, task, args.language, spec.describe())
    return {"command": "probe", **report.to_dict(), **extra}


def cmd_probe(args) -> int:
    config = ProbeConfig(
        seed=args.seed,
        nonlinearity=args.nonlinearity,
        max_epoch=args.max_epoch,
    )
    tasks = find_task_files(args.task_dir)
    table = load_table(args.vectors, args.limit)
    if args.sweep:
        specs = [EncoderSpec("avg")] + [EncoderSpec("dct", k) for k in range(args.max_k + 1)]
    else:
        specs = [_spec_from_args(args)]
    records = []
    for task, path in tasks.items():
        for spec in specs:
            records.append(_probe_task(task, path, table, spec, config, args))
    if args.table_out:
        with open(args.table_out, "w", encoding="utf-8") as f:
            f.write("\t".join(["task", "language"] + [s.describe() for s in specs]) + "\n")
            for task in tasks:
                accs = [r["accuracy"] for r in records if r["task_name"] == task]
                f.write("\t".join([task, args.language] + ["%.2f" % (100 * a) for a in accs]) + "\n")
    _emit(records, args, args.report)
    return 0


# --- parser -----------------------------------------------------------------

def _add_common(p):
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: $DCTSENT_THREADS or 1)")
    p.add_argument("--report", default=None, help="write JSON-lines report here instead of stdout")
    p.add_argument("--timestamp", action="store_true", help="add a wall-clock timestamp to reports")


def _add_encoding(p, with_spec=True):
    if with_spec:
        p.add_argument("--encoder", choices=("avg", "dct"), default="dct")
        p.add_argument("--k", type=int, default=None)
    p.add_argument("--allow-large-k", action="store_true")
    p.add_argument("--oov", choices=tuple(OOV_FLAGS), default="skip")
    p.add_argument("--lowercase", type=_bool, default=True)
    p.add_argument("--empty", choices=("error", "zero"), default="error",
                   help="empty sentences: fail, or encode as the zero vector")
    p.add_argument("--short", choices=("zero", "raw"), default="zero",
                   help="coefficients k >= N: zero-fill, or evaluate the formula as written")
    p.add_argument("--limit", type=int, default=None, help="read at most this many word vectors")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dctsent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dctsent {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="encode one sentence per line")
    p.add_argument("--vectors", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("tsv", "bin"), default="tsv")
    p.add_argument("--float32", action="store_true", help="store encoded vectors as 32-bit floats")
    p.add_argument("--skip-bad", action="store_true", help="drop empty lines instead of failing")
    _add_encoding(p)
    _add_common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("align", help="fit a sentence-level linear map")
    p.add_argument("--src-vecs", required=True)
    p.add_argument("--tgt-vecs", required=True)
    p.add_argument("--solver", choices=tuple(SOLVER_FLAGS), default="lsq")
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--center", action="store_true")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out", required=True, help="XMAP output path")
    p.add_argument("--tsv", default=None, help="also export the matrix as TSV")
    _add_common(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("retrieve", help="translation retrieval accuracy")
    p.add_argument("--src", required=True, help="source vectors (text lines with --sweep)")
    p.add_argument("--tgt", required=True, help="target vectors (text lines with --sweep)")
    p.add_argument("--map", default=None)
    p.add_argument("--map2", default=None, help="second map; enables zero-shot mode")
    p.add_argument("--invert", action="store_true", help="use the inverse of the given map(s)")
    p.add_argument("--topk", type=int, default=1, help="extra accuracy@k diagnostic")
    p.add_argument("--src-lang", default="SRC")
    p.add_argument("--tgt-lang", default="TGT")
    p.add_argument("--direction", default=None)
    p.add_argument("--encoder-desc", default="unspecified")
    p.add_argument("--center", action="store_true")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--sweep", action="store_true")
    p.add_argument("--src-vectors", default=None)
    p.add_argument("--tgt-vectors", default=None)
    p.add_argument("--train-src", default=None)
    p.add_argument("--train-tgt", default=None)
    p.add_argument("--max-k", type=int, default=3)
    p.add_argument("--solver", choices=tuple(SOLVER_FLAGS), default="lsq")
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--table-out", default=None)
    _add_encoding(p, with_spec=False)
    _add_common(p)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("probe", help="train and test probing classifiers")
    p.add_argument("--task-dir", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--language", default="unspecified")
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--nonlinearity", choices=("sigmoid", "tanh", "relu"), default="sigmoid")
    p.add_argument("--max-epoch", type=int, default=200)
    p.add_argument("--sweep", action="store_true", help="run AVG and c[0]..c[0:max-k]")
    p.add_argument("--max-k", type=int, default=4)
    p.add_argument("--table-out", default=None)
    _add_encoding(p)
    _add_common(p)
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DctSentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
