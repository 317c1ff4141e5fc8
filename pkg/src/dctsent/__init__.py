"""DCT sentence encoders, cross-lingual sentence maps, retrieval and probing."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .alignment import LinearMap, ParallelBatch, apply_map, fit_least_squares, fit_map, fit_procrustes
from .embeddings import EmbeddingTable, SentenceMatrix, load_table, lookup_sentence, tokenize, write_table
from .encoder import EncoderSpec, dct_coefficient, encode, encode_avg, encode_corpus, encode_dct
from .probe import ProbeConfig, ProbeReport, evaluate_probe, gradient_check, train_probe
from .retrieval import RetrievalReport, evaluate_direction, evaluate_zero_shot, retrieve_top1

__all__ = [
    "BACKEND",
    "EmbeddingTable",
    "EncoderSpec",
    "LinearMap",
    "ParallelBatch",
    "ProbeConfig",
    "ProbeReport",
    "RetrievalReport",
    "SentenceMatrix",
    "apply_map",
    "dct_coefficient",
    "encode",
    "encode_avg",
    "encode_corpus",
    "encode_dct",
    "evaluate_direction",
    "evaluate_probe",
    "evaluate_zero_shot",
    "fit_least_squares",
    "fit_map",
    "fit_procrustes",
    "gradient_check",
    "load_table",
    "lookup_sentence",
    "retrieve_top1",
    "tokenize",
    "train_probe",
    "write_table",
]
