"""Failure indexing via program-memory spectrum images.

Pipeline stages: run tests on a faulty toy-language program, rank
statements by spectrum suspiciousness, collect run-time memory at the
riskiest statements for each failure, render the memory as a square
3-channel image, learn pairwise failure similarity with a twin
convolutional network, turn similarities into distances, estimate the
fault count, and cluster failures per fault.  Coverage- and ranking-based
baselines plus external clustering metrics round out the toolkit.
"""

from .indexer import (
    ClusterConfig,
    ClusteringResult,
    IndexConfig,
    KMedoids,
    estimate_fault_count,
    index_failures,
    kmedoids,
    pms_distance,
    size_div,
)
from .memcollect import BreakpointSet, MemoryTrace, collect_memory, select_breakpoints
from .pms import PMSImage, decode_png, encode_png, pms_image, str_to_int
from .simnet import SiameseSimilarity, TrainingPair, bce_loss, grad_check, resize_uniform
from .spectrum import (
    SpectrumCounts,
    coverage_fingerprint,
    rank_with_ties,
    spectrum_counts,
    suspiciousness,
)

__version__ = "0.1.0"

__all__ = [
    "BreakpointSet",
    "ClusterConfig",
    "ClusteringResult",
    "IndexConfig",
    "KMedoids",
    "MemoryTrace",
    "PMSImage",
    "SiameseSimilarity",
    "SpectrumCounts",
    "TrainingPair",
    "bce_loss",
    "collect_memory",
    "coverage_fingerprint",
    "decode_png",
    "encode_png",
    "estimate_fault_count",
    "grad_check",
    "index_failures",
    "kmedoids",
    "pms_distance",
    "pms_image",
    "rank_with_ties",
    "resize_uniform",
    "select_breakpoints",
    "size_div",
    "spectrum_counts",
    "str_to_int",
    "suspiciousness",
]
