"""Distances, fault-count estimation, clustering, and the per-version
indexing pipelines (learned similarity plus coverage/ranking baselines).

The learned pipeline distance is ``(1 - similarity) * size_ratio`` where
the size ratio divides the larger original image side by the smaller.
The fault count comes from a subtractive density-potential scheme: each
failure gets potential sum(exp(-(2/r_a)^2 d^2)) over the others with r_a
a multiple of the mean pairwise distance; the highest-potential failure
becomes a medoid, potentials are revised downward around it with the
wider radius r_b, and selection repeats until the maximum revised
potential drops below delta times the first peak.  K-medoids then refines
the partition with strictly improving swaps.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .errors import DataError
from .memcollect import BreakpointSet, MemoryTrace, collect_memory, select_breakpoints
from .pms import PMSImage, pms_image
from .simnet import SiameseSimilarity, resize_uniform
from .spectrum import coverage_fingerprint, sd_ranking, spectrum_counts, suspiciousness
from .validation import check_distance_matrix, check_same_length
from .workbench.interp import DEFAULT_STEP_BUDGET, TestTrace
from .workbench.mutate import FaultyVersion, run_suite

METHODS = ("sure", "cov_hit", "cov_count", "mseer_gp19")


# ---------------------------------------------------------------------------
# Pairwise distances


def size_div(a: PMSImage, b: PMSImage) -> float:
    """Ratio of the larger original side to the smaller; >= 1."""
    big = max(a.original_side, b.original_side)
    small = min(a.original_side, b.original_side)
    if small < 1:
        raise DataError("image sides must be >= 1")
    return big / small


def pms_distance(similarity: float, size_ratio: float) -> float:
    """(1 - similarity) * size_ratio."""
    return (1.0 - similarity) * size_ratio


def euclidean_distance(fa, fb) -> float:
    check_same_length(fa, fb, "coverage vector")
    return float(np.linalg.norm(np.asarray(fa, dtype=np.float64) - np.asarray(fb, dtype=np.float64)))


def kendall_tau_distance(ra, rb) -> int:
    """Count of statement pairs ranked in strictly opposite order.

    Both lists assign a rank per statement; pairs tied in one list and
    ordered in the other contribute nothing.
    """
    check_same_length(ra, rb, "ranking list")
    a = np.asarray(ra, dtype=np.float64)
    b = np.asarray(rb, dtype=np.float64)
    da = a[:, None] - a[None, :]
    db = b[:, None] - b[None, :]
    discordant = (da * db) < 0
    return int(np.triu(discordant, k=1).sum())


def baseline_distance(fa, fb, kind: str) -> float:
    if kind == "euclid_cov":
        return euclidean_distance(fa, fb)
    if kind == "kendall_rank":
        return float(kendall_tau_distance(fa, fb))
    raise DataError(f"unknown baseline distance {kind!r}")


# ---------------------------------------------------------------------------
# Fault-count estimation (subtractive density potentials)


@dataclass
class ClusterConfig:
    ra_factor: float = 1.0  # r_a = ra_factor * mean pairwise distance
    rb_factor: float = 1.5  # r_b = rb_factor * r_a
    delta: float = 0.15  # stop when max potential < delta * first peak


def estimate_fault_count(d, config: ClusterConfig | None = None) -> tuple[int, list[int]]:
    """Estimated cluster count and the selected initial medoids."""
    config = config or ClusterConfig()
    d = check_distance_matrix(d)
    n = d.shape[0]
    if n == 1:
        return 1, [0]
    iu = np.triu_indices(n, k=1)
    r_a = config.ra_factor * float(d[iu].mean())
    if r_a == 0.0:
        return 1, [0]  # all failures coincide
    alpha = (2.0 / r_a) ** 2
    beta = (2.0 / (config.rb_factor * r_a)) ** 2
    potential = np.exp(-alpha * d * d).sum(axis=1) - 1.0  # drop self term
    medoids: list[int] = []
    first_peak = None
    while len(medoids) < n:
        masked = potential.copy()
        if medoids:
            masked[medoids] = -np.inf
        c = int(np.argmax(masked))  # ties resolve to the lowest index
        peak = float(masked[c])
        if first_peak is None:
            first_peak = peak
        elif peak < config.delta * first_peak:
            break
        medoids.append(c)
        potential = potential - peak * np.exp(-beta * d[c] * d[c])
    return len(medoids), medoids


# ---------------------------------------------------------------------------
# K-medoids


class KMedoids(BaseEstimator, ClusterMixin):
    """Partition around medoids on a precomputed distance matrix.

    Swaps are scanned in (medoid position, candidate index) order and
    applied only on a strict cost decrease, so the outcome is
    deterministic; medoid indices are kept ascending and equal-distance
    assignments go to the lowest medoid index.
    """

    def __init__(self, n_clusters: int = 1, initial_medoids: list[int] | None = None):
        self.n_clusters = n_clusters
        self.initial_medoids = initial_medoids

    def fit(self, X, y=None) -> "KMedoids":
        d = check_distance_matrix(X)
        n = d.shape[0]
        k = self.n_clusters
        if k > n:
            raise DataError(f"cannot place {k} medoids among {n} failures")
        if k < 1:
            raise DataError("need at least one cluster")
        if self.initial_medoids is None:
            medoids = sorted(range(k))
        else:
            medoids = sorted(int(i) for i in self.initial_medoids)
            if len(set(medoids)) != k:
                raise DataError(f"expected {k} distinct initial medoids, got {self.initial_medoids}")
            if medoids and not 0 <= medoids[0] <= medoids[-1] < n:
                raise DataError(f"initial medoids out of range: {self.initial_medoids}")

        def cost(ms: list[int]) -> float:
            return float(d[:, ms].min(axis=1).sum())

        current = cost(medoids)
        improved = True
        while improved:
            improved = False
            for pos in range(k):
                for cand in range(n):
                    if cand in medoids:
                        continue
                    trial = sorted(medoids[:pos] + [cand] + medoids[pos + 1 :])
                    trial_cost = cost(trial)
                    if trial_cost < current:
                        medoids, current = trial, trial_cost
                        improved = True
                        break
                if improved:
                    break

        self.medoid_indices_ = medoids
        self.labels_ = np.argmin(d[:, medoids], axis=1)  # first minimum = lowest medoid
        self.inertia_ = current
        return self


def kmedoids(d, k: int, initial_medoids: list[int] | None = None) -> tuple[list[int], np.ndarray]:
    model = KMedoids(n_clusters=k, initial_medoids=initial_medoids).fit(d)
    return model.medoid_indices_, model.labels_


# ---------------------------------------------------------------------------
# Per-version pipelines


@dataclass
class IndexConfig:
    breakpoint_x: float = 10.0
    sbfl_formula: str = "dstar2"
    uniform_side: int = 64
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    step_budget: int = DEFAULT_STEP_BUDGET


@dataclass
class ClusteringResult:
    failure_ids: list[str]
    k: int
    medoids: list[int]  # indices into failure_ids
    assignment: dict[str, int]  # failure id -> cluster 0..k-1
    oracle: dict[str, int] | None = None  # failure id -> fault index
    distances: np.ndarray | None = None


def version_breakpoints(version: FaultyVersion, traces: list[TestTrace], config: IndexConfig) -> BreakpointSet:
    """Breakpoints for a faulty version: rank all statements over the whole
    suite with the configured formula and keep the Top-x%."""
    counts = spectrum_counts(traces, version.program.l)
    scores = suspiciousness(counts, config.sbfl_formula)
    return select_breakpoints(scores, config.breakpoint_x)


def collect_version_memory(
    version: FaultyVersion, config: IndexConfig | None = None
) -> tuple[dict[str, MemoryTrace], BreakpointSet]:
    """Memory traces for every failing test of a version, suite order."""
    config = config or IndexConfig()
    traces = run_suite(version.program, version.suite, config.step_budget)
    bps = version_breakpoints(version, traces, config)
    failing = [t for t in version.suite if t.id in version.oracle]
    memory = {
        t.id: collect_memory(version.program, t, bps, config.step_budget) for t in failing
    }
    return memory, bps


def version_pms_images(
    version: FaultyVersion, config: IndexConfig | None = None
) -> dict[str, PMSImage]:
    memory, _ = collect_version_memory(version, config)
    return {tid: pms_image(trace) for tid, trace in memory.items()}


def sure_distance_matrix(
    images: list[PMSImage], model: SiameseSimilarity, uniform_side: int | None = None
) -> np.ndarray:
    """Pairwise learned distances: one batched prediction per call."""
    n = len(images)
    side = uniform_side if uniform_side is not None else model.params_.input_side
    tensors = [resize_uniform(img, side) for img in images]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    d = np.zeros((n, n))
    if pairs:
        x = np.stack([np.stack([tensors[i], tensors[j]]) for i, j in pairs])
        sims = model.predict(x)
        for (i, j), sim in zip(pairs, sims):
            d[i, j] = d[j, i] = pms_distance(float(sim), size_div(images[i], images[j]))
    return d


def index_failures(
    version: FaultyVersion,
    method: str,
    model: SiameseSimilarity | None = None,
    config: IndexConfig | None = None,
) -> ClusteringResult:
    """Full pipeline on one faulty version: fingerprint every failure,
    build the distance matrix, estimate the fault count, cluster."""
    if method not in METHODS:
        raise DataError(f"unknown method {method!r}; available: {', '.join(METHODS)}")
    config = config or IndexConfig()
    traces = run_suite(version.program, version.suite, config.step_budget)
    by_id = {t.test_id: t for t in traces}
    failure_ids = [t.id for t in version.suite if t.id in version.oracle]
    if not failure_ids:
        raise DataError(f"version {version.version_id!r} has no failures")
    l = version.program.l

    if method == "sure":
        if model is None:
            raise DataError("method 'sure' requires a trained similarity model")
        images_by_id = version_pms_images(version, config)
        images = [images_by_id[tid] for tid in failure_ids]
        d = sure_distance_matrix(images, model)  # resize to the model's input side
    elif method in ("cov_hit", "cov_count"):
        variant = "hit" if method == "cov_hit" else "count"
        vectors = [coverage_fingerprint(by_id[tid], l, variant) for tid in failure_ids]
        d = _pairwise(vectors, euclidean_distance)
    else:  # mseer_gp19
        passed = [t for t in traces if not t.failed]
        rankings = [sd_ranking(by_id[tid], passed, l, "gp19") for tid in failure_ids]
        d = _pairwise(rankings, lambda a, b: float(kendall_tau_distance(a, b)))

    k, initial = estimate_fault_count(d, config.cluster)
    medoids, labels = kmedoids(d, k, initial)
    assignment = {tid: int(labels[i]) for i, tid in enumerate(failure_ids)}
    return ClusteringResult(
        failure_ids=failure_ids,
        k=k,
        medoids=medoids,
        assignment=assignment,
        oracle=dict(version.oracle),
        distances=d,
    )


def _pairwise(items: list, fn) -> np.ndarray:
    n = len(items)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = fn(items[i], items[j])
    return d
