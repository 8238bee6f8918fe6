"""Seeded generation of multi-fault benchmark versions from the built-in
fixtures, plus train/test splitting and training-pair construction.

A candidate version samples r single mutants with distinct target
statements; it is kept only if every single mutant yields a nonempty
failing set, failing sets are pairwise disjoint, the composed program
attributes every failure to exactly one fault with every fault observable,
and (so the learned pipeline can run under the default configuration)
every failure yields at least one memory entry.  Rejected candidates are
resampled, mirroring how non-compiling or failure-free mutants are
discarded.
"""
from __future__ import annotations

import itertools

import numpy as np

from .errors import (
    CompositionError,
    DataError,
    DegenerateImageError,
    EmptyBreakpointError,
    NonterminatingRunError,
    OracleAmbiguityError,
    ParseError,
)
from .indexer import IndexConfig, version_pms_images
from .pms import PMSImage
from .simnet import TrainingPair
from .workbench.fixtures import FIXTURE_NAMES, load_fixture
from .workbench.mutate import (
    FaultyVersion,
    Mutant,
    apply_mutants,
    build_oracle,
    enumerate_edits,
    failing_ids,
    run_suite,
)

MAX_TRIES_PER_VERSION = 400


def _viable_singles(program, suite, step_budget) -> list[tuple[Mutant, frozenset[str]]]:
    """Single mutants that parse, terminate, and fail at least one test."""
    viable = []
    for mutant in enumerate_edits(program):
        try:
            mutated = apply_mutants(program, [mutant])
            fails = failing_ids(run_suite(mutated, suite, step_budget))
        except (NonterminatingRunError, CompositionError, ParseError):
            continue
        if fails:
            viable.append((mutant, frozenset(fails)))
    return viable


def generate_versions(
    n_versions: int = 48,
    fault_counts: tuple[int, ...] = (1, 2, 3),
    fixtures: tuple[str, ...] = FIXTURE_NAMES,
    seed: int = 0,
    config: IndexConfig | None = None,
) -> list[FaultyVersion]:
    """Sample a benchmark of faulty versions, deterministic in the seed."""
    if n_versions < 1:
        raise DataError("need at least one version")
    bad = [r for r in fault_counts if not 1 <= r <= 5]
    if bad:
        raise DataError(f"fault counts must be within 1..5, got {bad}")
    config = config or IndexConfig()
    rng = np.random.default_rng(seed)

    loaded = {name: load_fixture(name) for name in fixtures}
    singles = {
        name: _viable_singles(program, suite, config.step_budget)
        for name, (program, suite) in loaded.items()
    }
    for name, pool in singles.items():
        if not pool:
            raise DataError(f"fixture {name!r} offers no viable single mutants")

    versions: list[FaultyVersion] = []
    seen: set[tuple] = set()
    plan = itertools.cycle([(fx, r) for r in fault_counts for fx in fixtures])
    skips_left = 4 * n_versions  # a (fixture, r) slot may be unsatisfiable
    while len(versions) < n_versions:
        fixture, r = next(plan)
        pool = singles[fixture]
        version = _sample_version(rng, fixture, loaded[fixture][0], loaded[fixture][1],
                                  pool, r, len(versions), seen, config)
        if version is None:
            skips_left -= 1
            if skips_left < 0:
                raise DataError(
                    f"benchmark generation stalled at {len(versions)}/{n_versions} versions"
                )
            continue
        versions.append(version)
    return versions


def _sample_version(
    rng, fixture, program, suite, pool, r, sequence, seen, config
) -> FaultyVersion | None:
    for _ in range(MAX_TRIES_PER_VERSION):
        picks = rng.choice(len(pool), size=min(r, len(pool)), replace=False)
        chosen = [pool[int(i)] for i in sorted(picks)]
        if len(chosen) < r:
            break
        mutants = [m for m, _ in chosen]
        statements = {m.target_statement for m in mutants}
        if len(statements) != r:
            continue
        signature = (fixture, tuple(sorted(m.describe() for m in mutants)))
        if signature in seen:
            continue
        fail_sets = [fails for _, fails in chosen]
        union = set().union(*fail_sets)
        if sum(len(f) for f in fail_sets) != len(union):
            continue  # interfering faults share a failing test
        version_id = f"{fixture}-r{r}-{sequence:03d}"
        try:
            version = build_oracle(program, mutants, suite, version_id, config.step_budget)
        except (OracleAmbiguityError, NonterminatingRunError, CompositionError):
            continue
        if set(version.oracle.values()) != set(range(r)):
            continue  # a fault got fully masked in the composition
        try:
            version_pms_images(version, config)
        except (DegenerateImageError, EmptyBreakpointError, NonterminatingRunError):
            continue  # some failure collects no memory under the default run
        seen.add(signature)
        return version
    return None  # this (fixture, r) slot found nothing; caller skips it


# ---------------------------------------------------------------------------
# Train/test protocol


def split_versions(
    versions: list[FaultyVersion], fraction: float, seed: int
) -> tuple[list[FaultyVersion], list[FaultyVersion]]:
    """Version-level split: a seeded selection of round(fraction * n)
    versions trains, the rest tests; no version lands in both."""
    if not 0 < fraction <= 1:
        raise DataError(f"train fraction must be in (0, 1], got {fraction}")
    rng = np.random.default_rng(seed)
    n = len(versions)
    n_train = max(1, int(round(fraction * n))) if n else 0
    order = rng.permutation(n)
    train_idx = set(int(i) for i in order[:n_train])
    train = [v for i, v in enumerate(versions) if i in train_idx]
    test = [v for i, v in enumerate(versions) if i not in train_idx]
    return train, test


def version_pairs(
    images: dict[str, PMSImage], oracle: dict[str, int]
) -> list[TrainingPair]:
    """All labeled failure pairs of one version (1 = same culprit fault)."""
    ids = sorted(images)
    pairs = []
    for a, b in itertools.combinations(ids, 2):
        label = 1 if oracle[a] == oracle[b] else 0
        pairs.append(TrainingPair(a=images[a], b=images[b], label=label))
    return pairs


def build_training_pairs(
    versions: list[FaultyVersion], config: IndexConfig | None = None
) -> list[TrainingPair]:
    pairs: list[TrainingPair] = []
    for version in versions:
        images = version_pms_images(version, config)
        pairs.extend(version_pairs(images, version.oracle))
    return pairs
