"""Spectrum counts, suspiciousness formulas, rankings, and coverage
fingerprints.

The four counts per statement are the number of test cases that execute
it and fail (N_CF), execute it and pass (N_CS), skip it and fail (N_UF),
and skip it and pass (N_US); they always partition the suite.

Three formulas are available by name:

* ``gp03``:   sqrt(|N_CF^2 - sqrt(N_CS)|)
* ``dstar2``: N_CF^2 / (N_CS + N_UF), with a zero denominator scoring
  +inf when N_CF > 0 and 0 otherwise
* ``gp19``:   N_CF * sqrt(|N_CS - N_CF + N_UF - N_US|)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError
from .workbench.interp import TestTrace

FORMULAS = ("gp03", "dstar2", "gp19")


@dataclass
class SpectrumCounts:
    """Per-statement execution/outcome counts, index 0 = statement 1."""

    n_cf: list[int]
    n_cs: list[int]
    n_uf: list[int]
    n_us: list[int]

    @property
    def l(self) -> int:
        return len(self.n_cf)

    def at(self, sid: int) -> tuple[int, int, int, int]:
        i = sid - 1
        return self.n_cf[i], self.n_cs[i], self.n_uf[i], self.n_us[i]


def spectrum_counts(traces: list[TestTrace], l: int) -> SpectrumCounts:
    if not traces:
        raise DataError("cannot build spectrum counts from an empty trace list")
    for t in traces:
        bad = [sid for sid in t.hit_counts if not 1 <= sid <= l]
        if bad:
            raise DataError(f"trace {t.test_id!r} hits unknown statement(s) {bad}")
    n_f = sum(1 for t in traces if t.failed)
    n_s = len(traces) - n_f
    counts = SpectrumCounts([0] * l, [0] * l, [0] * l, [0] * l)
    for t in traces:
        for sid in t.hit_counts:
            if t.failed:
                counts.n_cf[sid - 1] += 1
            else:
                counts.n_cs[sid - 1] += 1
    for i in range(l):
        counts.n_uf[i] = n_f - counts.n_cf[i]
        counts.n_us[i] = n_s - counts.n_cs[i]
    return counts


def _gp03(cf: int, cs: int, uf: int, us: int) -> float:
    return math.sqrt(abs(cf * cf - math.sqrt(cs)))


def _dstar2(cf: int, cs: int, uf: int, us: int) -> float:
    denom = cs + uf
    if denom == 0:
        return math.inf if cf > 0 else 0.0
    return (cf * cf) / denom


def _gp19(cf: int, cs: int, uf: int, us: int) -> float:
    return cf * math.sqrt(abs(cs - cf + uf - us))


_FORMULA_FNS = {"gp03": _gp03, "dstar2": _dstar2, "gp19": _gp19}


def suspiciousness(counts: SpectrumCounts, formula: str) -> list[float]:
    """Per-statement scores under the named formula (index 0 = statement 1)."""
    try:
        fn = _FORMULA_FNS[formula]
    except KeyError:
        raise DataError(f"unknown formula {formula!r}; available: {', '.join(FORMULAS)}") from None
    return [fn(*counts.at(sid)) for sid in range(1, counts.l + 1)]


def rank_with_ties(scores: list[float]) -> list[int]:
    """Ranks in descending score order; a tie shares its beginning position.

    Returned list is per statement: ``ranks[i]`` is the rank of statement
    ``i + 1``.  The best rank is 1.
    """
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    ranks = [0] * len(scores)
    tie_start = 1
    for pos, i in enumerate(order, start=1):
        if pos > 1 and scores[i] != scores[order[pos - 2]]:
            tie_start = pos
        ranks[i] = tie_start
    return ranks


def coverage_fingerprint(trace: TestTrace, l: int, variant: str) -> list[int]:
    """Per-statement coverage vector for a failed trace.

    ``hit`` yields 0/1 indicators; ``count`` yields execution frequencies
    (zero where uncovered).
    """
    if variant not in ("hit", "count"):
        raise DataError(f"unknown coverage variant {variant!r}")
    if not trace.failed:
        raise DataError(f"coverage fingerprints are defined for failed tests, {trace.test_id!r} passed")
    if variant == "hit":
        return [1 if sid in trace.hit_counts else 0 for sid in range(1, l + 1)]
    return [trace.hit_counts.get(sid, 0) for sid in range(1, l + 1)]


def sd_ranking(
    failed: TestTrace,
    passed: list[TestTrace],
    l: int,
    formula: str = "gp19",
) -> list[int]:
    """Ranking-list fingerprint of one failure: rank statements by the
    suspiciousness computed over this failure plus the passed tests."""
    counts = spectrum_counts([failed] + passed, l)
    return rank_with_ties(suspiciousness(counts, formula))
