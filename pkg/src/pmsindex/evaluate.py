"""External clustering metrics and benchmark-level aggregation.

Pair-based metrics classify each of the C(n,2) failure pairs by whether
the generated and oracle clusterings agree (same/same, same/different,
different/same, different/different) and combine the counts into the
Fowlkes-Mallows index sqrt(SS/(SS+SD) * SS/(SS+DS)) and the Jaccard
coefficient SS/(SS+SD+DS).  Case-based precision and recall first align
generated clusters to faults with the accuracy-maximizing bijection
(k = r only), then micro-sum one-vs-rest true/false positives/negatives
over faults.  Zero denominators evaluate to 0 throughout.

A version only contributes clustering metrics when its estimated cluster
count equals its true fault count; the per-technique aggregate counts
those versions (V_equal) and sums each metric over exactly them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import DataError


@dataclass
class PairCounts:
    x_ss: int
    x_sd: int
    x_ds: int
    x_dd: int

    @property
    def total(self) -> int:
        return self.x_ss + self.x_sd + self.x_ds + self.x_dd


@dataclass
class CaseCounts:
    x_tp: int
    x_fp: int
    x_tn: int
    x_fn: int


def _check_same_failures(generated: dict[str, int], oracle: dict[str, int]) -> list[str]:
    if set(generated) != set(oracle):
        raise DataError("generated and oracle assignments cover different failure sets")
    return sorted(generated)


def pair_counts(generated: dict[str, int], oracle: dict[str, int]) -> PairCounts:
    """Classify every failure pair by generated/oracle co-membership."""
    ids = _check_same_failures(generated, oracle)
    ss = sd = ds = dd = 0
    for a, b in itertools.combinations(ids, 2):
        same_gen = generated[a] == generated[b]
        same_orc = oracle[a] == oracle[b]
        if same_gen and same_orc:
            ss += 1
        elif same_gen:
            sd += 1
        elif same_orc:
            ds += 1
        else:
            dd += 1
    return PairCounts(ss, sd, ds, dd)


def fmi(pc: PairCounts) -> float:
    if pc.x_ss == 0:
        return 0.0
    precision = pc.x_ss / (pc.x_ss + pc.x_sd)
    recall = pc.x_ss / (pc.x_ss + pc.x_ds)
    return (precision * recall) ** 0.5


def jc(pc: PairCounts) -> float:
    denom = pc.x_ss + pc.x_sd + pc.x_ds
    return 0.0 if denom == 0 else pc.x_ss / denom


def align_clusters(generated: dict[str, int], oracle: dict[str, int], r: int) -> dict[int, int]:
    """Bijection cluster -> fault maximizing correctly assigned failures.

    Requires the generated clustering to use exactly r = k labels, r <= 5;
    ties pick the lexicographically first bijection.
    """
    ids = _check_same_failures(generated, oracle)
    gen_labels = sorted(set(generated.values()))
    orc_labels = sorted(set(oracle.values()))
    if len(gen_labels) != r:
        raise DataError(f"alignment needs k = r; got k = {len(gen_labels)}, r = {r}")
    if len(orc_labels) > r:
        raise DataError(f"oracle uses {len(orc_labels)} faults but r = {r}")
    if r > 5:
        raise DataError(f"alignment enumerates up to 5! bijections, r = {r} is too large")
    fault_slots = orc_labels + [f for f in range(r) if f not in orc_labels]
    best: dict[int, int] | None = None
    best_correct = -1
    for perm in itertools.permutations(fault_slots[:r]):
        mapping = dict(zip(gen_labels, perm))
        correct = sum(1 for t in ids if mapping[generated[t]] == oracle[t])
        if correct > best_correct:
            best, best_correct = mapping, correct
    assert best is not None
    return best


def case_counts(
    generated: dict[str, int], oracle: dict[str, int], bijection: dict[int, int]
) -> CaseCounts:
    """One-vs-rest counts per fault under the bijection, micro-summed."""
    ids = _check_same_failures(generated, oracle)
    if not ids:
        raise DataError("cannot count cases over an empty failure set")
    tp = fp = tn = fn = 0
    faults = sorted(set(bijection.values()) | set(oracle.values()))
    for fault in faults:
        for t in ids:
            predicted = bijection[generated[t]] == fault
            actual = oracle[t] == fault
            if predicted and actual:
                tp += 1
            elif predicted:
                fp += 1
            elif actual:
                fn += 1
            else:
                tn += 1
    return CaseCounts(tp, fp, tn, fn)


def pr(cc: CaseCounts) -> float:
    denom = cc.x_tp + cc.x_fp
    return 0.0 if denom == 0 else cc.x_tp / denom


def rr(cc: CaseCounts) -> float:
    denom = cc.x_tp + cc.x_fn
    return 0.0 if denom == 0 else cc.x_tp / denom


# ---------------------------------------------------------------------------
# Per-version and per-technique reports


@dataclass
class VersionReport:
    version_id: str
    r: int
    k: int
    n_failures: int
    fmi: float | None = None  # set only when k == r
    jc: float | None = None
    pr: float | None = None
    rr: float | None = None

    @property
    def k_equals_r(self) -> bool:
        return self.k == self.r


@dataclass
class TechniqueReport:
    technique: str
    n_versions: int
    v_equal: int
    s_m_fmi: float
    s_m_jc: float
    s_m_pr: float
    s_m_rr: float


def evaluate_version(
    version_id: str,
    r: int,
    generated: dict[str, int],
    oracle: dict[str, int],
) -> VersionReport:
    """Metrics for one version; clustering metrics only when k = r."""
    ids = _check_same_failures(generated, oracle)
    k = len(set(generated.values()))
    report = VersionReport(version_id=version_id, r=r, k=k, n_failures=len(ids))
    if k != r:
        return report
    pc = pair_counts(generated, oracle)
    mapping = align_clusters(generated, oracle, r)
    cc = case_counts(generated, oracle, mapping)
    report.fmi = fmi(pc)
    report.jc = jc(pc)
    report.pr = pr(cc)
    report.rr = rr(cc)
    return report


def aggregate(reports: list[VersionReport], technique: str) -> TechniqueReport:
    """V_equal plus metric sums over exactly the k = r versions."""
    hits = [rep for rep in reports if rep.k_equals_r]
    return TechniqueReport(
        technique=technique,
        n_versions=len(reports),
        v_equal=len(hits),
        s_m_fmi=sum(rep.fmi or 0.0 for rep in hits),
        s_m_jc=sum(rep.jc or 0.0 for rep in hits),
        s_m_pr=sum(rep.pr or 0.0 for rep in hits),
        s_m_rr=sum(rep.rr or 0.0 for rep in hits),
    )


def format_table(reports: list[TechniqueReport]) -> str:
    """Human-readable comparison table, one row per technique."""
    header = f"{'technique':<12} {'V_equal':>8} {'S_M_FMI':>9} {'S_M_JC':>9} {'S_M_PR':>9} {'S_M_RR':>9}"
    lines = [header, "-" * len(header)]
    for rep in reports:
        lines.append(
            f"{rep.technique:<12} {rep.v_equal:>8d} {rep.s_m_fmi:>9.2f} "
            f"{rep.s_m_jc:>9.2f} {rep.s_m_pr:>9.2f} {rep.s_m_rr:>9.2f}"
        )
    return "\n".join(lines)
