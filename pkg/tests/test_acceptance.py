"""Acceptance criteria, one test per criterion, one printed verdict each.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines.
The end-to-end benchmark (criterion 6) and the determinism rerun
(criterion 7) dominate the runtime; everything else finishes in seconds.
"""
import json
import math
import random
from pathlib import Path

import numpy as np
import pytest

from pmsindex.bench import build_training_pairs, generate_versions, split_versions
from pmsindex.cli import RunConfig, main
from pmsindex.evaluate import aggregate, evaluate_version, fmi, format_table, jc, pair_counts
from pmsindex.indexer import estimate_fault_count, index_failures, kmedoids, pms_distance
from pmsindex.pms import str_to_int
from pmsindex.simnet import SiameseSimilarity, TrainingPair, grad_check, init_params
from pmsindex.pms import PMSImage
from pmsindex.spectrum import coverage_fingerprint, sd_ranking
from pmsindex.workbench.fixtures import word_filter_version
from pmsindex.workbench.mutate import run_suite

SHARED_GP03_RANKING = [1, 1, 3, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 15, 15, 15]
SHARED_HIT_VECTOR = [1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1]

# Pinned desk-scale run: toy programs have tens of statements, not
# thousands, so the breakpoint share and the learning-rate budget are
# raised above the library defaults; every value is a config field.
BENCH_SEED = 42
BENCH_CONFIG = RunConfig(
    breakpoint_x=60.0,
    uniform_side=32,
    initial_lr=2e-3,
    epochs=120,
    train_split_fraction=0.30,
    seed=0,
)


def _verdict(name: str, ok: bool) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}")
    assert ok, name


@pytest.fixture(scope="module")
def benchmark_run():
    """Criterion 6 pipeline, shared: generate, split, train, index, evaluate."""
    config = BENCH_CONFIG
    icfg = config.index_config()
    versions = generate_versions(n_versions=60, seed=BENCH_SEED, config=icfg)
    train, test = split_versions(versions, config.train_split_fraction, config.seed)
    pairs = build_training_pairs(train, icfg)
    model = config.model().fit_pairs(pairs)
    reports = {m: [] for m in ("sure", "cov_hit", "cov_count", "mseer_gp19")}
    for version in test:
        for method in reports:
            result = index_failures(
                version, method, model if method == "sure" else None, icfg
            )
            reports[method].append(
                evaluate_version(version.version_id, version.r, result.assignment, result.oracle)
            )
    return {method: aggregate(reps, method) for method, reps in reports.items()}


class TestCriterion1WordFilterExample:
    def test_word_filter_reproduction(self):
        version = word_filter_version()
        traces = run_suite(version.program, version.suite)
        failures = sorted(t.test_id for t in traces if t.failed)
        ok_failures = failures == [f"t{i}" for i in range(1, 7)]

        failed_traces = [t for t in traces if t.failed]
        passed_traces = [t for t in traces if not t.failed]
        ok_cov = all(
            coverage_fingerprint(t, 17, "hit") == SHARED_HIT_VECTOR for t in failed_traces
        )
        ok_rank = all(
            sd_ranking(t, passed_traces, 17, "gp03") == SHARED_GP03_RANKING
            for t in failed_traces
        )
        _verdict(
            "criterion 1: word_filter fixture (failures t1..t6, hit vectors, rankings)",
            ok_failures and ok_cov and ok_rank,
        )


class TestCriterion2StringEncoding:
    def test_encoding_conformance(self):
        ok_example = str_to_int("Ee01") == 611
        # order sensitivity holds in the form the formula guarantees:
        # swapping two adjacent distinct characters always changes the sum
        # (whole-permutation invariance is false: "pms"/"msp" collide)
        rng = random.Random(2024)
        alphabet = [chr(c) for c in range(33, 127)]
        ok_perm = True
        for _ in range(300):
            length = rng.randrange(2, 9)
            chars = rng.sample(alphabet, length)  # distinct characters
            s = "".join(chars)
            pos = rng.randrange(length - 1)
            swapped = s[:pos] + s[pos + 1] + s[pos] + s[pos + 2:]
            ok_perm = ok_perm and str_to_int(swapped) != str_to_int(s)
        _verdict("criterion 2: position-weighted encoding (611 + order sensitivity)",
                 ok_example and ok_perm)


class TestCriterion3GradientCorrectness:
    def test_full_network_gradient(self):
        rng = np.random.default_rng(7)
        params = init_params("tiny", 8, 8, seed=3)
        a = rng.uniform(0.05, 0.95, size=(3, 8, 8))
        b = rng.uniform(0.05, 0.95, size=(3, 8, 8))
        worst = 0.0
        for label in (1.0, 0.0):
            report = grad_check(params, a, b, label=label, step=1e-4)
            worst = max(worst, report["max"])
        print(f"\n    max relative error: {worst:.3e}")
        _verdict("criterion 3: analytic gradients match central differences (< 1e-3)",
                 worst < 1e-3)


class TestCriterion4DistanceAndClustering:
    def test_distance_formula_and_block_structure(self):
        ok_zero = pms_distance(1.0, 3.7) == 0.0
        ok_within = abs(pms_distance(0.99, 1.0) - 0.01) < 1e-12

        d = np.array([
            [0.00, 0.01, 1.26, 1.26, 2.78, 2.78, 2.78],
            [0.01, 0.00, 1.26, 1.26, 2.78, 2.78, 2.78],
            [1.26, 1.26, 0.00, 0.02, 3.51, 3.51, 3.51],
            [1.26, 1.26, 0.02, 0.00, 3.51, 3.51, 3.51],
            [2.78, 2.78, 3.51, 3.51, 0.00, 0.01, 0.02],
            [2.78, 2.78, 3.51, 3.51, 0.01, 0.00, 0.02],
            [2.78, 2.78, 3.51, 3.51, 0.02, 0.02, 0.00],
        ])
        k, initial = estimate_fault_count(d)
        ok_k = k == 3
        ok_partition = False
        if ok_k:
            _, labels = kmedoids(d, k, initial)
            partition = sorted(sorted(np.flatnonzero(labels == c).tolist()) for c in range(k))
            ok_partition = partition == [[0, 1], [2, 3], [4, 5, 6]]
        _verdict("criterion 4: distance formula + block-structured k = 3 and {2,2,3} partition",
                 ok_zero and ok_within and ok_k and ok_partition)


class TestCriterion5MetricOracle:
    def test_pair_metrics_match_brute_force(self):
        rng = random.Random(77)
        ok = True
        for _ in range(200):
            n = rng.randrange(1, 31)
            ids = [f"t{i}" for i in range(n)]
            generated = {t: rng.randrange(1, 6) for t in ids}
            oracle = {t: rng.randrange(1, 6) for t in ids}
            ss = sd = ds = dd = 0
            for i in range(n):
                for j in range(i + 1, n):
                    a, b = ids[i], ids[j]
                    sg = generated[a] == generated[b]
                    so = oracle[a] == oracle[b]
                    ss += sg and so
                    sd += sg and not so
                    ds += (not sg) and so
                    dd += (not sg) and (not so)
            pc = pair_counts(generated, oracle)
            ok = ok and (pc.x_ss, pc.x_sd, pc.x_ds, pc.x_dd) == (ss, sd, ds, dd)
            bf_fmi = math.sqrt((ss / (ss + sd)) * (ss / (ss + ds))) if ss else 0.0
            bf_jc = ss / (ss + sd + ds) if (ss + sd + ds) else 0.0
            ok = ok and abs(fmi(pc) - bf_fmi) < 1e-12 and abs(jc(pc) - bf_jc) < 1e-12
        _verdict("criterion 5: pair counts and FMI/JC match brute force (200 partitions)", ok)


class TestCriterion6EndToEnd:
    def test_learned_method_vs_coverage_baselines(self, benchmark_run):
        table = format_table(list(benchmark_run.values()))
        print("\n" + table)
        sure = benchmark_run["sure"]
        cov_hit = benchmark_run["cov_hit"]
        cov_count = benchmark_run["cov_count"]
        ok = (
            sure.v_equal >= cov_hit.v_equal
            and sure.v_equal >= cov_count.v_equal
            and sure.s_m_fmi >= cov_hit.s_m_fmi
        )
        _verdict(
            "criterion 6: end-to-end benchmark ordering "
            f"(V {sure.v_equal} >= {cov_hit.v_equal}/{cov_count.v_equal}, "
            f"FMI {sure.s_m_fmi:.2f} >= {cov_hit.s_m_fmi:.2f})",
            ok,
        )


class TestCriterion7Determinism:
    def test_pipeline_reruns_byte_identical(self, tmp_path):
        artifacts = [self._run_pipeline(tmp_path / tag) for tag in ("one", "two")]
        names = sorted(artifacts[0])
        ok = bool(names) and all(
            artifacts[0][name] == artifacts[1][name] for name in names
        )
        counts = {
            "traces": sum(n.endswith("traces.json") for n in names),
            "png": sum(n.endswith(".png") for n in names),
            "model": sum(n.endswith("model.bin") for n in names),
            "eval": sum("eval" in n for n in names),
        }
        print(f"\n    compared byte-identical artifacts: {counts}")
        _verdict("criterion 7: rerun produces byte-identical artifacts", ok)

    @staticmethod
    def _run_pipeline(root: Path) -> dict[str, bytes]:
        root.mkdir(parents=True)
        config_path = root / "config.json"
        config_path.write_text(json.dumps({
            "breakpoint_x": 40.0, "uniform_side": 16, "epochs": 3, "seed": 11,
        }))
        assert main(["gen-bench", "--out", str(root), "--versions", "6",
                     "--max-faults", "2", "--seed", "11"]) == 0
        version_dirs = sorted((root / "versions").iterdir())
        for vdir in version_dirs:
            run = root / "runs" / vdir.name
            assert main(["trace", str(vdir / "program.toy"), str(vdir / "suite.json"),
                         "--out", str(run / "traces.json"),
                         "--config", str(config_path)]) == 0
            assert main(["pms", str(run / "traces.json"), "--out", str(run / "pms")]) == 0
        model_path = root / "model.bin"
        assert main(["train", str(root), "--out", str(model_path),
                     "--config", str(config_path)]) == 0
        for vdir in version_dirs:
            run = root / "runs" / vdir.name
            for method in ("sure", "cov_hit"):
                argv = ["index", str(vdir), "--method", method,
                        "--out", str(run / f"clusters-{method}.json"),
                        "--config", str(config_path)]
                if method == "sure":
                    argv += ["--model", str(model_path)]
                assert main(argv) == 0
        assert main(["eval", str(root / "runs"), "--out", str(root / "reports")]) == 0
        collected: dict[str, bytes] = {}
        for pattern in ("runs/*/traces.json", "runs/*/pms/*/*.png", "model.bin",
                        "reports/eval.json", "reports/eval.txt"):
            for path in sorted(root.glob(pattern)):
                collected[str(path.relative_to(root))] = path.read_bytes()
        return collected


class TestCriterion8SeparableTraining:
    def test_loss_collapses_under_default_schedule(self):
        rng = np.random.default_rng(5)
        pairs = []
        for i in range(2048):
            dark = _flat_image(6, int(rng.integers(0, 40)))
            dark2 = _flat_image(6, int(rng.integers(0, 40)))
            bright = _flat_image(6, int(rng.integers(215, 256)))
            pairs.append(TrainingPair(dark, dark2, 1))
            pairs.append(TrainingPair(dark2 if i % 2 else dark, bright, 0))
        model = SiameseSimilarity(
            arch="tiny", uniform_side=8, head_hidden=16,
            batch_size=16, initial_lr=1e-4, lr_decay_per_epoch=0.96,
            epochs=80, seed=0,
        )
        model.fit_pairs(pairs)
        history = model.loss_history_
        ratio = history[-1] / history[0]
        print(f"\n    first-epoch loss {history[0]:.4f}, final {history[-1]:.4f}, ratio {ratio:.3f}")
        _verdict("criterion 8: separable training collapses BCE below 10% of epoch 1",
                 history[-1] < 0.1 * history[0])


def _flat_image(side: int, value: int) -> PMSImage:
    return PMSImage(pixels=np.full((side, side, 3), value, dtype=np.uint8), original_side=side)
