"""Command-line pipeline over on-disk artifacts.

Commands compose through files: ``gen-bench`` writes faulty versions,
``trace`` turns a program plus suite into a trace document, ``pms`` turns
trace documents into spectrum images, ``train`` fits the similarity model
on a seeded 30% version split, ``index`` clusters one version's failures,
and ``eval`` folds clustering results into the comparison report.

Exit codes: 0 success, 1 usage, 2 data error, 3 internal.
"""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import click

from .bench import build_training_pairs, generate_versions, split_versions
from .errors import DataError, PmsIndexError
from .evaluate import aggregate, evaluate_version, format_table
from .indexer import ClusterConfig, IndexConfig, index_failures
from .memcollect import collect_memory, select_breakpoints
from .pms import encode_png, pms_image
from .simnet import SiameseSimilarity
from .spectrum import spectrum_counts, suspiciousness
from . import storage
from .workbench.interp import DEFAULT_STEP_BUDGET
from .workbench.lang import parse_program
from .workbench.mutate import run_suite

METHOD_CHOICES = ("sure", "cov_hit", "cov_count", "mseer_gp19")
FORMULA_CHOICES = ("gp03", "dstar2", "gp19")


@dataclass
class RunConfig:
    breakpoint_x: float = 10.0
    sbfl_formula: str = "dstar2"
    uniform_side: int = 64
    train_split_fraction: float = 0.30
    seed: int = 0
    ra_factor: float = 1.0
    rb_factor: float = 1.5
    delta: float = 0.15
    method: str = "sure"
    arch: str = "alexnet-small"
    head_hidden: int = 64
    batch_size: int = 16
    initial_lr: float = 1e-4
    lr_decay_per_epoch: float = 0.96
    epochs: int = 30
    step_budget: int = DEFAULT_STEP_BUDGET

    def validate(self) -> "RunConfig":
        if not 0 < self.breakpoint_x <= 100:
            raise DataError(f"breakpoint_x must be in (0, 100], got {self.breakpoint_x}")
        if not 0 < self.train_split_fraction <= 1:
            raise DataError(
                f"train_split_fraction must be in (0, 1], got {self.train_split_fraction}"
            )
        if self.sbfl_formula not in FORMULA_CHOICES:
            raise DataError(f"unknown formula {self.sbfl_formula!r}")
        if self.method not in METHOD_CHOICES:
            raise DataError(f"unknown method {self.method!r}")
        return self

    def index_config(self) -> IndexConfig:
        return IndexConfig(
            breakpoint_x=self.breakpoint_x,
            sbfl_formula=self.sbfl_formula,
            uniform_side=self.uniform_side,
            cluster=ClusterConfig(self.ra_factor, self.rb_factor, self.delta),
            step_budget=self.step_budget,
        )

    def model(self) -> SiameseSimilarity:
        return SiameseSimilarity(
            arch=self.arch,
            uniform_side=self.uniform_side,
            head_hidden=self.head_hidden,
            batch_size=self.batch_size,
            initial_lr=self.initial_lr,
            lr_decay_per_epoch=self.lr_decay_per_epoch,
            epochs=self.epochs,
            seed=self.seed,
        )


def _load_config(config_path: str | None, **overrides) -> RunConfig:
    config = RunConfig()
    if config_path is not None:
        payload = storage.load_json(config_path)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(payload) - known
        if unknown:
            raise DataError(f"unknown config key(s): {sorted(unknown)}")
        config = RunConfig(**{**asdict(config), **payload})
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    return config.validate()


config_option = click.option("--config", "config_path", default=None, type=click.Path(exists=True))
seed_option = click.option("--seed", default=None, type=int)


@click.group()
def cli() -> None:
    """Failure indexing over program-memory spectrum images."""


@cli.command("gen-bench")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--versions", "n_versions", default=48, show_default=True)
@click.option("--max-faults", default=3, show_default=True)
@config_option
@seed_option
def cmd_gen_bench(out_dir: str, n_versions: int, max_faults: int, config_path, seed) -> None:
    """Generate faulty benchmark versions under OUT/versions/."""
    config = _load_config(config_path, seed=seed)
    if not 1 <= max_faults <= 5:
        raise click.UsageError("--max-faults must be within 1..5")
    versions = generate_versions(
        n_versions=n_versions,
        fault_counts=tuple(range(1, max_faults + 1)),
        seed=config.seed,
        config=config.index_config(),
    )
    root = Path(out_dir) / "versions"
    for version in versions:
        storage.save_version(version, root / version.version_id)
    storage.dump_json(
        {"seed": config.seed, "versions": [v.version_id for v in versions]},
        Path(out_dir) / "benchmark.json",
    )
    click.echo(f"wrote {len(versions)} versions under {root}")


@cli.command("trace")
@click.argument("program_path", type=click.Path(exists=True))
@click.argument("suite_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--top-x", default=None, type=float)
@click.option("--formula", default=None, type=click.Choice(FORMULA_CHOICES))
@click.option("--version-id", default=None)
@config_option
@seed_option
def cmd_trace(program_path, suite_path, out_path, top_x, formula, version_id, config_path, seed) -> None:
    """Run SUITE on PROGRAM; write coverage traces and failure memory."""
    config = _load_config(config_path, breakpoint_x=top_x, sbfl_formula=formula, seed=seed)
    program = parse_program(Path(program_path).read_text())
    suite = storage.load_suite(suite_path)
    if not suite:
        raise click.UsageError(f"suite {suite_path} contains no test cases")
    if version_id is None:
        path = Path(program_path)
        version_id = path.parent.name if path.name == "program.toy" else path.stem
    traces = run_suite(program, suite, config.step_budget)
    counts = spectrum_counts(traces, program.l)
    scores = suspiciousness(counts, config.sbfl_formula)
    breakpoints = select_breakpoints(scores, config.breakpoint_x)
    failing = [t for t in suite if any(tr.test_id == t.id and tr.failed for tr in traces)]
    memory = {
        t.id: collect_memory(program, t, breakpoints, config.step_budget) for t in failing
    }
    document = storage.trace_document(
        version_id=version_id,
        l=program.l,
        traces=traces,
        memory=memory,
        breakpoints=breakpoints,
        config={
            "breakpoint_x": config.breakpoint_x,
            "sbfl_formula": config.sbfl_formula,
            "seed": config.seed,
        },
    )
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    storage.dump_json(document, out_path)
    click.echo(
        f"{version_id}: {sum(t.failed for t in traces)} failed / "
        f"{sum(not t.failed for t in traces)} passed; breakpoints {breakpoints.statements}"
    )


@cli.command("pms")
@click.argument("traces_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_pms(traces_path, out_dir) -> None:
    """Render every failure's memory trace in TRACES as a PNG image."""
    document = storage.load_trace_document(traces_path)
    memory = storage.memory_from_document(document)
    target = Path(out_dir) / document["version_id"]
    target.mkdir(parents=True, exist_ok=True)
    for tid in sorted(memory):
        encode_png(pms_image(memory[tid]), target / f"{tid}.png")
    click.echo(f"wrote {len(memory)} images under {target}")


@cli.command("train")
@click.argument("bench_dir", type=click.Path(exists=True))
@click.option("--out", "model_path", required=True, type=click.Path())
@click.option("--split", "train_split", default=None, type=float)
@click.option("--epochs", default=None, type=int)
@config_option
@seed_option
def cmd_train(bench_dir, model_path, train_split, epochs, config_path, seed) -> None:
    """Fit the similarity model on a seeded version-level split of BENCH_DIR."""
    config = _load_config(
        config_path, train_split_fraction=train_split, epochs=epochs, seed=seed
    )
    versions = _load_bench_versions(bench_dir)
    train, _ = split_versions(versions, config.train_split_fraction, config.seed)
    pairs = build_training_pairs(train, config.index_config())
    if not pairs:
        raise DataError("the training split produced no failure pairs")
    model = config.model().fit_pairs(pairs)
    model_path = Path(model_path)
    model_path.parent.mkdir(parents=True, exist_ok=True)
    model.save(model_path)
    storage.dump_json(
        {
            "train_versions": [v.version_id for v in train],
            "n_pairs": len(pairs),
            "n_positive": sum(p.label for p in pairs),
            "loss_history": [round(x, 12) for x in model.loss_history_],
            "seed": config.seed,
        },
        model_path.with_suffix(model_path.suffix + ".meta.json"),
    )
    click.echo(
        f"trained on {len(train)} versions, {len(pairs)} pairs; "
        f"loss {model.loss_history_[0]:.4f} -> {model.loss_history_[-1]:.4f}"
    )


def _load_bench_versions(bench_dir):
    root = Path(bench_dir)
    versions_dir = root / "versions" if (root / "versions").is_dir() else root
    version_dirs = sorted(p for p in versions_dir.iterdir() if (p / "oracle.json").is_file())
    if not version_dirs:
        raise DataError(f"{bench_dir} holds no benchmark versions")
    return [storage.load_version(p) for p in version_dirs]


@cli.command("index")
@click.argument("version_dir", type=click.Path(exists=True))
@click.option("--method", default="sure", type=click.Choice(METHOD_CHOICES), show_default=True)
@click.option("--model", "model_path", default=None, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@config_option
@seed_option
def cmd_index(version_dir, method, model_path, out_path, config_path, seed) -> None:
    """Cluster the failures of one faulty version."""
    config = _load_config(config_path, method=method, seed=seed)
    version = storage.load_version(version_dir)
    model = None
    if method == "sure":
        if model_path is None:
            raise click.UsageError("method 'sure' needs --model")
        model = SiameseSimilarity.load(model_path)
    result = index_failures(version, method, model, config.index_config())
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    storage.dump_json(
        storage.clusters_document(result, version.version_id, version.r, method), out_path
    )
    click.echo(f"{version.version_id} [{method}]: k = {result.k}, r = {version.r}")


@cli.command("eval")
@click.argument("results_dir", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_eval(results_dir, out_dir) -> None:
    """Aggregate clustering results into the technique comparison report."""
    paths = sorted(Path(results_dir).rglob("clusters*.json"))
    if not paths:
        raise DataError(f"no clusters*.json found under {results_dir}")
    by_method: dict[str, list] = {}
    for path in paths:
        payload = storage.load_clusters_document(path)
        report = evaluate_version(
            version_id=payload["version_id"],
            r=int(payload["r"]),
            generated={str(k): int(v) for k, v in payload["assignment"].items()},
            oracle={str(k): int(v) for k, v in payload["oracle"].items()},
        )
        by_method.setdefault(str(payload["method"]), []).append(report)
    technique_reports = [
        aggregate(reports, method) for method, reports in sorted(by_method.items())
    ]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    storage.dump_json(storage.eval_document(technique_reports, by_method), out / "eval.json")
    table = format_table(technique_reports)
    (out / "eval.txt").write_text(table + "\n")
    click.echo(table)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except PmsIndexError as exc:
        click.echo(f"internal error: {exc}", err=True)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
