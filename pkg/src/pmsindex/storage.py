"""On-disk layout and JSON schemas for pipeline artifacts.

Benchmark root:

    versions/<id>/base.toy      clean program source
                  program.toy   composed faulty program source
                  faults.json   mutant list
                  suite.json    test cases
                  oracle.json   failing test id -> fault index
    runs/<id>/traces.json       trace document (schema pmsindex/traces-v1)
              pms/<test>.png    spectrum images (+ .json sidecars)
              clusters.json     clustering result (schema pmsindex/clusters-v1)
    model.bin                   trained similarity model
    reports/eval.json, eval.txt

All JSON is dumped with sorted keys and a trailing newline so reruns are
byte-identical.
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import SchemaError
from .evaluate import TechniqueReport, VersionReport
from .indexer import ClusteringResult
from .memcollect import BreakpointSet, MemorySnapshot, MemoryTrace
from .workbench.interp import TestCase, TestTrace
from .workbench.lang import parse_program
from .workbench.mutate import FaultyVersion, Mutant

TRACES_SCHEMA = "pmsindex/traces-v1"
CLUSTERS_SCHEMA = "pmsindex/clusters-v1"
EVAL_SCHEMA = "pmsindex/eval-v1"


def dump_json(payload, path: str | Path) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def load_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


def _require(payload: dict, key: str, path) -> object:
    if key not in payload:
        raise SchemaError(f"{path} is missing required key {key!r}")
    return payload[key]


# ---------------------------------------------------------------------------
# Versions


def save_version(version: FaultyVersion, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "base.toy").write_text(version.base.render())
    (directory / "program.toy").write_text(version.program.render())
    dump_json(
        [
            {"kind": m.kind, "target_statement": m.target_statement, "edit": list(m.edit)}
            for m in version.faults
        ],
        directory / "faults.json",
    )
    save_suite(version.suite, directory / "suite.json")
    dump_json(
        {"version_id": version.version_id, "oracle": version.oracle},
        directory / "oracle.json",
    )
    return directory


def save_suite(suite: list[TestCase], path: str | Path) -> None:
    dump_json(
        [
            {"id": t.id, "inputs": t.inputs, "expected_output": t.expected_output}
            for t in suite
        ],
        path,
    )


def load_suite(path: str | Path) -> list[TestCase]:
    payload = load_json(path)
    if not isinstance(payload, list):
        raise SchemaError(f"{path}: a suite is a list of test cases")
    suite = []
    ids = set()
    for entry in payload:
        tid = str(_require(entry, "id", path))
        if tid in ids:
            raise SchemaError(f"{path}: duplicate test id {tid!r}")
        ids.add(tid)
        suite.append(
            TestCase(
                id=tid,
                inputs=dict(_require(entry, "inputs", path)),
                expected_output=str(_require(entry, "expected_output", path)),
            )
        )
    return suite


def load_version(directory: str | Path) -> FaultyVersion:
    directory = Path(directory)
    base = parse_program((directory / "base.toy").read_text())
    program = parse_program((directory / "program.toy").read_text())
    faults_payload = load_json(directory / "faults.json")
    faults = [
        Mutant(
            kind=str(_require(f, "kind", directory / "faults.json")),
            target_statement=int(_require(f, "target_statement", directory / "faults.json")),
            edit=tuple(_require(f, "edit", directory / "faults.json")),
        )
        for f in faults_payload
    ]
    suite = load_suite(directory / "suite.json")
    oracle_payload = load_json(directory / "oracle.json")
    return FaultyVersion(
        version_id=str(_require(oracle_payload, "version_id", directory / "oracle.json")),
        base=base,
        faults=faults,
        program=program,
        oracle={str(k): int(v) for k, v in _require(oracle_payload, "oracle", directory).items()},
        suite=suite,
    )


# ---------------------------------------------------------------------------
# Trace documents


def trace_document(
    version_id: str,
    l: int,
    traces: list[TestTrace],
    memory: dict[str, MemoryTrace],
    breakpoints: BreakpointSet,
    config: dict,
) -> dict:
    return {
        "schema": TRACES_SCHEMA,
        "version_id": version_id,
        "l": l,
        "config": config,
        "breakpoints": breakpoints.statements,
        "tests": [
            {
                "id": t.test_id,
                "outcome": t.outcome,
                "output": t.output,
                "hit_counts": {str(sid): count for sid, count in sorted(t.hit_counts.items())},
            }
            for t in traces
        ],
        "memory": {
            tid: {
                "m": trace.m,
                "snapshots": [
                    {
                        "breakpoint": s.breakpoint,
                        "seq": s.seq,
                        "entries": [list(e) for e in s.entries],
                    }
                    for s in trace.snapshots
                ],
            }
            for tid, trace in memory.items()
        },
    }


def load_trace_document(path: str | Path) -> dict:
    payload = load_json(path)
    if payload.get("schema") != TRACES_SCHEMA:
        raise SchemaError(f"{path}: expected schema {TRACES_SCHEMA!r}, got {payload.get('schema')!r}")
    for key in ("version_id", "l", "tests", "memory", "breakpoints"):
        _require(payload, key, path)
    return payload


def traces_from_document(payload: dict) -> list[TestTrace]:
    return [
        TestTrace(
            test_id=str(t["id"]),
            outcome=str(t["outcome"]),
            hit_counts={int(sid): int(c) for sid, c in t["hit_counts"].items()},
            output=str(t["output"]),
        )
        for t in payload["tests"]
    ]


def memory_from_document(payload: dict) -> dict[str, MemoryTrace]:
    out: dict[str, MemoryTrace] = {}
    for tid, entry in payload["memory"].items():
        snapshots = [
            MemorySnapshot(
                breakpoint=int(s["breakpoint"]),
                seq=int(s["seq"]),
                entries=[(str(n), str(v), int(d)) for n, v, d in s["entries"]],
            )
            for s in entry["snapshots"]
        ]
        trace = MemoryTrace(test_id=tid, snapshots=snapshots)
        if trace.m != int(entry["m"]):
            raise SchemaError(f"memory of {tid!r}: entry count {trace.m} != recorded m {entry['m']}")
        out[tid] = trace
    return out


# ---------------------------------------------------------------------------
# Clustering results and evaluation reports


def clusters_document(
    result: ClusteringResult, version_id: str, r: int, method: str
) -> dict:
    return {
        "schema": CLUSTERS_SCHEMA,
        "version_id": version_id,
        "method": method,
        "r": r,
        "k": result.k,
        "failure_ids": result.failure_ids,
        "medoids": result.medoids,
        "assignment": result.assignment,
        "oracle": result.oracle,
        "distances": None
        if result.distances is None
        else [[round(float(x), 12) for x in row] for row in result.distances],
    }


def load_clusters_document(path: str | Path) -> dict:
    payload = load_json(path)
    if payload.get("schema") != CLUSTERS_SCHEMA:
        raise SchemaError(f"{path}: expected schema {CLUSTERS_SCHEMA!r}, got {payload.get('schema')!r}")
    for key in ("version_id", "method", "r", "k", "assignment", "oracle"):
        _require(payload, key, path)
    return payload


def eval_document(
    technique_reports: list[TechniqueReport], version_reports: dict[str, list[VersionReport]]
) -> dict:
    return {
        "schema": EVAL_SCHEMA,
        "techniques": [
            {
                "technique": rep.technique,
                "n_versions": rep.n_versions,
                "v_equal": rep.v_equal,
                "s_m_fmi": round(rep.s_m_fmi, 12),
                "s_m_jc": round(rep.s_m_jc, 12),
                "s_m_pr": round(rep.s_m_pr, 12),
                "s_m_rr": round(rep.s_m_rr, 12),
            }
            for rep in technique_reports
        ],
        "versions": {
            technique: [
                {
                    "version_id": rep.version_id,
                    "r": rep.r,
                    "k": rep.k,
                    "n_failures": rep.n_failures,
                    "k_equals_r": rep.k_equals_r,
                    "fmi": None if rep.fmi is None else round(rep.fmi, 12),
                    "jc": None if rep.jc is None else round(rep.jc, 12),
                    "pr": None if rep.pr is None else round(rep.pr, 12),
                    "rr": None if rep.rr is None else round(rep.rr, 12),
                }
                for rep in reps
            ]
            for technique, reps in version_reports.items()
        },
    }
