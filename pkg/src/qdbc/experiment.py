"""Experiment configuration, execution and report rendering."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from . import classifier as clf
from . import sim
from .data import PipelineParams, build_problem, load_iris

RUN_MODES = ("exact", "sampled", "oracle", "all")
OUTPUT_FORMATS = ("json", "csv", "table")
PROBLEM_KEYS = ("preset", "indices", "points", "angles")
DECIMALS = 6

# row titles for the table layout
_TABLE_ROWS = {"sampled": "Simulation", "exact": "Theoretical", "oracle": "Oracle"}


@dataclass
class ExperimentConfig:
    problem: dict
    mode: str = "exact"
    shots: int = 2048
    seed: int = 0
    output: str = "json"
    export_cqasm: str | None = None
    iris: str | None = None
    standardize_over: str = "retained"
    raw_reduction: bool = False

    def __post_init__(self):
        given = [k for k in PROBLEM_KEYS if self.problem.get(k) is not None]
        if len(given) != 1:
            raise ValueError(f"exactly one problem spec required, got {given or 'none'}")
        if self.mode not in RUN_MODES:
            raise ValueError(f"mode must be one of {RUN_MODES}")
        if self.output not in OUTPUT_FORMATS:
            raise ValueError(f"output must be one of {OUTPUT_FORMATS}")
        if isinstance(self.shots, bool) or not isinstance(self.shots, int) or self.shots < 1:
            raise ValueError("shots must be a positive integer")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        PipelineParams(population=self.standardize_over)

    @property
    def modes(self) -> list[str]:
        return ["exact", "sampled", "oracle"] if self.mode == "all" else [self.mode]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["problem"] = {k: v for k, v in self.problem.items() if v is not None}
        return d


@dataclass
class ExperimentReport:
    config: dict
    angles: clf.EncodedAngles
    reduction: clf.ReductionParams | None
    results: dict[str, clf.ClassificationReport]
    general: clf.LabelDistribution | None = None
    circuit: str | None = None
    deltas: dict[str, float] = field(default_factory=dict)

    @property
    def label(self) -> int | None:
        for mode in ("exact", "sampled", "oracle"):
            if mode in self.results:
                return self.results[mode].label
        return None

    def to_dict(self) -> dict[str, Any]:
        results = {}
        for mode, rep in self.results.items():
            entry: dict[str, Any] = {}
            if rep.distribution is not None:
                entry.update(asdict(rep.distribution))
            if mode == "sampled":
                entry["shots"] = rep.counts.total_shots
                entry["accepted"] = rep.extra["accepted"]
                entry["counts"] = dict(sorted(rep.counts.counts.items()))
            if rep.decision_sum is not None:
                entry["decision_sum"] = rep.decision_sum
            entry["label"] = rep.label
            results[mode] = entry
        return _rounded({
            "config": self.config,
            "angles": asdict(self.angles),
            "reduction": None if self.reduction is None else asdict(self.reduction),
            "results": results,
            "general": None if self.general is None else asdict(self.general),
            "label": self.label,
            "deltas": self.deltas,
            "circuit": self.circuit,
        })


def _rounded(obj):
    if isinstance(obj, float):
        # normalise -0.0 so reruns render identically
        return round(obj, DECIMALS) + 0.0
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    rows = load_iris(config.iris) if config.problem.get("indices") is not None else None
    problem = build_problem(config.problem, rows, PipelineParams(population=config.standardize_over))
    canonical = not config.raw_reduction
    angles = clf.encode_problem(problem)

    try:
        reduction = clf.params_for(angles.phi, angles.omega, canonical=canonical)
    except clf.DegenerateRatioError:
        if any(m != "oracle" for m in config.modes):
            raise
        reduction = None

    results = {
        mode: clf.classify(problem, mode, shots=config.shots, seed=config.seed, canonical=canonical)
        for mode in config.modes
    }

    general = None
    if reduction is not None:
        general = clf.general_classify_exact(problem.points, problem.x_test)

    circuit = None
    if reduction is not None:
        circ = clf.build_reduced_circuit(reduction)
        circuit = sim.to_cqasm(circ)
        if config.export_cqasm:
            Path(config.export_cqasm).write_text(circuit, encoding="utf-8")

    deltas = {}
    if "exact" in results and "sampled" in results:
        e, s = results["exact"].distribution, results["sampled"].distribution
        deltas = {k: getattr(s, k) - getattr(e, k) for k in ("p_acc", "p_minus", "p_plus")}

    return ExperimentReport(config.to_dict(), angles, reduction, results, general, circuit, deltas)


def _label_text(label: int | None) -> str:
    return "tie" if label is None else str(label)


def _fmt(x: float | None, digits: int = DECIMALS) -> str:
    return "" if x is None else f"{x:.{digits}f}"


def render_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def render_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["mode", "p_acc", "p_minus", "p_plus", "label"])
    for mode, rep in report.results.items():
        d = rep.distribution
        writer.writerow([
            mode,
            _fmt(d and d.p_acc),
            _fmt(d and d.p_minus),
            _fmt(d and d.p_plus),
            _label_text(rep.label),
        ])
    return buf.getvalue()


def render_table(report: ExperimentReport) -> str:
    head = f"{'':<12} | {'p_acc':>7} | {'P(y=-1)':>7} | {'P(y=1)':>7} | {'label':>5}"
    lines = [head, "-" * len(head)]
    for mode in ("sampled", "exact", "oracle"):
        rep = report.results.get(mode)
        if rep is None:
            continue
        d = rep.distribution
        cells = [_fmt(d and getattr(d, k), 4) for k in ("p_acc", "p_minus", "p_plus")]
        lines.append(
            f"{_TABLE_ROWS[mode]:<12} | {cells[0]:>7} | {cells[1]:>7} | {cells[2]:>7} | "
            f"{_label_text(rep.label):>5}"
        )
    r = report.reduction
    if r is not None:
        lines.append("")
        lines.append(
            f"t = {r.t:.6f}  t_canonical = {r.t_canonical:.6f}  "
            f"omega' = {r.omega_prime:.6f}  orientation = {r.orientation}"
        )
    a = report.angles
    lines.append(f"theta = {a.theta:.4f}  phi = {a.phi:.4f}  omega = {a.omega:.4f}")
    return "\n".join(lines) + "\n"


def render_report(report: ExperimentReport, fmt: str = "json") -> str:
    renderers = {"json": render_json, "csv": render_csv, "table": render_table}
    try:
        return renderers[fmt](report)
    except KeyError:
        raise ValueError(f"unknown format {fmt!r}") from None
