"""Iris ingestion, standardization and construction of classification problems."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifier import ClassificationProblem, canonical_frame, decode_angle

IRIS_HEADER = ["sepal_length", "sepal_width", "petal_length", "petal_width", "species"]
SPECIES = ("setosa", "versicolor", "virginica")
RETAINED = ("setosa", "versicolor")
IRIS_ROWS = 150

# printed vectors from the two published experiments; x0 is (1, 0) in both
PRESETS = {
    "dataset1": {"x0": (1.0, 0.0), "x1": (-0.9929, 0.1191), "x_test": (0.9939, 0.1103)},
    "dataset2": {"x0": (1.0, 0.0), "x1": (-0.1983, 0.9802), "x_test": (0.5545, 0.8322)},
}
# Iris rows (0-based) the published data sets were drawn from
PRESET_INDICES = {"dataset1": (34, 75, 13), "dataset2": (21, 58, 82)}


class DataFormatError(ValueError):
    pass


class DegeneratePointError(ValueError):
    pass


@dataclass(frozen=True)
class RawIrisRow:
    sepal_length: float
    sepal_width: float
    petal_length: float
    petal_width: float
    species: str
    source_index: int

    @property
    def measurements(self) -> tuple[float, float, float, float]:
        return (self.sepal_length, self.sepal_width, self.petal_length, self.petal_width)


@dataclass(frozen=True)
class PipelineParams:
    """Standardization settings; only the first two features are ever used.

    ``population`` selects the rows the mean/stddev come from: ``"retained"``
    (the 100 setosa + versicolor rows) or ``"all"`` (all 150 rows).
    """

    population: str = "retained"
    ddof: int = 0

    def __post_init__(self):
        if self.population not in ("retained", "all"):
            raise ValueError(f"unknown population {self.population!r}")
        if self.ddof not in (0, 1):
            raise ValueError("ddof must be 0 or 1")


@dataclass(frozen=True)
class ProcessedPoint:
    source_index: int
    species: str
    features: np.ndarray


def default_iris_path() -> Path:
    return Path(str(resources.files("qdbc") / "data" / "iris.csv"))


def load_iris(path: str | Path | None = None) -> list[RawIrisRow]:
    path = default_iris_path() if path is None else Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataFormatError(f"{path}: empty file")
        if [h.strip() for h in header] != IRIS_HEADER:
            raise DataFormatError(f"{path}: unexpected header {header!r}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 5:
                raise DataFormatError(f"{path}:{lineno}: expected 5 fields, got {len(rec)}")
            try:
                values = [float(v) for v in rec[:4]]
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) and v > 0 for v in values):
                raise DataFormatError(f"{path}:{lineno}: measurements must be positive and finite")
            species = rec[4].strip()
            if species not in SPECIES:
                raise DataFormatError(f"{path}:{lineno}: unknown species {species!r}")
            rows.append(RawIrisRow(*values, species=species, source_index=len(rows)))
    if len(rows) != IRIS_ROWS:
        raise DataFormatError(f"{path}: expected {IRIS_ROWS} rows, got {len(rows)}")
    for sp in SPECIES:
        n = sum(r.species == sp for r in rows)
        if n != IRIS_ROWS // 3:
            raise DataFormatError(f"{path}: expected 50 {sp} rows, got {n}")
    return rows


def preprocess(rows: Sequence[RawIrisRow], params: PipelineParams = PipelineParams()) -> list[ProcessedPoint]:
    """z-score the first two features, then scale every retained point to unit length."""
    kept = [r for r in rows if r.species in RETAINED]
    if not kept:
        raise DataFormatError("no setosa/versicolor rows")
    X = np.array([r.measurements[:2] for r in kept])
    ref = X if params.population == "retained" else np.array([r.measurements[:2] for r in rows])
    mean = ref.mean(axis=0)
    std = ref.std(axis=0, ddof=params.ddof)
    if np.any(std <= 0):
        raise DegeneratePointError("zero standard deviation in a selected feature")
    Z = (X - mean) / std
    norms = np.hypot(Z[:, 0], Z[:, 1])
    bad = np.flatnonzero(norms < 1e-12)
    if bad.size:
        idx = [kept[i].source_index for i in bad]
        raise DegeneratePointError(f"rows {idx} standardize to the origin")
    Z /= norms[:, None]
    return [ProcessedPoint(r.source_index, r.species, z) for r, z in zip(kept, Z)]


def _normalized(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (2,) or not np.all(np.isfinite(v)):
        raise ValueError(f"expected a finite 2-vector, got {v!r}")
    n = float(np.hypot(*v))
    if n < 1e-12:
        raise DegeneratePointError("zero vector")
    return v / n


def problem_from_vectors(x0, x1, x_test) -> ClassificationProblem:
    """Normalize, rotate into the frame with x0 = (1, 0), and validate."""
    a, b, c = (_normalized(v) for v in (x0, x1, x_test))
    if np.allclose(a, b, rtol=0, atol=1e-12):
        raise ValueError("x0 and x1 coincide; the two classes must differ")
    a, b, c = canonical_frame(a, b, c)
    return ClassificationProblem.from_vectors(a, _normalized(b), _normalized(c))


def preset_problem(name: str) -> ClassificationProblem:
    """Published data set, rescaled to unit length (the printed 4-digit vectors are off by ~1e-5)."""
    try:
        p = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return problem_from_vectors(p["x0"], p["x1"], p["x_test"])


def problem_from_indices(
    indices: Sequence[int],
    rows: Sequence[RawIrisRow] | None = None,
    params: PipelineParams = PipelineParams(),
) -> ClassificationProblem:
    """Build a problem from 0-based Iris rows (x0 setosa, x1 versicolor, test either)."""
    if len(indices) != 3:
        raise ValueError("need exactly three indices: x0, x1, test")
    rows = load_iris() if rows is None else rows
    for i in indices:
        if not 0 <= i < len(rows):
            raise IndexError(f"Iris index {i} out of range [0, {len(rows)})")
    i0, i1, it = indices
    if rows[i0].species != "setosa" or rows[i1].species != "versicolor":
        raise ValueError("x0 must be a setosa row and x1 a versicolor row")
    if rows[it].species not in RETAINED:
        raise ValueError("test row must be setosa or versicolor")
    by_index = {p.source_index: p.features for p in preprocess(rows, params)}
    return problem_from_vectors(by_index[i0], by_index[i1], by_index[it])


def problem_from_angles(phi: float, omega: float) -> ClassificationProblem:
    return problem_from_vectors(decode_angle(0.0), decode_angle(phi), decode_angle(omega))


def build_problem(spec: dict, rows: Sequence[RawIrisRow] | None = None,
                  params: PipelineParams = PipelineParams()) -> ClassificationProblem:
    """Dispatch on a problem spec holding exactly one of
    ``preset``, ``indices``, ``points`` ({x0, x1, x_test}) or ``angles`` ({phi, omega}).
    """
    kinds = [k for k in ("preset", "indices", "points", "angles") if spec.get(k) is not None]
    if len(kinds) != 1:
        raise ValueError(f"exactly one problem spec required, got {kinds or 'none'}")
    kind = kinds[0]
    value = spec[kind]
    if kind == "preset":
        return preset_problem(value)
    if kind == "indices":
        return problem_from_indices([int(i) for i in value], rows, params)
    if kind == "points":
        return problem_from_vectors(value["x0"], value["x1"], value["x_test"])
    return problem_from_angles(float(value["phi"]), float(value["omega"]))
