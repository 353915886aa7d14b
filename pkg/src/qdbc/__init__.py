"""Exact simulation of the two-qubit distance-based quantum classifier."""
from .classifier import (
    ClassificationProblem,
    DataPoint,
    EncodedAngles,
    LabelDistribution,
    ReductionParams,
    classify,
    classify_classical,
    encode_angle,
    general_classify_exact,
    reduce,
    reduced_classify_exact,
    reduced_classify_sampled,
)
from .data import build_problem, load_iris, preprocess, preset_problem

__version__ = "0.1.0"
