"""Distance-based classification: classical threshold rule, the multi-register
quantum classifier for small balanced data sets, and its two-qubit reduction.

Every training/test point is a unit 2-vector. A point x is angle-encoded as
``cos(a/2)|0> - sin(a/2)|1>``, i.e. ``Ry(-a)|0>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import sim

UNIT_TOL = 1e-9
TIE_TOL = 1e-12
RATIO_DENOM_TOL = 1e-15
MAX_GENERAL_POINTS = 8

NORMAL = "normal"
SWAPPED = "swapped"

MODES = ("exact", "sampled", "oracle")


class ClassifierError(Exception):
    pass


class NonUnitVectorError(ClassifierError, ValueError):
    pass


class TieError(ClassifierError):
    """Both labels are equally supported; no label is assigned."""


class DegenerateRatioError(ClassifierError):
    pass


class NoAcceptanceError(ClassifierError):
    """Every shot failed post-selection."""


def _unit(vec, what: str = "vector") -> np.ndarray:
    v = np.asarray(vec, dtype=float).reshape(-1)
    if v.shape != (2,) or not np.all(np.isfinite(v)):
        raise NonUnitVectorError(f"{what} must be a finite 2-vector, got {vec!r}")
    norm = float(np.hypot(v[0], v[1]))
    if abs(norm - 1.0) > UNIT_TOL:
        raise NonUnitVectorError(f"{what} has norm {norm!r}, expected 1")
    return v


@dataclass(frozen=True)
class DataPoint:
    features: np.ndarray
    label: int

    def __post_init__(self):
        object.__setattr__(self, "features", _unit(self.features, "features"))
        if self.label not in (-1, 1):
            raise ValueError(f"label must be -1 or +1, got {self.label!r}")


@dataclass(frozen=True)
class ClassificationProblem:
    x0: DataPoint
    x1: DataPoint
    x_test: np.ndarray

    def __post_init__(self):
        if self.x0.label != -1 or self.x1.label != 1:
            raise ValueError("x0 must carry label -1 and x1 label +1")
        object.__setattr__(self, "x_test", _unit(self.x_test, "x_test"))

    @classmethod
    def from_vectors(cls, x0, x1, x_test) -> "ClassificationProblem":
        return cls(DataPoint(x0, -1), DataPoint(x1, 1), x_test)

    @classmethod
    def from_angles(cls, phi: float, omega: float, theta: float = 0.0) -> "ClassificationProblem":
        return cls.from_vectors(decode_angle(theta), decode_angle(phi), decode_angle(omega))

    @property
    def points(self) -> list[DataPoint]:
        return [self.x0, self.x1]


@dataclass(frozen=True)
class EncodedAngles:
    theta: float
    phi: float
    omega: float


@dataclass(frozen=True)
class ReductionParams:
    t: float
    t_canonical: float
    omega_prime: float
    orientation: str
    p_acc: float
    canonical: bool = True


@dataclass(frozen=True)
class LabelDistribution:
    p_acc: float
    p_minus: float
    p_plus: float

    def __post_init__(self):
        for name in ("p_acc", "p_minus", "p_plus"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"{name}={v!r} is not a probability")
        if abs(self.p_minus + self.p_plus - 1.0) > 1e-12:
            raise ValueError("conditional label probabilities must sum to 1")

    def label(self) -> int:
        """Most likely label; raises TieError when both are equally likely."""
        if abs(self.p_plus - self.p_minus) <= TIE_TOL:
            raise TieError("conditional label probabilities are equal")
        return 1 if self.p_plus > self.p_minus else -1


# -- encoding ---------------------------------------------------------------


def encode_angle(point) -> float:
    """Angle a in (-2pi, 2pi] with (cos(a/2), -sin(a/2)) equal to ``point``."""
    v = _unit(point, "point")
    a = -2.0 * math.atan2(v[1], v[0])
    return 2 * math.pi if a <= -2 * math.pi else a + 0.0


def decode_angle(a: float) -> np.ndarray:
    return np.array([math.cos(a / 2), -math.sin(a / 2)])


def canonical_frame(x0, x1, x_test) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rotate all three points rigidly so that x0 lands on (1, 0)."""
    a, b, c = _unit(x0, "x0"), _unit(x1, "x1"), _unit(x_test, "x_test")
    cs, sn = a[0], -a[1]
    rot = np.array([[cs, -sn], [sn, cs]])
    # x0 maps to (1, 0) exactly by construction; skip rounding noise
    return np.array([1.0, 0.0]), rot @ b, rot @ c


def encode_problem(problem: ClassificationProblem) -> EncodedAngles:
    x0, x1, xt = canonical_frame(problem.x0.features, problem.x1.features, problem.x_test)
    return EncodedAngles(encode_angle(x0), encode_angle(_renorm(x1)), encode_angle(_renorm(xt)))


def _renorm(v: np.ndarray) -> np.ndarray:
    return v / np.hypot(v[0], v[1])


# -- classical oracle --------------------------------------------------------


def kernel(a, b, n_points: int) -> float:
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return 1.0 - float(d @ d) / (4 * n_points)


def decision_sum(points: Sequence[DataPoint], x_test) -> float:
    n = len(points)
    return sum(p.label * kernel(x_test, p.features, n) for p in points)


def classify_classical(problem: ClassificationProblem) -> int:
    s = decision_sum(problem.points, problem.x_test)
    if abs(s) <= TIE_TOL:
        raise TieError(f"decision sum {s!r} is zero")
    return 1 if s > 0 else -1


# -- general multi-register classifier ---------------------------------------


def general_layout(n_points: int) -> tuple[int, int, int, int]:
    """(index qubits, ancilla, data, label) positions/width for ``n_points``."""
    k = max(1, math.ceil(math.log2(n_points)))
    return k, k, k + 1, k + 2


def _check_general(points: Sequence[DataPoint]) -> None:
    n = len(points)
    if not 2 <= n <= MAX_GENERAL_POINTS:
        raise ValueError(f"number of points {n} outside [2, {MAX_GENERAL_POINTS}]")
    n_plus = sum(p.label == 1 for p in points)
    if 2 * n_plus != n:
        raise ValueError("classes must be balanced")


def build_general_state(points: Sequence[DataPoint], x_test) -> sim.StateVector:
    """Index register, ancilla, data qubit, label qubit (amplitude-encoded data)."""
    _check_general(points)
    xt = _unit(x_test, "x_test")
    n = len(points)
    k, _, _, _ = general_layout(n)
    amps = np.zeros((2**k, 2, 2, 2), dtype=complex)
    for i, p in enumerate(points):
        y = (p.label + 1) // 2
        amps[i, 0, :, y] = xt
        amps[i, 1, :, y] = p.features
    return sim.StateVector(amps.reshape(-1) / math.sqrt(2 * n))


def general_classify_exact(points: Sequence[DataPoint], x_test) -> LabelDistribution:
    state = build_general_state(points, x_test)
    k, ancilla, _, label_q = general_layout(len(points))
    state = sim.apply_gate(state, sim.Gate("H", ancilla))
    try:
        accepted, p_acc = sim.postselect(state, ancilla, 0)
    except sim.ZeroProbabilityBranchError as exc:
        raise NoAcceptanceError(str(exc)) from exc
    labels = sim.marginal(sim.exact_distribution(accepted), [label_q])
    p_plus = labels["1"]
    return LabelDistribution(p_acc, 1.0 - p_plus, p_plus)


# -- two-qubit reduction ------------------------------------------------------


def label_ratio(phi: float, omega: float) -> float:
    """P(label -1) / P(label +1) for x0 at angle 0."""
    num = math.cos(omega / 4) ** 2
    den = math.cos((omega - phi) / 4) ** 2
    if den < RATIO_DENOM_TOL:
        raise DegenerateRatioError("test point is antipodal to x1")
    return num / den


def _omega_prime(t: float) -> float:
    if t == 1.0:
        return 0.0
    r = math.sqrt(t)
    return 4.0 * math.atan((1.0 - r) / (1.0 + r))


def reduce(t: float, canonical: bool = True) -> ReductionParams:
    """Map a label ratio onto the single rotation angle of the two-qubit circuit.

    With ``canonical`` the ratio is folded into (0, 1] so the rotation angle is
    non-negative and post-selection succeeds as often as possible; the
    orientation flag records whether the labels swapped. ``canonical=False``
    applies the angle formula to ``t`` as is.
    """
    if not t > 0 or not math.isfinite(t):
        raise ValueError(f"ratio must be positive and finite, got {t!r}")
    t_hat = min(t, 1.0 / t)
    if canonical:
        orientation = NORMAL if t <= 1.0 else SWAPPED
        w = _omega_prime(t_hat)
    else:
        orientation = NORMAL
        w = _omega_prime(t)
    return ReductionParams(
        t=t,
        t_canonical=t_hat,
        omega_prime=w,
        orientation=orientation,
        p_acc=(1.0 + math.sin(w / 2)) / 2,
        canonical=canonical,
    )


def params_for(phi: float, omega: float, canonical: bool = True) -> ReductionParams:
    return reduce(label_ratio(phi, omega), canonical=canonical)


def build_reduced_circuit(params: ReductionParams, measure: bool = True) -> sim.Circuit:
    """H(q0), Ry(w'/2) on q1, CNOT(q0 -> q1), Ry(w'/2) on q1, then H(q0).

    The two half rotations cancel on the q0=1 branch (which the CNOT flips to
    |1>) and add up to Ry(w') on the q0=0 branch.
    """
    half = params.omega_prime / 2
    circ = sim.Circuit(2)
    circ.h(0).ry(1, half).cnot(0, 1).ry(1, half).h(0)
    if measure:
        circ.measure(0).measure(1)
    return circ


def prepared_state(params: ReductionParams) -> sim.StateVector:
    """Circuit state just before the final Hadamard."""
    circ = build_reduced_circuit(params, measure=False)
    return sim.apply_gates(sim.new_state(2), circ.gates[:-1])


def _assign(params: ReductionParams, p_q1_zero: float, p_q1_one: float) -> tuple[float, float]:
    # q1=1 carries the (1 + sin(w'/2)) amplitude; it is label +1 unless swapped
    if params.orientation == NORMAL:
        return p_q1_zero, p_q1_one
    return p_q1_one, p_q1_zero


def reduced_classify_exact(params: ReductionParams) -> LabelDistribution:
    s = math.sin(params.omega_prime / 2)
    p_acc = (1.0 + s) / 2
    if p_acc < sim.ZERO_BRANCH_TOL:
        raise NoAcceptanceError("acceptance probability is zero")
    p_one = (1.0 + s) ** 2 / (4 * p_acc)
    p_zero = math.cos(params.omega_prime / 2) ** 2 / (4 * p_acc)
    # the two closed forms sum to 1 only up to rounding
    total = p_zero + p_one
    p_minus, p_plus = _assign(params, p_zero / total, p_one / total)
    return LabelDistribution(p_acc, p_minus, p_plus)


def reduced_classify_circuit(params: ReductionParams) -> LabelDistribution:
    """Same distribution as ``reduced_classify_exact``, via gate-level simulation."""
    state = sim.final_state(build_reduced_circuit(params))
    try:
        accepted, p_acc = sim.postselect(state, 0, 0)
    except sim.ZeroProbabilityBranchError as exc:
        raise NoAcceptanceError(str(exc)) from exc
    q1 = sim.marginal(sim.exact_distribution(accepted), [1])
    p_minus, p_plus = _assign(params, q1["0"], q1["1"])
    return LabelDistribution(p_acc, p_minus, p_plus)


@dataclass(frozen=True)
class SampledResult:
    distribution: LabelDistribution
    counts: sim.ShotCounts
    accepted: int


def reduced_classify_sampled(params: ReductionParams, shots: int = 2048, seed: int = 0) -> SampledResult:
    if shots < 1:
        raise ValueError("shots must be positive")
    counts = sim.run_circuit(build_reduced_circuit(params), shots=shots, seed=seed)
    n00, n01 = counts["00"], counts["01"]
    accepted = n00 + n01
    if accepted == 0:
        raise NoAcceptanceError(f"no shot out of {shots} passed post-selection")
    p_minus, p_plus = _assign(params, n00 / accepted, n01 / accepted)
    return SampledResult(LabelDistribution(accepted / shots, p_minus, p_plus), counts, accepted)


# -- end-to-end -------------------------------------------------------------


@dataclass
class ClassificationReport:
    mode: str
    label: int | None
    angles: EncodedAngles
    params: ReductionParams | None
    distribution: LabelDistribution | None = None
    counts: sim.ShotCounts | None = None
    decision_sum: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def tie(self) -> bool:
        return self.label is None


def _label_or_tie(dist: LabelDistribution) -> int | None:
    try:
        return dist.label()
    except TieError:
        return None


def classify(
    problem: ClassificationProblem,
    mode: str = "exact",
    shots: int = 2048,
    seed: int = 0,
    canonical: bool = True,
) -> ClassificationReport:
    """Classify ``problem.x_test``; a tie is reported as ``label=None``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    angles = encode_problem(problem)
    if mode == "oracle":
        try:
            label = classify_classical(problem)
        except TieError:
            label = None
        return ClassificationReport(
            mode, label, angles, None, decision_sum=decision_sum(problem.points, problem.x_test)
        )
    params = params_for(angles.phi, angles.omega, canonical=canonical)
    if mode == "exact":
        dist = reduced_classify_exact(params)
        return ClassificationReport(mode, _label_or_tie(dist), angles, params, dist)
    res = reduced_classify_sampled(params, shots, seed)
    return ClassificationReport(
        mode, _label_or_tie(res.distribution), angles, params, res.distribution, res.counts,
        extra={"accepted": res.accepted},
    )
