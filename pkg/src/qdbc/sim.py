"""Dense statevector simulation for few-qubit circuits.

Conventions:
- qubit 0 is the left-most symbol in a ket and the most significant bit of
  the basis index, so bitstring b0 b1 ... b(n-1) sits at sum(b_k * 2**(n-1-k))
- Ry(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>

Shot sampling uses numpy's PCG64 generator (``numpy.random.default_rng(seed)``):
one uniform double per shot, mapped to a basis index by inverse CDF
(``searchsorted`` with ``side="right"`` over the cumulative probabilities).
"""
from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import cos, sin, sqrt

import numpy as np

MAX_QUBITS = 20
NORM_TOL = 1e-12
ZERO_BRANCH_TOL = 1e-12

GATE_KINDS = ("H", "X", "RY", "CNOT")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


class SimulationError(Exception):
    pass


class InvalidQubitError(SimulationError, ValueError):
    pass


class ZeroProbabilityBranchError(SimulationError):
    """The requested measurement outcome has (numerically) zero probability."""


def ry_matrix(theta: float) -> np.ndarray:
    c, s = cos(theta / 2), sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if amps.size == 0 or 2**n != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of two")
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"width {n} outside [1, {MAX_QUBITS}]")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def __len__(self) -> int:
        return self.amplitudes.size

    def allclose(self, other: "StateVector | np.ndarray", atol: float = NORM_TOL) -> bool:
        other_amps = other.amplitudes if isinstance(other, StateVector) else np.asarray(other)
        return bool(np.allclose(self.amplitudes, other_amps, rtol=0.0, atol=atol))


@dataclass(frozen=True)
class Gate:
    kind: str
    target: int
    control: int | None = None
    angle: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.target < 0:
            raise InvalidQubitError(f"negative target {self.target}")
        if kind == "CNOT":
            if self.control is None:
                raise ValueError("CNOT needs a control qubit")
            if self.control < 0:
                raise InvalidQubitError(f"negative control {self.control}")
            if self.control == self.target:
                raise InvalidQubitError("control and target must differ")
        elif self.control is not None:
            raise ValueError(f"{kind} takes no control qubit")
        if kind == "RY":
            if self.angle is None or not np.isfinite(self.angle):
                raise ValueError("RY needs a finite angle")
        elif self.angle is not None:
            raise ValueError(f"{kind} takes no angle")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,) if self.control is None else (self.control, self.target)

    def matrix(self) -> np.ndarray:
        """Single-qubit matrix acting on the target (the X block for CNOT)."""
        if self.kind == "H":
            return _H
        if self.kind == "RY":
            return ry_matrix(self.angle)
        return _X


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)
    measurements: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"width {self.num_qubits} outside [1, {MAX_QUBITS}]")
        for g in self.gates:
            self._check_gate(g)
        for q in self.measurements:
            self._check_qubit(q)
        if len(set(self.measurements)) != len(self.measurements):
            raise ValueError("duplicate measurement")

    def _check_qubit(self, q: int) -> None:
        if not 0 <= q < self.num_qubits:
            raise InvalidQubitError(f"qubit {q} out of range for width {self.num_qubits}")

    def _check_gate(self, gate: Gate) -> None:
        for q in gate.qubits:
            self._check_qubit(q)

    def append(self, gate: Gate) -> "Circuit":
        self._check_gate(gate)
        self.gates.append(gate)
        return self

    def h(self, q: int) -> "Circuit":
        return self.append(Gate("H", q))

    def x(self, q: int) -> "Circuit":
        return self.append(Gate("X", q))

    def ry(self, q: int, angle: float) -> "Circuit":
        return self.append(Gate("RY", q, angle=float(angle)))

    def cnot(self, control: int, target: int) -> "Circuit":
        return self.append(Gate("CNOT", target, control=control))

    def measure(self, q: int) -> "Circuit":
        self._check_qubit(q)
        if q in self.measurements:
            raise ValueError(f"qubit {q} already measured")
        self.measurements.append(q)
        return self

    @property
    def measured_qubits(self) -> list[int]:
        """Measured qubits in order; all qubits when none were declared."""
        return list(self.measurements) or list(range(self.num_qubits))


@dataclass(frozen=True)
class ShotCounts:
    counts: dict[str, int]
    total_shots: int

    def __post_init__(self):
        if self.total_shots < 1:
            raise ValueError("total_shots must be positive")
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("negative count")
        if sum(self.counts.values()) != self.total_shots:
            raise ValueError("counts do not sum to total_shots")

    def __getitem__(self, key: str) -> int:
        return self.counts.get(key, 0)

    def frequencies(self) -> dict[str, float]:
        return {k: v / self.total_shots for k, v in self.counts.items()}


def bitstring(index: int, num_qubits: int) -> str:
    return format(index, f"0{num_qubits}b")


def new_state(num_qubits: int) -> StateVector:
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"width {num_qubits} outside [1, {MAX_QUBITS}]")
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(amps)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    n = state.num_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise InvalidQubitError(f"qubit {q} out of range for width {n}")
    psi = state.amplitudes.reshape([2] * n)
    if gate.kind == "CNOT":
        out = psi.copy()
        idx1 = [slice(None)] * n
        idx1[gate.control] = 1
        idx1 = tuple(idx1)
        # target axis shifts left by one once the control axis is indexed away
        t_axis = gate.target - (gate.target > gate.control)
        out[idx1] = np.flip(psi[idx1], axis=t_axis)
    else:
        out = np.tensordot(gate.matrix(), psi, axes=([1], [gate.target]))
        out = np.moveaxis(out, 0, gate.target)
    return StateVector(out.reshape(-1))


def apply_gates(state: StateVector, gates) -> StateVector:
    for g in gates:
        state = apply_gate(state, g)
    return state


def _probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def exact_distribution(state: StateVector) -> dict[str, float]:
    n = state.num_qubits
    return {bitstring(i, n): float(p) for i, p in enumerate(_probabilities(state))}


def marginal(distribution: dict[str, float], qubits: list[int]) -> dict[str, float]:
    """Marginalize a bitstring distribution onto ``qubits`` (in the given order)."""
    out: dict[str, float] = {}
    for key, p in distribution.items():
        sub = "".join(key[q] for q in qubits)
        out[sub] = out.get(sub, 0.0) + p
    return out


def postselect(state: StateVector, qubit: int, value: int) -> tuple[StateVector, float]:
    n = state.num_qubits
    if not 0 <= qubit < n:
        raise InvalidQubitError(f"qubit {qubit} out of range for width {n}")
    if value not in (0, 1):
        raise ValueError("value must be 0 or 1")
    psi = state.amplitudes.reshape([2] * n).copy()
    idx = [slice(None)] * n
    idx[qubit] = 1 - value
    psi[tuple(idx)] = 0.0
    projected = psi.reshape(-1)
    prob = float(np.vdot(projected, projected).real)
    if prob < ZERO_BRANCH_TOL:
        raise ZeroProbabilityBranchError(
            f"outcome {value} on qubit {qubit} has probability {prob:.3e}"
        )
    return StateVector(projected / sqrt(prob)), min(prob, 1.0)


def _sample_indices(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.minimum(idx, probs.size - 1)


def _counts_from_indices(idx: np.ndarray, num_qubits: int, shots: int) -> ShotCounts:
    hist = np.bincount(idx, minlength=2**num_qubits)
    counts = {bitstring(i, num_qubits): int(c) for i, c in enumerate(hist) if c}
    return ShotCounts(counts, shots)


def sample_shots(state: StateVector, shots: int, seed: int = 0) -> ShotCounts:
    if shots < 1:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    idx = _sample_indices(_probabilities(state), shots, rng)
    return _counts_from_indices(idx, state.num_qubits, shots)


def sample_shots_partitioned(
    state: StateVector, shots: int, seed: int = 0, streams: int = 4, max_workers: int | None = None
) -> ShotCounts:
    """Split ``shots`` across independent substreams and merge the counts.

    Substream k is seeded with ``SeedSequence(seed).spawn(streams)[k]``. The
    merged counts agree with ``sample_shots`` in distribution only; the
    single-stream path stays the reproducibility reference.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    if streams < 1:
        raise ValueError("streams must be positive")
    probs = _probabilities(state)
    sizes = [shots // streams + (k < shots % streams) for k in range(streams)]
    children = np.random.SeedSequence(seed).spawn(streams)

    def work(k: int) -> np.ndarray:
        return _sample_indices(probs, sizes[k], np.random.default_rng(children[k]))

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        parts = list(pool.map(work, range(streams)))
    return _counts_from_indices(np.concatenate(parts), state.num_qubits, shots)


def marginal_counts(counts: ShotCounts, qubits: list[int]) -> ShotCounts:
    merged: Counter[str] = Counter()
    for key, c in counts.counts.items():
        merged["".join(key[q] for q in qubits)] += c
    return ShotCounts(dict(sorted(merged.items())), counts.total_shots)


def final_state(circuit: Circuit) -> StateVector:
    return apply_gates(new_state(circuit.num_qubits), circuit.gates)


def run_circuit(
    circuit: Circuit, shots: int | None = None, seed: int = 0, exact: bool = False
) -> ShotCounts | dict[str, float]:
    """Run ``circuit`` from |0...0> and report the measured-qubit marginal.

    Exact mode (``exact=True`` or no ``shots``) returns probabilities;
    otherwise sampled counts.
    """
    state = final_state(circuit)
    qubits = circuit.measured_qubits
    if exact or shots is None:
        return marginal(exact_distribution(state), qubits)
    return marginal_counts(sample_shots(state, shots, seed), qubits)


def to_cqasm(circuit: Circuit) -> str:
    """Render ``circuit`` as cQASM 1.0 text, one statement per line."""
    lines = ["version 1.0", f"qubits {circuit.num_qubits}"]
    for g in circuit.gates:
        if g.kind == "CNOT":
            lines.append(f"CNOT q[{g.control}], q[{g.target}]")
        elif g.kind == "RY":
            lines.append(f"RY q[{g.target}], {g.angle:.6f}")
        else:
            lines.append(f"{g.kind} q[{g.target}]")
    lines.extend(f"measure q[{q}]" for q in circuit.measurements)
    return "\n".join(lines) + "\n"
