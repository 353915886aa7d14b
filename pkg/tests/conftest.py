import math

import numpy as np
import pytest
from hypothesis import strategies as st

from qdbc import sim

# random states are drawn from a seeded generator keyed by hypothesis integers
seeds = st.integers(min_value=0, max_value=2**32 - 1)
widths = st.integers(min_value=1, max_value=5)
angles = st.floats(min_value=-4 * math.pi, max_value=4 * math.pi, allow_nan=False)


def random_state(n: int, seed: int) -> sim.StateVector:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return sim.StateVector(v / np.linalg.norm(v))


def random_gate(n: int, seed: int) -> sim.Gate:
    rng = np.random.default_rng(seed)
    kind = rng.choice(["H", "X", "RY", "CNOT"] if n > 1 else ["H", "X", "RY"])
    target = int(rng.integers(n))
    if kind == "CNOT":
        control = int(rng.choice([q for q in range(n) if q != target]))
        return sim.Gate("CNOT", target, control=control)
    if kind == "RY":
        return sim.Gate("RY", target, angle=float(rng.uniform(-2 * np.pi, 2 * np.pi)))
    return sim.Gate(str(kind), target)


@pytest.fixture
def bell():
    return sim.StateVector(np.array([1, 0, 0, 1]) / math.sqrt(2))


def kron_unitary(gate: sim.Gate, n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix built independently by Kronecker products."""
    I = np.eye(2)
    if gate.kind != "CNOT":
        ops = [I] * n
        ops[gate.target] = gate.matrix()
        U = ops[0]
        for op in ops[1:]:
            U = np.kron(U, op)
        return U
    P0, P1 = np.diag([1, 0]), np.diag([0, 1])
    a, b = [I] * n, [I] * n
    a[gate.control] = P0
    b[gate.control] = P1
    b[gate.target] = np.array([[0, 1], [1, 0]])

    def chain(ops):
        U = ops[0]
        for op in ops[1:]:
            U = np.kron(U, op)
        return U

    return chain(a) + chain(b)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
