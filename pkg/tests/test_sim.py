import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import angles, kron_unitary, random_gate, random_state, seeds, widths
from qdbc import sim

S = 1 / math.sqrt(2)


class TestNewState:
    def test_one_qubit(self):
        assert np.array_equal(sim.new_state(1).amplitudes, [1, 0])

    def test_two_qubits(self):
        assert np.array_equal(sim.new_state(2).amplitudes, [1, 0, 0, 0])

    @pytest.mark.parametrize("n", [0, 21])
    def test_width_out_of_range(self, n):
        with pytest.raises(ValueError):
            sim.new_state(n)

    def test_state_must_be_normalized(self):
        with pytest.raises(ValueError):
            sim.StateVector(np.array([1.0, 1.0]))


class TestApplyGate:
    def test_hadamard(self):
        out = sim.apply_gate(sim.new_state(1), sim.Gate("H", 0))
        assert out.allclose([S, S])

    def test_ry_half_turn(self):
        out = sim.apply_gate(sim.new_state(1), sim.Gate("RY", 0, angle=math.pi))
        assert out.allclose([0, 1])

    def test_ry_sign_convention(self):
        a = 0.7
        out = sim.apply_gate(sim.new_state(1), sim.Gate("RY", 0, angle=a))
        assert out.allclose([math.cos(a / 2), math.sin(a / 2)])
        one = sim.StateVector(np.array([0, 1]))
        out = sim.apply_gate(one, sim.Gate("RY", 0, angle=a))
        assert out.allclose([-math.sin(a / 2), math.cos(a / 2)])

    def test_cnot_builds_bell_pair(self, bell):
        start = sim.StateVector(np.array([S, 0, S, 0]))
        out = sim.apply_gate(start, sim.Gate("CNOT", 1, control=0))
        assert out.allclose(bell)

    def test_qubit_zero_is_most_significant(self):
        out = sim.apply_gate(sim.new_state(3), sim.Gate("X", 0))
        assert out.amplitudes[0b100] == 1

    def test_invalid_index(self):
        with pytest.raises(sim.InvalidQubitError):
            sim.apply_gate(sim.new_state(2), sim.Gate("H", 2))
        with pytest.raises(sim.InvalidQubitError):
            sim.apply_gate(sim.new_state(2), sim.Gate("CNOT", 0, control=3))

    def test_gate_validation(self):
        with pytest.raises(sim.InvalidQubitError):
            sim.Gate("CNOT", 1, control=1)
        with pytest.raises(ValueError):
            sim.Gate("RY", 0)
        with pytest.raises(ValueError):
            sim.Gate("RY", 0, angle=float("nan"))
        with pytest.raises(ValueError):
            sim.Gate("CZ", 0)

    @given(widths, seeds, seeds)
    def test_matches_kronecker_oracle(self, n, s1, s2):
        state, gate = random_state(n, s1), random_gate(n, s2)
        expected = kron_unitary(gate, n) @ state.amplitudes
        assert sim.apply_gate(state, gate).allclose(expected)


class TestAlgebra:
    @given(widths, seeds, seeds)
    def test_unitarity(self, n, s1, s2):
        out = sim.apply_gate(random_state(n, s1), random_gate(n, s2))
        assert abs(np.linalg.norm(out.amplitudes) - 1) <= 1e-12

    @given(widths, seeds, st.integers(0, 4), st.sampled_from(["H", "X", "CNOT"]))
    def test_involutions(self, n, seed, q, kind):
        q %= n
        if kind == "CNOT":
            if n < 2:
                return
            gate = sim.Gate("CNOT", q, control=(q + 1) % n)
        else:
            gate = sim.Gate(kind, q)
        state = random_state(n, seed)
        assert sim.apply_gates(state, [gate, gate]).allclose(state)

    @given(widths, seeds, angles)
    def test_ry_inverse(self, n, seed, a):
        state = random_state(n, seed)
        gates = [sim.Gate("RY", n - 1, angle=a), sim.Gate("RY", n - 1, angle=-a)]
        assert sim.apply_gates(state, gates).allclose(state)

    @given(widths, seeds, angles, angles)
    def test_ry_composition(self, n, seed, a, b):
        state = random_state(n, seed)
        two = sim.apply_gates(state, [sim.Gate("RY", 0, angle=a), sim.Gate("RY", 0, angle=b)])
        one = sim.apply_gate(state, sim.Gate("RY", 0, angle=a + b))
        assert two.allclose(one)

    @given(widths, seeds)
    def test_distribution_normalized(self, n, seed):
        dist = sim.exact_distribution(random_state(n, seed))
        assert len(dist) == 2**n
        assert abs(sum(dist.values()) - 1) <= 1e-12

    @given(widths, seeds, st.integers(0, 4), st.integers(0, 1))
    def test_postselect_consistency(self, n, seed, q, v):
        q %= n
        state = random_state(n, seed)
        dist = sim.exact_distribution(state)
        expected = sum(p for k, p in dist.items() if k[q] == str(v))
        post, prob = sim.postselect(state, q, v)
        assert abs(prob - expected) <= 1e-12
        assert abs(np.linalg.norm(post.amplitudes) - 1) <= 1e-12


class TestExactDistribution:
    def test_basis(self):
        assert sim.exact_distribution(sim.new_state(1)) == {"0": 1.0, "1": 0.0}

    def test_bell(self, bell):
        dist = sim.exact_distribution(bell)
        assert dist["00"] == pytest.approx(0.5, abs=1e-12)
        assert dist["11"] == pytest.approx(0.5, abs=1e-12)
        assert dist["01"] == dist["10"] == 0.0

    def test_prepared_reduction_state(self):
        w = 2.6837
        c, s = math.cos(w / 2), math.sin(w / 2)
        state = sim.StateVector(np.array([c, s, 0, 1]) * S)
        dist = sim.exact_distribution(state)
        # mpmath, 40 digits
        assert dist["00"] == pytest.approx(0.02575348509010229885, abs=1e-12)
        assert dist["01"] == pytest.approx(0.47424651490989770115, abs=1e-12)
        assert dist["11"] == pytest.approx(0.5, abs=1e-12)


class TestPostselect:
    def test_bell(self, bell):
        post, p = sim.postselect(bell, 0, 0)
        assert post.allclose([1, 0, 0, 0])
        assert p == pytest.approx(0.5, abs=1e-12)

    def test_zero_branch(self):
        state = sim.StateVector(np.array([0, 0, 0, 1]))
        with pytest.raises(sim.ZeroProbabilityBranchError):
            sim.postselect(state, 0, 0)

    def test_reduction_branch(self):
        w = 0.0929
        c, s = math.cos(w / 2), math.sin(w / 2)
        state = sim.StateVector(np.array([c, s, 0, 1]) * S)
        state = sim.apply_gate(state, sim.Gate("H", 0))
        post, p = sim.postselect(state, 0, 0)
        assert p == pytest.approx(0.5232, abs=5e-4)
        # mpmath, 40 digits
        assert p == pytest.approx(0.52321664918126119586, abs=1e-12)
        assert post.allclose([0.69049500419535173067, 0.72333716148229325980, 0, 0])
        # matrix-product oracle: (H x I) then projector onto q0 = 0
        H = np.array([[1, 1], [1, -1]]) * S
        raw = np.diag([1, 1, 0, 0]) @ np.kron(H, np.eye(2)) @ (np.array([c, s, 0, 1]) * S)
        assert post.allclose(raw / np.linalg.norm(raw))


class TestSampling:
    def test_deterministic_state(self):
        counts = sim.sample_shots(sim.new_state(1), 100, seed=3)
        assert counts.counts == {"0": 100}
        assert counts.total_shots == 100

    def test_bell_within_three_sigma(self, bell):
        counts = sim.sample_shots(bell, 2048, seed=0)
        for key in ("00", "11"):
            assert abs(counts[key] - 1024) <= 3 * math.sqrt(2048 * 0.25)
        assert counts["01"] == counts["10"] == 0

    def test_reproducible(self, bell):
        assert sim.sample_shots(bell, 2048, seed=42) == sim.sample_shots(bell, 2048, seed=42)

    def test_seed_changes_stream(self, bell):
        assert sim.sample_shots(bell, 2048, seed=1) != sim.sample_shots(bell, 2048, seed=2)

    def test_zero_shots(self, bell):
        with pytest.raises(ValueError):
            sim.sample_shots(bell, 0)

    @pytest.mark.parametrize("seed", [0, 1, 7, 2024])
    @pytest.mark.parametrize("shots", [1000, 2048, 10000])
    def test_soundness(self, seed, shots):
        state = random_state(3, 1000 + seed)
        exact = sim.exact_distribution(state)
        counts = sim.sample_shots(state, shots, seed)
        for key, p in exact.items():
            bound = 3 * math.sqrt(p * (1 - p) / shots) + 10 / shots
            assert abs(counts[key] / shots - p) <= bound

    def test_partitioned(self):
        state = random_state(2, 5)
        merged = sim.sample_shots_partitioned(state, 20001, seed=9, streams=4)
        assert merged.total_shots == 20001
        assert merged == sim.sample_shots_partitioned(state, 20001, seed=9, streams=4)
        single = sim.sample_shots(state, 20001, seed=9)
        for key, p in sim.exact_distribution(state).items():
            bound = 3 * math.sqrt(p * (1 - p) / 20001) + 10 / 20001
            assert abs(merged[key] / 20001 - p) <= bound
            assert abs(single[key] / 20001 - p) <= bound

    def test_counts_must_sum(self):
        with pytest.raises(ValueError):
            sim.ShotCounts({"0": 3}, 4)


class TestRunCircuit:
    def test_empty_circuit(self):
        dist = sim.run_circuit(sim.Circuit(1), exact=True)
        assert dist["0"] == 1.0

    def test_hadamard(self):
        dist = sim.run_circuit(sim.Circuit(1).h(0).measure(0), exact=True)
        assert dist == pytest.approx({"0": 0.5, "1": 0.5}, abs=1e-12)

    def test_marginal_over_measured(self):
        circ = sim.Circuit(2).h(0).cnot(0, 1).measure(1)
        assert sim.run_circuit(circ, exact=True) == pytest.approx({"0": 0.5, "1": 0.5}, abs=1e-12)
        counts = sim.run_circuit(circ, shots=500, seed=1)
        assert set(counts.counts) <= {"0", "1"}
        assert counts.total_shots == 500

    def test_measurement_order(self):
        circ = sim.Circuit(2).x(0).measure(1).measure(0)
        assert sim.run_circuit(circ, exact=True)["01"] == 1.0

    def test_circuit_validation(self):
        with pytest.raises(sim.InvalidQubitError):
            sim.Circuit(2).h(2)
        with pytest.raises(ValueError):
            sim.Circuit(2).measure(0).measure(0)
        with pytest.raises(ValueError):
            sim.Circuit(2, measurements=[1, 1])


def test_cqasm_format():
    circ = sim.Circuit(2).h(0).ry(1, 0.0928899).cnot(0, 1).measure(0).measure(1)
    assert sim.to_cqasm(circ).splitlines() == [
        "version 1.0",
        "qubits 2",
        "H q[0]",
        "RY q[1], 0.092890",
        "CNOT q[0], q[1]",
        "measure q[0]",
        "measure q[1]",
    ]
