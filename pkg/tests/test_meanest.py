import math

import numpy as np
import pytest

from qmean import VectorSet
from qmean.meanest import (
    build_circuit,
    estimate_from_distribution,
    estimate_mean,
    exact_distribution,
    gate_counts,
    lower_multicontrolled,
    lower_op,
    recover_signs,
)
from qmean.oracle import classical_mean, expected_distribution
from qmean.statevec import RY, Circuit, GateOp, H, X, basis_state, run, unitary_gate

from helpers import dense_circuit_matrix, dense_matrix, random_set
from reference_data import (
    SAMPLED_2D,
    SAMPLED_4D,
    ROUNDED_SQRT,
    SHOTS,
    SET1_MEAN,
    SET2_MEAN,
    expected_from_mean,
    four_sigma,
)


def lowered_size(arity, n_open):
    """Gate count of the square-root recursion: T(1) = 1, T(c) = 3 T(c-1) + 2."""
    if arity <= 1:
        return 1
    return 2 * 3 ** (arity - 1) - 1 + 2 * n_open


class TestBuildCircuit:
    def test_table1_shape(self, table1_set):
        circuit, layout = build_circuit(table1_set)
        assert circuit.num_qubits == 7
        copy = [op for op in circuit.ops if op.kind == "X" and op.controls]
        assert len(copy) == layout.m
        for op in copy:
            index_ctrls = [c for c in op.controls if c[0] in layout.index]
            assert index_ctrls == [(q, 0) for q in layout.index]

    def test_table2_has_ten_qubits(self, table2_set):
        circuit, layout = build_circuit(table2_set)
        assert circuit.num_qubits == 10
        assert (layout.n, layout.m) == (4, 3)

    def test_smallest_instance(self):
        circuit, _ = build_circuit(VectorSet([[1, 0], [1, 0]]))
        assert circuit.num_qubits == 5

    def test_stage_order(self, table1_set):
        circuit, layout = build_circuit(table1_set)
        kinds = [op.kind for op in circuit.ops]
        n = layout.n
        assert kinds[:n] == ["H"] * n
        assert kinds[-n:] == ["H"] * n
        assert kinds[n] == "X"


class TestExactDistribution:
    def test_table1(self, table1_set):
        dist = exact_distribution(table1_set)
        np.testing.assert_allclose(dist, [0.36636, 0, 0.33869, 0.29495], atol=1e-5)
        np.testing.assert_allclose(dist, expected_distribution(table1_set), atol=1e-9)

    def test_table2(self, table2_set):
        dist = exact_distribution(table2_set)
        np.testing.assert_allclose(dist[4:], [0.28350, 0.15312, 0.08472, 0.06166], atol=5e-4)
        assert abs(dist[0] - 0.41700) < 5e-4

    def test_zero_mean(self):
        dist = exact_distribution(VectorSet([[1, 0], [-1, 0]]))
        np.testing.assert_allclose(dist, [1, 0, 0, 0], atol=1e-15)

    def test_component_permutation_covariance(self, rng):
        for _ in range(10):
            vs = random_set(rng, 4, 4)
            perm = rng.permutation(4)
            dist = exact_distribution(vs)
            permuted = exact_distribution(VectorSet(vs.rows[:, perm]))
            np.testing.assert_allclose(permuted[4:], dist[4:][perm], atol=1e-12)


@pytest.mark.parametrize("seed", range(200))
def test_closed_form(seed):
    rng = np.random.default_rng(10_000 + seed)
    N = int(rng.choice([2, 4, 8, 16]))
    d = int(rng.choice([2, 4]))
    vs = random_set(rng, N, d)
    dist = exact_distribution(vs)
    alpha = vs.rows.sum(axis=0) / N
    assert np.max(np.abs(dist[d:] - alpha ** 2)) < 1e-9
    assert np.max(dist[1:d]) < 1e-12
    assert abs(dist.sum() - 1.0) < 1e-9


class TestEstimateMean:
    def test_table1_exact(self, table1_set):
        est = estimate_mean(table1_set)
        np.testing.assert_allclose(est.magnitudes, SET1_MEAN, atol=1e-4)
        assert est.mode == "exact" and est.signs is None
        np.testing.assert_array_equal(est.estimated_mean, est.magnitudes)
        total = np.sum(est.magnitudes ** 2) + est.zero_outcome_probability + est.residual_probability
        assert abs(total - 1.0) < 1e-9
        assert est.residual_probability < 1e-12

    def test_reference_frequencies(self):
        est = estimate_from_distribution(SAMPLED_2D, 2, mode="sampled")
        assert round(est.magnitudes[0], 4) == ROUNDED_SQRT[2]
        assert round(est.magnitudes[1], 4) == ROUNDED_SQRT[3]

    def test_basis_rows(self):
        est = estimate_mean(VectorSet([[1, 0], [0, 1]]))
        np.testing.assert_allclose(est.magnitudes, [0.5, 0.5], atol=1e-15)

    def test_sampled(self, table1_set):
        est = estimate_mean(table1_set, mode="sampled", shots=SHOTS, seed=4)
        assert est.counts.sum() == SHOTS and (est.shots, est.seed) == (SHOTS, 4)
        for k, a in enumerate(SET1_MEAN):
            assert abs(est.magnitudes[k] ** 2 - a * a) <= four_sigma(a * a)

    def test_with_signs(self, table1_set):
        rows = np.array(table1_set.rows)
        rows[:, 1] *= -1
        est = estimate_mean(VectorSet(rows), with_signs=True)
        np.testing.assert_array_equal(est.signs, [1, -1])
        np.testing.assert_allclose(est.estimated_mean, [SET1_MEAN[0], -SET1_MEAN[1]], atol=1e-4)

    def test_bad_mode(self, table1_set):
        with pytest.raises(ValueError):
            estimate_mean(table1_set, mode="noisy")

    def test_lowered_matches(self, table1_set):
        a = estimate_mean(table1_set)
        b = estimate_mean(table1_set, lowered=True)
        np.testing.assert_allclose(a.distribution, b.distribution, atol=1e-9)


def test_table2_sampled_band(table2_set):
    exact = exact_distribution(table2_set)
    est = estimate_mean(table2_set, mode="sampled", shots=SHOTS, seed=11)
    freqs = est.counts / SHOTS
    for r in range(8):
        assert abs(freqs[r] - exact[r]) <= four_sigma(exact[r]) + 1e-15
    for r, f in SAMPLED_4D.items():
        assert abs(f - exact[r]) <= four_sigma(exact[r])


def test_sampling_consistency_over_seeds(table1_set):
    exact = exact_distribution(table1_set)
    inside = total = 0
    for seed in range(100):
        est = estimate_mean(table1_set, mode="sampled", shots=SHOTS, seed=seed)
        freqs = est.counts / SHOTS
        for r in range(4):
            total += 1
            inside += abs(freqs[r] - exact[r]) <= four_sigma(exact[r]) + 1e-15
    assert inside / total >= 0.99


class TestRecoverSigns:
    def test_table1(self, table1_set):
        np.testing.assert_array_equal(recover_signs(table1_set), [1, 1])

    def test_table1_second_negated(self, table1_set):
        rows = np.array(table1_set.rows)
        rows[:, 1] *= -1
        np.testing.assert_array_equal(recover_signs(VectorSet(rows)), [1, -1])

    def test_zero_mean(self):
        np.testing.assert_array_equal(recover_signs(VectorSet([[1, 0], [-1, 0]])), [0, 0])

    @pytest.mark.parametrize("eps", [0.0, -0.1, 0.3])
    def test_epsilon_range(self, table1_set, eps):
        with pytest.raises(ValueError):
            recover_signs(table1_set, eps)

    def test_random_sets(self):
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 100:
            N = int(rng.choice([2, 4, 8, 16]))
            d = int(rng.choice([2, 4]))
            vs = random_set(rng, N, d)
            alpha = classical_mean(vs)
            if np.min(np.abs(alpha)) < 0.05:
                continue
            checked += 1
            np.testing.assert_array_equal(recover_signs(vs, 0.02), np.sign(alpha))


class TestLowering:
    def test_cnot_fixed_point(self):
        c = Circuit(2, [X(1, [(0, 1)])])
        assert lower_multicontrolled(c).ops == c.ops

    def test_open_single_control_kept(self):
        op = RY(0.3, 0, [(1, 0)])
        assert lower_op(op) == [op]

    def test_toffoli_exhaustive(self):
        toffoli = Circuit(3, [X(2, [(0, 1), (1, 1)])])
        lowered = lower_multicontrolled(toffoli)
        assert max(op.arity for op in lowered.ops) <= 1
        for b in range(8):
            want = run(toffoli, basis_state(3, b)).amps
            got = run(lowered, basis_state(3, b)).amps
            np.testing.assert_allclose(got, want, atol=1e-9, rtol=0)
        assert len(lowered) == lowered_size(2, 0) == 5

    @pytest.mark.parametrize("arity", [2, 3, 4, 5])
    @pytest.mark.parametrize("kind", ["X", "RY", "H"])
    def test_unitary_equivalence(self, arity, kind):
        rng = np.random.default_rng(arity * 7 + len(kind))
        q = arity + 1
        controls = [(p, int(rng.integers(2))) for p in range(1, q)]
        op = RY(1.234, 0, controls) if kind == "RY" else GateOp(kind, 0, tuple(controls))
        lowered = Circuit(q, lower_op(op))
        assert max(o.arity for o in lowered.ops) <= 1
        np.testing.assert_allclose(dense_circuit_matrix(lowered), dense_matrix(op, q), atol=1e-9)
        n_open = sum(1 for _, v in controls if v == 0)
        assert len(lowered) == lowered_size(arity, n_open)

    def test_general_unitary(self):
        z = np.array([[1 + 2j, 0.5], [-0.3j, 2]])
        u, _ = np.linalg.qr(z)
        op = unitary_gate(u, 2, [(0, 1), (1, 0), (3, 1)])
        lowered = Circuit(4, lower_op(op))
        np.testing.assert_allclose(dense_circuit_matrix(lowered), dense_matrix(op, 4), atol=1e-9)

    def test_ry_roots_stay_real(self):
        op = RY(0.8, 0, [(1, 1), (2, 1)])
        assert all(o.kind in ("RY", "X", "U") for o in lower_op(op))
        assert [o.angle for o in lower_op(op) if o.kind == "RY"] == [0.4, -0.4, 0.4]

    def test_table1_end_to_end(self, table1_set):
        circuit, layout = build_circuit(table1_set)
        lowered = lower_multicontrolled(circuit)
        assert max(op.arity for op in lowered.ops) <= 1
        np.testing.assert_allclose(run(lowered).amps, run(circuit).amps, atol=1e-9, rtol=0)
        np.testing.assert_allclose(
            exact_distribution(table1_set, lowered=True), exact_distribution(table1_set), atol=1e-9
        )

    def test_table2_end_to_end(self, table2_set):
        circuit, _ = build_circuit(table2_set)
        np.testing.assert_allclose(run(lower_multicontrolled(circuit)).amps, run(circuit).amps, atol=1e-9, rtol=0)


class TestGateCounts:
    def test_empty(self):
        report = gate_counts(Circuit(3))
        assert report.total == 0 and report.lowered_total == 0
        assert not report.by_kind and not report.by_arity

    def test_table1(self, table1_set):
        circuit, _ = build_circuit(table1_set)
        report = gate_counts(circuit)
        assert report.by_kind_arity["RY", 3] == 8
        assert report.by_kind["H"] == 9
        assert report.total == len(circuit.ops) == sum(report.by_kind.values())
        # 10 bare gates, 8 loads over 3 index qubits (12 open controls in total), 2 copies with 3 open
        expected = 10 + 8 * lowered_size(3, 0) + 2 * 12 + 2 * lowered_size(4, 3)
        assert report.lowered_total == expected == len(lower_multicontrolled(circuit))

    def test_toffoli_lowered(self):
        lowered = lower_multicontrolled(Circuit(3, [X(2, [(0, 1), (1, 1)])]))
        report = gate_counts(lowered)
        assert report.total == report.lowered_total == 5
        assert set(report.by_arity) == {1}

    def test_as_dict(self):
        report = gate_counts(Circuit(2, [H(0), X(1, [(0, 1)])]))
        assert report.as_dict()["by_kind_arity"] == {"H/0": 1, "X/1": 1}


def test_estimate_norm_identity_sampled(table1_set):
    est = estimate_mean(table1_set, mode="sampled", shots=1000, seed=2)
    total = np.sum(est.magnitudes ** 2) + est.zero_outcome_probability + est.residual_probability
    assert math.isclose(total, 1.0, abs_tol=1e-12)


def test_table2_mean_magnitudes(table2_set):
    est = estimate_mean(table2_set)
    np.testing.assert_allclose(est.magnitudes, SET2_MEAN, atol=5e-4)
    np.testing.assert_allclose(est.distribution, expected_from_mean(classical_mean(table2_set)), atol=1e-9)
