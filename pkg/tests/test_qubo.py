"""QUBO builders, offset and classifier, with hand-derived expected values."""

import json

import numpy as np
import pytest

from triqsvm.kernels import LinearKernel, RbfKernel
from triqsvm.qkernel import FeatureMapSpec, gram
from triqsvm.qubo import (
    QuboMatrix,
    TrainedModel,
    accuracy,
    build_qubo_dual,
    build_qubo_paper,
    classify,
    compute_beta,
    decision_value,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from triqsvm.datagen import Dataset

from oracles import oracle_kernel


def enumerate_energies(q: np.ndarray):
    n = q.shape[0]
    for code in range(2**n):
        bits = np.array([(code >> (n - 1 - i)) & 1 for i in range(n)], dtype=float)
        yield bits, float(bits @ q @ bits)


class TestBuildQuboPaper:
    def test_hand_traced_opposite_labels(self):
        # kernel_tot = y1*y0 + K = -1 + 0.5 = -0.5; entry = -1/2 * -0.5 * -1.
        k = np.array([[1.0, 0.5], [0.5, 1.0]])
        q = build_qubo_paper(k, np.array([1, -1])).q
        assert q[0, 1] == -0.25
        assert q[1, 0] == -0.25
        assert q[0, 0] == 0.0 and q[1, 1] == 0.0

    def test_hand_traced_same_labels(self):
        k = np.array([[1.0, 0.0], [0.0, 1.0]])
        q = build_qubo_paper(k, np.array([1, 1])).q
        assert q[0, 1] == -0.5
        assert q[1, 0] == -0.5

    def test_single_point_is_zero_matrix(self):
        q = build_qubo_paper(np.array([[1.0]]), np.array([1])).q
        assert np.array_equal(q, np.zeros((1, 1)))

    def test_symmetric_zero_diagonal_bounded(self):
        rng = np.random.default_rng(0)
        points = rng.uniform(0, 2 * np.pi, (8, 2))
        labels = np.where(rng.random(8) < 0.5, 1, -1)
        k = gram(points, FeatureMapSpec(n=2, theta=np.array([0.7, -0.2]))).entries
        q = build_qubo_paper(k, labels).q
        assert np.array_equal(q, q.T)
        assert np.all(np.diag(q) == 0.0)
        assert np.all(np.abs(q) <= 1.0 + 1e-12)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            build_qubo_paper(np.eye(3), np.array([1, -1]))


class TestBuildQuboDual:
    def test_single_point_prefers_selection(self):
        q = build_qubo_dual(np.array([[1.0]]), np.array([1])).q
        assert q[0, 0] == -0.5
        best = min(enumerate_energies(q), key=lambda be: be[1])
        assert best[0].tolist() == [1.0]

    def test_two_point_identity_kernel(self):
        q = build_qubo_dual(np.eye(2), np.array([1, -1])).q
        energies = {tuple(int(b) for b in bits): e for bits, e in enumerate_energies(q)}
        assert energies[(1, 1)] == -1.0
        assert min(energies.values()) == -1.0

    def test_empty_selection_has_zero_energy(self):
        rng = np.random.default_rng(1)
        k = rng.uniform(0, 1, (5, 5))
        q = build_qubo_dual((k + k.T) / 2, np.ones(5, dtype=int)).q
        assert next(e for bits, e in enumerate_energies(q) if not bits.any()) == 0.0

    def test_matches_algebraic_dual_for_all_assignments(self):
        rng = np.random.default_rng(2)
        for n in (3, 6, 10):
            points = rng.uniform(0, 2 * np.pi, (n, 2))
            labels = np.where(rng.random(n) < 0.5, 1, -1)
            k = gram(points, FeatureMapSpec(n=2, theta=np.array([1.1, 0.4]))).entries
            q = build_qubo_dual(k, labels).q
            for bits, energy in enumerate_energies(q):
                ay = bits * labels
                dual = bits.sum() - 0.5 * ay @ k @ ay
                assert energy == pytest.approx(-dual, abs=1e-9)

    def test_slack_penalty_lands_on_diagonal(self):
        q0 = build_qubo_dual(np.eye(2), np.array([1, 1]), slack_c=0.0).q
        q1 = build_qubo_dual(np.eye(2), np.array([1, 1]), slack_c=0.25).q
        np.testing.assert_allclose(q1 - q0, 0.25 * np.eye(2))


class TestComputeBeta:
    def test_empty_alpha_gives_label_mean(self):
        k = np.array([[1.0, 0.3], [0.3, 1.0]])
        labels = np.array([1, -1])
        assert compute_beta(np.zeros(2), labels, k) == pytest.approx(np.mean(labels))

    def test_single_point_cancels(self):
        assert compute_beta(np.array([1]), np.array([1]), np.array([[1.0]])) == 0.0

    def test_hand_substituted_value(self):
        # n=0 term: 1 - (1*1*1 + 0) = 0; n=1 term: -1 - (1*1*0.5 + 0) = -1.5.
        k = np.array([[1.0, 0.5], [0.5, 1.0]])
        beta = compute_beta(np.array([1, 0]), np.array([1, -1]), k)
        assert beta == -0.75

    def test_linear_in_labels_for_fixed_alpha(self):
        rng = np.random.default_rng(3)
        k = gram(rng.uniform(0, 2 * np.pi, (6, 2)),
                 FeatureMapSpec(n=2, theta=np.array([1.0, 1.0]))).entries
        alpha = rng.integers(0, 2, 6)
        labels = np.where(rng.random(6) < 0.5, 1, -1)
        direct = compute_beta(alpha, labels, k)
        flipped = compute_beta(alpha, -labels, k)
        assert flipped == pytest.approx(-direct, abs=1e-12)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            compute_beta(np.array([1, 0]), np.array([1, -1, 1]), np.eye(3))


def quantum_model(points, labels, theta=(1.0, 1.0), alpha=None, beta=0.0):
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if alpha is None:
        alpha = np.ones(len(labels), dtype=int)
    return TrainedModel(
        alpha=alpha,
        beta=beta,
        train_points=points,
        train_labels=labels,
        kernel=FeatureMapSpec(n=2, theta=np.asarray(theta, dtype=float)),
    )


class TestDecisionAndClassify:
    def test_zero_alpha_leaves_only_offset(self):
        model = quantum_model([[1.0, 2.0]], [1], alpha=np.array([0]), beta=0.3)
        assert decision_value([0.5, 0.5], model) == pytest.approx(0.3, abs=1e-12)

    def test_self_kernel_single_support(self):
        model = quantum_model([[1.0, 2.0]], [1], alpha=np.array([1]), beta=0.0)
        assert decision_value([1.0, 2.0], model) == pytest.approx(1.0, abs=1e-12)

    def test_matches_oracle_recompute(self):
        rng = np.random.default_rng(4)
        points = rng.uniform(0, 2 * np.pi, (5, 2))
        labels = np.where(rng.random(5) < 0.5, 1, -1)
        alpha = rng.integers(0, 2, 5)
        theta = (0.8, -1.4)
        model = quantum_model(points, labels, theta=theta, alpha=alpha, beta=0.17)
        x = rng.uniform(0, 2 * np.pi, 2)
        expected = sum(
            a * y * oracle_kernel(p, x, theta) for a, y, p in zip(alpha, labels, points)
        ) + 0.17
        assert decision_value(x, model) == pytest.approx(expected, abs=1e-10)

    def test_classify_signs_and_tie(self):
        for beta, expected in [(0.3, 1), (-0.01, -1), (0.0, 1)]:
            model = quantum_model([[1.0, 2.0]], [1], alpha=np.array([0]), beta=beta)
            assert classify([0.1, 0.1], model) == expected

    def test_dimension_mismatch(self):
        model = quantum_model([[1.0, 2.0]], [1])
        with pytest.raises(ValueError, match="dimension"):
            decision_value([1.0, 2.0, 3.0], model)


class TestAccuracy:
    def _constant_positive_model(self):
        return quantum_model([[1.0, 1.0]], [1], alpha=np.array([0]), beta=1.0)

    def test_all_correct(self):
        ds = Dataset(np.random.default_rng(5).uniform(0, 1, (10, 2)), np.ones(10, dtype=int))
        assert accuracy(self._constant_positive_model(), ds) == 1.0

    def test_all_wrong(self):
        ds = Dataset(np.random.default_rng(6).uniform(0, 1, (10, 2)), -np.ones(10, dtype=int))
        assert accuracy(self._constant_positive_model(), ds) == 0.0

    def test_counting(self):
        labels = np.array([1] * 9 + [-1])
        ds = Dataset(np.random.default_rng(7).uniform(0, 1, (10, 2)), labels)
        assert accuracy(self._constant_positive_model(), ds) == 0.9

    def test_empty_dataset_rejected(self):
        ds = Dataset(np.empty((0, 2)), np.empty(0, dtype=int))
        with pytest.raises(ValueError, match="empty"):
            accuracy(self._constant_positive_model(), ds)


class TestQuboMatrixType:
    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            QuboMatrix(np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            QuboMatrix(np.array([[np.inf]]))


class TestModelSerialization:
    def _model(self):
        rng = np.random.default_rng(8)
        return quantum_model(
            rng.uniform(0, 2 * np.pi, (4, 2)),
            np.array([1, -1, 1, -1]),
            theta=(0.25, -0.75),
            alpha=np.array([1, 0, 1, 1]),
            beta=-0.125,
        )

    def test_round_trip(self, tmp_path):
        model = self._model()
        path = tmp_path / "model.json"
        save_model(model, path)
        back = load_model(path)
        assert np.array_equal(back.alpha, model.alpha)
        assert back.beta == model.beta
        assert np.array_equal(back.train_points, model.train_points)
        assert np.array_equal(back.train_labels, model.train_labels)
        assert isinstance(back.kernel, FeatureMapSpec)
        assert np.array_equal(back.kernel.theta, model.kernel.theta)

    def test_schema_version_present(self, tmp_path):
        path = tmp_path / "model.json"
        save_model(self._model(), path)
        assert json.loads(path.read_text())["schema_version"] == "1"

    def test_classical_kernel_round_trip(self):
        for kernel in (RbfKernel(gamma=0.5), LinearKernel()):
            model = TrainedModel(
                alpha=np.array([1]),
                beta=0.0,
                train_points=np.array([[1.0, 2.0]]),
                train_labels=np.array([1]),
                kernel=kernel,
            )
            back = model_from_dict(model_to_dict(model))
            assert type(back.kernel) is type(kernel)

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ValueError, match="JSON"):
            load_model(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"alpha": [1]}), encoding="utf-8")
        with pytest.raises(ValueError, match="invalid model"):
            load_model(path)
