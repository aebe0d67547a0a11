import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from legalir.features import FeatureVector, LtrDataset, LtrRow
from legalir.ltr import (
    GbdtModel,
    RegressionTree,
    TrainParams,
    compute_lambdas,
    fit,
    load_model,
    ndcg_at_k,
    predict,
    save_model,
)

from oracles import lambdarank_surrogate


def _vector(values) -> FeatureVector:
    return FeatureVector(*values)


def _dataset(rows) -> LtrDataset:
    """rows: iterable of (query_id, case_id, feature_list, label)."""
    return LtrDataset(rows=[LtrRow(q, c, _vector(f), y) for q, c, f, y in rows])


def _synthetic_groups(rng, n_queries, rows_per_query, threshold=4.0):
    """Separable harness: label = 1 iff f5 (bm25) > threshold."""
    rows = []
    for q in range(n_queries):
        qid = f"q{q:03d}"
        labels = []
        for r in range(rows_per_query):
            f5 = rng.uniform(0.0, 5.0)
            if r == 0:
                f5 = rng.uniform(4.2, 5.0)  # guarantee one positive per group
            label = 1 if f5 > threshold else 0
            labels.append(label)
            noise = [rng.uniform(0, 100), rng.uniform(0, 100), rng.randint(0, 9),
                     rng.randint(0, 9), f5, rng.uniform(-5, 0), rng.uniform(0, 1),
                     rng.uniform(-1, 1)]
            rows.append((qid, f"c{q:03d}_{r:03d}", noise, label))
    return _dataset(rows)


class TestNdcg:
    def test_perfect_ranking(self):
        assert ndcg_at_k([1, 0], [2.0, 1.0], 2) == 1.0

    def test_inverted_ranking(self):
        assert ndcg_at_k([0, 1], [2.0, 1.0], 2) == pytest.approx(1 / math.log2(3), abs=1e-12)

    def test_all_zero_labels_convention(self):
        assert ndcg_at_k([0, 0, 0], [3.0, 2.0, 1.0], 5) == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ndcg_at_k([1, 0], [1.0], 3)

    def test_ties_resolved_by_original_index(self):
        # equal scores: ranking keeps row order, so the positive at index 0 wins
        assert ndcg_at_k([1, 0], [1.0, 1.0], 2) == 1.0
        assert ndcg_at_k([0, 1], [1.0, 1.0], 2) == pytest.approx(1 / math.log2(3))

    @given(
        labels=st.lists(st.integers(0, 1), min_size=1, max_size=12),
        shift=st.floats(0.1, 10),
        scale=st.floats(0.1, 10),
    )
    @settings(max_examples=60)
    def test_monotone_transform_invariance(self, labels, shift, scale):
        rng = np.random.default_rng(7)
        scores = rng.normal(size=len(labels))
        transformed = scale * scores + shift
        assert ndcg_at_k(labels, scores, 5) == pytest.approx(
            ndcg_at_k(labels, transformed, 5), abs=1e-12
        )


class TestComputeLambdas:
    def test_equal_labels_give_zero_gradients(self):
        gradients, hessians = compute_lambdas([1.0, 2.0, 3.0], [1, 1, 1], 5)
        assert np.all(gradients == 0)
        assert np.all(hessians == 1e-16)

    @given(
        labels=st.lists(st.integers(0, 1), min_size=2, max_size=15),
    )
    @settings(max_examples=60)
    def test_gradient_sum_is_zero(self, labels):
        rng = np.random.default_rng(len(labels))
        scores = rng.normal(size=len(labels))
        gradients, _ = compute_lambdas(scores, labels, 5)
        assert abs(gradients.sum()) < 1e-8

    def test_three_row_finite_difference(self):
        scores = np.array([0.3, -0.2, 0.1])
        labels = np.array([1, 0, 0])
        gradients, _ = compute_lambdas(scores, labels, 5)
        h = 1e-6
        for m in range(3):
            up, down = scores.copy(), scores.copy()
            up[m] += h
            down[m] -= h
            numeric = (
                lambdarank_surrogate(up, labels, 5, scores)
                - lambdarank_surrogate(down, labels, 5, scores)
            ) / (2 * h)
            assert gradients[m] == pytest.approx(numeric, rel=1e-5)

    def test_finite_difference_many_groups(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = rng.integers(2, 12)
            labels = rng.integers(0, 2, size=n)
            scores = rng.normal(size=n)
            gradients, hessians = compute_lambdas(scores, labels, 5)
            assert abs(gradients.sum()) < 1e-8
            assert np.all(hessians >= 1e-16)
            h = 1e-6
            for m in range(n):
                up, down = scores.copy(), scores.copy()
                up[m] += h
                down[m] -= h
                numeric = (
                    lambdarank_surrogate(up, labels, 5, scores)
                    - lambdarank_surrogate(down, labels, 5, scores)
                ) / (2 * h)
                if abs(numeric) > 1e-12:
                    assert gradients[m] == pytest.approx(numeric, rel=1e-5)
                else:
                    assert abs(gradients[m]) < 1e-10

    def test_gradient_pushes_positive_up(self):
        gradients, _ = compute_lambdas([0.0, 1.0], [1, 0], 5)
        assert gradients[0] < 0  # negative gradient: raise this score
        assert gradients[1] > 0


class TestFit:
    def test_separable_data_reaches_high_ndcg(self):
        import random

        rng = random.Random(99)
        train = _synthetic_groups(rng, 40, 40)
        valid = _synthetic_groups(rng, 10, 40)
        params = TrainParams(max_trees=200)
        model = fit(train, valid, params)
        best = model.train_log[model.best_iteration - 1]
        assert best.valid_ndcg >= 0.95

    def test_empty_dataset_rejected(self):
        data = _dataset([("q", "c", [0] * 8, 1)])
        with pytest.raises(ValueError):
            fit(LtrDataset(), data, TrainParams())
        with pytest.raises(ValueError):
            fit(data, LtrDataset(), TrainParams())

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            TrainParams(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainParams(num_leaves=1)
        with pytest.raises(ValueError):
            TrainParams(ndcg_k=0)

    def test_retrain_produces_identical_model_file(self, tmp_path):
        import random

        paths = []
        for attempt in ("a", "b"):
            rng = random.Random(5)
            train = _synthetic_groups(rng, 10, 20)
            valid = _synthetic_groups(rng, 4, 20)
            model = fit(train, valid, TrainParams(max_trees=30, early_stopping_rounds=10))
            path = tmp_path / f"model_{attempt}.txt"
            save_model(model, path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_training_beats_zero_model(self):
        import random

        from legalir.ltr import _mean_group_ndcg

        rng = random.Random(1)
        train = _synthetic_groups(rng, 15, 25)
        valid = _synthetic_groups(rng, 5, 25)
        model = fit(train, valid, TrainParams(max_trees=50, early_stopping_rounds=25))
        labels = train.labels().astype(float)
        slices = train.group_slices()
        zero = _mean_group_ndcg(labels, np.zeros(len(train)), slices, 5)
        trained = _mean_group_ndcg(labels, model.predict(train.feature_matrix()), slices, 5)
        assert trained >= zero

    def test_gradient_sums_logged_every_round(self):
        import random

        rng = random.Random(2)
        train = _synthetic_groups(rng, 8, 15)
        valid = _synthetic_groups(rng, 3, 15)
        model = fit(train, valid, TrainParams(max_trees=20, early_stopping_rounds=20))
        assert len(model.train_log) >= 1
        assert all(r.max_abs_gradient_sum < 1e-8 for r in model.train_log)


class TestPredict:
    def test_zero_trees_zero_scores(self):
        model = GbdtModel(trees=[], learning_rate=0.5, best_iteration=0)
        scores = predict(model, np.zeros((4, 8)))
        assert np.all(scores == 0)

    def test_single_constant_tree(self):
        tree = RegressionTree(nodes=[("leaf", 2.5)], n_features=8)
        model = GbdtModel(trees=[tree], learning_rate=0.1, best_iteration=1)
        scores = predict(model, np.ones((3, 8)))
        assert np.allclose(scores, 0.25)

    def test_arity_mismatch_rejected(self):
        model = GbdtModel(trees=[], learning_rate=0.1, best_iteration=0, n_features=8)
        with pytest.raises(ValueError):
            predict(model, np.zeros((2, 5)))

    def test_best_iteration_truncates(self):
        trees = [RegressionTree(nodes=[("leaf", 1.0)]), RegressionTree(nodes=[("leaf", 1.0)])]
        model = GbdtModel(trees=trees, learning_rate=1.0, best_iteration=1)
        assert np.allclose(predict(model, np.zeros((1, 8))), 1.0)

    def test_split_routing(self):
        tree = RegressionTree(
            nodes=[("split", 5, 2.0, 1, 2), ("leaf", -1.0), ("leaf", 1.0)], n_features=8
        )
        X = np.zeros((2, 8))
        X[0, 4] = 1.5  # goes left (<= threshold)
        X[1, 4] = 3.0  # goes right
        assert list(tree.apply(X)) == [-1.0, 1.0]

    def test_feature_index_validation(self):
        tree = RegressionTree(nodes=[("split", 9, 0.0, 1, 2), ("leaf", 0.0), ("leaf", 0.0)])
        with pytest.raises(ValueError, match="feature index"):
            tree.validate()


class TestModelFile:
    def test_save_load_round_trip(self, tmp_path):
        import random

        rng = random.Random(3)
        train = _synthetic_groups(rng, 6, 12)
        valid = _synthetic_groups(rng, 2, 12)
        model = fit(train, valid, TrainParams(max_trees=10, early_stopping_rounds=10))
        path = tmp_path / "model.txt"
        save_model(model, path, provenance={"note": "round-trip"})
        loaded = load_model(path)
        assert loaded.best_iteration == model.best_iteration
        assert loaded.learning_rate == model.learning_rate
        X = train.feature_matrix()
        assert np.array_equal(loaded.predict(X), model.predict(X))
        save_model(loaded, tmp_path / "again.txt")

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("not-a-model v9\n")
        with pytest.raises(ValueError, match="header"):
            load_model(path)


def _golden_fixture():
    """Pinned noisy dataset: separable harness with every 7th label flipped."""
    import random

    rng = random.Random(20230402)
    train = _synthetic_groups(rng, 5, 10)
    valid = _synthetic_groups(rng, 2, 10)
    for i, row in enumerate(train.rows):
        if i % 7 == 3:
            row.label = 1 - row.label
    for i, row in enumerate(valid.rows):
        if i % 5 == 2:
            row.label = 1 - row.label
    return train, valid


class TestGoldenPredictions:
    def test_frozen_regression_values(self):
        """Deterministic fit on a pinned tiny dataset must reproduce the
        frozen predictions bit-for-bit (see scripts/freeze_ltr_golden.py)."""
        train, valid = _golden_fixture()
        model = fit(train, valid, TrainParams(max_trees=25, early_stopping_rounds=25))
        scores = model.predict(train.feature_matrix()[:6])
        assert scores.tolist() == GOLDEN_PREDICTIONS


# Frozen by scripts/freeze_ltr_golden.py after the first verified run.
GOLDEN_PREDICTIONS = [
    0.2510341623544386,
    0.2510341623544386,
    -0.25103416235443854,
    -0.25103416235443854,
    -0.2510341623544386,
    0.25103416235443854,
]
