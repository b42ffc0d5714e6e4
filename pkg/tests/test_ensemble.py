import numpy as np
import pytest

from drsuite.cart import FitConfig, fit_tree, predict_tree, predict_tree_batch, tree_to_dict
from drsuite.ensemble import (
    BoostedModel,
    default_mtry,
    fit_brt,
    fit_forest,
    predict_brt,
    predict_brt_batch,
    predict_forest,
    predict_forest_batch,
)
from drsuite.errors import InvalidArgument


@pytest.fixture
def toy():
    rng = np.random.default_rng(42)
    X = rng.uniform(-2, 2, size=(120, 3))
    y = 2.0 * X[:, 0] - X[:, 1] ** 2 + rng.normal(0, 0.1, 120)
    return X, y


class TestForest:
    def test_degenerate_forest_equals_single_tree(self, toy):
        X, y = toy
        forest = fit_forest(X, y, n_trees=1, mtry=3, bootstrap=False,
                            config=FitConfig(min_leaf=5))
        tree = fit_tree(X, y, FitConfig(min_leaf=5))
        for i in range(0, 120, 7):
            assert predict_forest(forest, X[i]) == predict_tree(tree, X[i])

    def test_identical_trees_average_to_single(self, toy):
        X, y = toy
        forest = fit_forest(X, y, n_trees=3, mtry=3, bootstrap=False,
                            config=FitConfig(min_leaf=5))
        single = fit_tree(X, y, FitConfig(min_leaf=5))
        for i in range(0, 120, 11):
            assert predict_forest(forest, X[i]) == pytest.approx(
                predict_tree(single, X[i]), abs=1e-12)

    def test_seed_determinism_structural(self, toy):
        X, y = toy
        a = fit_forest(X, y, n_trees=5, seed=9, config=FitConfig(min_leaf=5))
        b = fit_forest(X, y, n_trees=5, seed=9, config=FitConfig(min_leaf=5))
        assert [tree_to_dict(t) for t in a.trees] == [tree_to_dict(t) for t in b.trees]

    def test_mtry_validation(self, toy):
        X, y = toy
        with pytest.raises(InvalidArgument):
            fit_forest(X, y, n_trees=2, mtry=4)

    def test_default_mtry(self):
        assert default_mtry(3) == 1
        assert default_mtry(7) == 3

    def test_mean_of_member_predictions(self, toy):
        X, y = toy
        forest = fit_forest(X, y, n_trees=7, seed=1, config=FitConfig(min_leaf=5))
        x = X[0]
        members = [predict_tree(t, x) for t in forest.trees]
        assert predict_forest(forest, x) == pytest.approx(np.mean(members), abs=1e-12)
        assert min(members) <= predict_forest(forest, x) <= max(members)

    def test_oob_error_recorded(self, toy):
        X, y = toy
        forest = fit_forest(X, y, n_trees=10, seed=2, config=FitConfig(min_leaf=5))
        assert forest.oob_error is not None and forest.oob_error >= 0

    def test_batch_matches_scalar(self, toy):
        X, y = toy
        forest = fit_forest(X, y, n_trees=4, seed=3, config=FitConfig(min_leaf=5))
        batch = predict_forest_batch(forest, X[:9])
        for i in range(9):
            assert batch[i] == pytest.approx(predict_forest(forest, X[i]), abs=1e-12)


class TestBrt:
    def test_one_stage_unit_shrinkage_identity(self, toy):
        X, y = toy
        cfg = FitConfig(min_leaf=5, max_depth=30)
        brt = fit_brt(X, y, n_stages=1, shrinkage=1.0, config=cfg)
        tree = fit_tree(X, y - y.mean(), cfg)
        expected = y.mean() + predict_tree_batch(tree, X)
        np.testing.assert_allclose(predict_brt_batch(brt, X), expected, atol=1e-12)

    def test_training_sse_nonincreasing(self, toy):
        X, y = toy
        brt = fit_brt(X, y, n_stages=20, shrinkage=1.0, config=FitConfig(min_leaf=10, max_depth=3))
        preds = np.full(len(y), brt.init)
        last_sse = np.inf
        for tree in brt.stages:
            preds = preds + brt.shrinkage * predict_tree_batch(tree, X)
            sse = float(np.sum((y - preds) ** 2))
            assert sse <= last_sse + 1e-9
            last_sse = sse

    def test_linear_target_training_rmse(self):
        x = np.linspace(0, 1, 10)
        y = x.copy()
        brt = fit_brt(x.reshape(-1, 1), y, n_stages=50, shrinkage=0.1,
                      config=FitConfig(min_leaf=1, max_depth=4))
        rmse = float(np.sqrt(np.mean((predict_brt_batch(brt, x.reshape(-1, 1)) - y) ** 2)))
        assert rmse < 0.05 * float(np.std(y))

    def test_zero_stage_prediction_is_mean(self, toy):
        X, y = toy
        model = BoostedModel(init=float(y.mean()), stages=[], shrinkage=0.5)
        assert predict_brt(model, X[0]) == pytest.approx(float(y.mean()))

    def test_half_shrinkage_arithmetic(self, toy):
        X, y = toy
        brt = fit_brt(X, y, n_stages=1, shrinkage=0.5, config=FitConfig(min_leaf=10))
        x = X[0]
        stage_out = predict_tree(brt.stages[0], x)
        assert predict_brt(brt, x) == pytest.approx(brt.init + 0.5 * stage_out, abs=1e-12)

    def test_summation_oracle(self, toy):
        X, y = toy
        brt = fit_brt(X, y, n_stages=8, shrinkage=0.3, config=FitConfig(min_leaf=10, max_depth=3))
        rng = np.random.default_rng(0)
        for _ in range(5):
            x = rng.uniform(-2, 2, 3)
            manual = brt.init + sum(brt.shrinkage * predict_tree(t, x) for t in brt.stages)
            assert predict_brt(brt, x) == pytest.approx(manual, abs=1e-12)

    def test_bad_shrinkage(self, toy):
        X, y = toy
        with pytest.raises(InvalidArgument):
            fit_brt(X, y, n_stages=2, shrinkage=0.0)
        with pytest.raises(InvalidArgument):
            fit_brt(X, y, n_stages=2, shrinkage=1.5)
