"""Random forests and boosted regression trees over the cart learner."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cart import FitConfig, RegressionTreeModel, fit_tree, predict_tree, predict_tree_batch
from .errors import InvalidArgument, SchemaMismatch


@dataclass
class ForestModel:
    trees: list[RegressionTreeModel]
    mtry: int
    bootstrap: bool
    seed: int
    oob_error: float | None = None

    def __post_init__(self):
        if not self.trees:
            raise InvalidArgument("forest needs at least one tree")


@dataclass
class BoostedModel:
    init: float  # F0, the global training mean
    stages: list[RegressionTreeModel] = field(default_factory=list)
    shrinkage: float = 0.1


def default_mtry(m: int) -> int:
    return max(1, math.ceil(m / 3))


def fit_forest(X, y, n_trees: int = 100, mtry: int | None = None,
               config: FitConfig = FitConfig(), seed: int = 0,
               bootstrap: bool = True, feature_names=None,
               categorical_codes=None) -> ForestModel:
    """Fit a random forest: per-tree bootstrap rows, per-node mtry feature
    subsampling. Deterministic for a fixed seed; trees are assembled in
    index order regardless of any internal parallelism."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = X.shape
    if n_trees < 1:
        raise InvalidArgument("n_trees must be >= 1")
    if mtry is None:
        mtry = default_mtry(m)
    if not 1 <= mtry <= m:
        raise InvalidArgument(f"mtry={mtry} outside [1, {m}]")

    trees = []
    oob_sum = np.zeros(n)
    oob_count = np.zeros(n, dtype=int)
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        if bootstrap:
            rows = rng.integers(0, n, size=n)
        else:
            rows = np.arange(n)
        tree = fit_tree(X[rows], y[rows], config, feature_names,
                        categorical_codes, rng=rng, mtry=mtry)
        trees.append(tree)
        if bootstrap:
            oob = np.setdiff1d(np.arange(n), rows)
            if len(oob):
                oob_sum[oob] += predict_tree_batch(tree, X[oob])
                oob_count[oob] += 1

    oob_error = None
    if bootstrap:
        seen = oob_count > 0
        if seen.any():
            resid = y[seen] - oob_sum[seen] / oob_count[seen]
            oob_error = float(np.mean(resid**2))
    return ForestModel(trees=trees, mtry=mtry, bootstrap=bootstrap, seed=seed,
                       oob_error=oob_error)


def predict_forest(model: ForestModel, x) -> float:
    return float(np.mean([predict_tree(t, x) for t in model.trees]))


def predict_forest_batch(model: ForestModel, X) -> np.ndarray:
    return np.mean([predict_tree_batch(t, X) for t in model.trees], axis=0)


def fit_brt(X, y, n_stages: int = 200, shrinkage: float = 0.1,
            config: FitConfig | None = None, feature_names=None,
            categorical_codes=None) -> BoostedModel:
    """Forward stagewise boosting with squared-error loss: each stage fits a
    shallow tree to the current residuals."""
    if not 0.0 < shrinkage <= 1.0:
        raise InvalidArgument(f"shrinkage must be in (0,1], got {shrinkage}")
    if n_stages < 1:
        raise InvalidArgument("n_stages must be >= 1")
    if config is None:
        config = FitConfig(max_depth=4)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    f0 = float(y.mean())
    current = np.full(len(y), f0)
    stages = []
    for _ in range(n_stages):
        tree = fit_tree(X, y - current, config, feature_names, categorical_codes)
        current = current + shrinkage * predict_tree_batch(tree, X)
        stages.append(tree)
    return BoostedModel(init=f0, stages=stages, shrinkage=shrinkage)


def predict_brt(model: BoostedModel, x) -> float:
    out = model.init
    for tree in model.stages:
        out += model.shrinkage * predict_tree(tree, x)
    return float(out)


def predict_brt_batch(model: BoostedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    out = np.full(X.shape[0], model.init)
    for tree in model.stages:
        out = out + model.shrinkage * predict_tree_batch(tree, X)
    return out


def check_schema(model, feature_names) -> None:
    trees = model.trees if isinstance(model, ForestModel) else model.stages
    for t in trees:
        if t.feature_names != list(feature_names):
            raise SchemaMismatch("model schema does not match supplied features")
