"""Held-out baseline accuracy sweep over the simulated building.

Trains each learner on N days, tests on the following 7, and prints an
aligned accuracy/CV table per seed.

    python3 scripts/baseline_accuracy.py --train-days 60 --seeds 5
"""

import argparse
import time

from drsuite.cart import FitConfig, fit_tree, predict_tree
from drsuite.ensemble import fit_brt, fit_forest, predict_brt, predict_forest
from drsuite.metrics import accuracy, cv_statistic
from drsuite.service import default_features, ensure_proxies
from drsuite.testbed import RcBuildingConfig, generate_dataset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--train-days", type=int, default=60)
    ap.add_argument("--test-days", type=int, default=7)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--n-trees", type=int, default=10)
    args = ap.parse_args()

    print(f"{'seed':>4} {'model':>8} {'accuracy':>9} {'CV %':>7} {'fit s':>6}")
    for seed in range(args.seeds):
        cfg = RcBuildingConfig(seed=seed)
        ds = ensure_proxies(generate_dataset(
            cfg, days=args.train_days + args.test_days))
        feats = default_features(ds, "power")
        X = ds.matrix(feats)
        y = ds.column("power").values
        n_train = args.train_days * 24 * 60 // cfg.interval_minutes

        fits = {
            "tree": lambda: fit_tree(X[:n_train], y[:n_train],
                                     FitConfig(min_leaf=30, max_depth=12),
                                     feats),
            "forest": lambda: fit_forest(
                X[:n_train], y[:n_train], n_trees=args.n_trees,
                config=FitConfig(min_leaf=30, max_depth=12), seed=seed,
                feature_names=feats),
            "brt": lambda: fit_brt(X[:n_train], y[:n_train], n_stages=60,
                                   feature_names=feats),
        }
        predictors = {"tree": predict_tree, "forest": predict_forest,
                      "brt": predict_brt}
        for name, fit in fits.items():
            t0 = time.time()
            model = fit()
            elapsed = time.time() - t0
            preds = [predictors[name](model,
                                      {nm: X[n_train + i, j]
                                       for j, nm in enumerate(feats)})
                     for i in range(len(X) - n_train)]
            acc = accuracy(y[n_train:], preds).accuracy
            cv = cv_statistic(y[n_train:], preds)
            print(f"{seed:>4} {name:>8} {acc:>9.4f} {cv:>7.2f} {elapsed:>6.1f}")


if __name__ == "__main__":
    main()
