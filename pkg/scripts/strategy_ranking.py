"""Rank fixed DR strategies with recursive tree forecasts and check the
choice against the testbed ground truth.

    python3 scripts/strategy_ranking.py --scenarios 10
"""

import argparse

import numpy as np

from drsuite.cart import FitConfig
from drsuite.horizon import Strategy, evaluate_strategies, fit_ar
from drsuite.service import ensure_proxies
from drsuite.testbed import (
    RcBuildingConfig,
    SimState,
    generate_dataset,
    ground_truth_strategy_energy,
    simulate_step,
)

ZONES = ["zone_temp_1", "zone_temp_2", "zone_temp_3"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenarios", type=int, default=10)
    ap.add_argument("--train-days", type=int, default=14)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = RcBuildingConfig(seed=args.seed)
    ds = ensure_proxies(generate_dataset(cfg, days=args.train_days,
                                         excitation=2.0))
    exo_zone = ["oat", "solar", "chw_setpoint", "zone_setpoint", "lighting"]
    fc = FitConfig(min_leaf=10, max_depth=16)
    power_m = fit_ar(ds, "power", 1, exo_zone + ZONES, config=fc)
    zone_ms = {z: fit_ar(ds, z, 1, exo_zone, config=fc) for z in ZONES}

    hits = 0
    for sc in range(args.scenarios):
        rng = np.random.default_rng(100 + sc)
        weather = [{"oat": float(rng.uniform(29, 35)),
                    "solar": float(rng.uniform(0.3, 1.0))}] * 12
        init = SimState(list(rng.uniform(23.5, 25.5, 3)))
        _, p0, _, _ = simulate_step(
            cfg, init, {"chw_setpoint": 7.0, "zone_setpoint": 23.0,
                        "lighting": 0.9}, weather[0])
        strats = []
        for k, i in enumerate(rng.permutation(3)):
            strats.append(Strategy(name=f"s{k}", interval_minutes=5, steps=tuple(
                {"chw_setpoint": 7.0,
                 "zone_setpoint": float(23.5 + 1.5 * i + rng.uniform(-0.4, 0.4)),
                 "lighting": float(0.85 - 0.3 * i + rng.uniform(-0.05, 0.05))}
                for _ in range(12))))
        gt = {s.name: ground_truth_strategy_energy(cfg, init, s, weather)[0]
              for s in strats}
        gt_best = min(gt, key=gt.get)
        report = evaluate_strategies(
            power_m, zone_ms, strats, weather,
            {"power_lags": [p0],
             "zone_lags": {z: [init.zone_temps[i]]
                           for i, z in enumerate(ZONES)}}, 5)
        ok = report.chosen == gt_best
        hits += ok
        mark = "ok " if ok else "MISS"
        pred = {n: round(v, 1) for n, v in report.totals_kwh.items()}
        truth = {n: round(v, 1) for n, v in gt.items()}
        print(f"{sc:>2} {mark} chose {report.chosen} (truth {gt_best}) "
              f"predicted {pred} actual {truth}")
    print(f"matched ground truth in {hits}/{args.scenarios} scenarios")


if __name__ == "__main__":
    main()
