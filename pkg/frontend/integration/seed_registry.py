"""Seed a registry for the console integration test: a two-regime
control-partitioned model plus AR power/zone models for strategy ranking.

    python3 integration/seed_registry.py /tmp/registry
"""

import sys
from datetime import datetime, timedelta

import numpy as np

from drsuite.cart import FitConfig
from drsuite.dataset import Column, TimeStampedDataset
from drsuite.horizon import fit_ar
from drsuite.mbcrt import VariablePartition, fit_mbcrt
from drsuite.registry import ModelRegistry


def two_regime_dataset(n=600, seed=0):
    rng = np.random.default_rng(seed)
    start = datetime(2013, 7, 1)
    ts = [start + timedelta(minutes=5 * i) for i in range(n)]
    regime = rng.integers(0, 2, n).astype(float)
    light = rng.uniform(0, 1, n)
    zsp = rng.uniform(20, 28, n)
    oat = rng.uniform(20, 35, n)
    power = np.where(regime == 0, 60.0 + 20.0 * light - 1.0 * zsp,
                     120.0 - 10.0 * light + 0.5 * zsp)
    zone = 0.4 * oat + 0.45 * zsp + rng.normal(0, 0.01, n)
    cols = (
        Column("oat", "continuous", "disturbance", oat),
        Column("is_weekend", "categorical", "proxy", regime, codes=(0, 1)),
        Column("lighting", "continuous", "control", light),
        Column("zone_setpoint", "continuous", "control", zsp),
        Column("zone_temp_1", "continuous", "response", zone),
        Column("power", "continuous", "response", power),
    )
    return TimeStampedDataset(tuple(ts), cols, 5)


def main(root):
    reg = ModelRegistry(root)
    ds = two_regime_dataset()
    part = VariablePartition(controls=("lighting", "zone_setpoint"),
                             disturbances=("oat", "is_weekend"))
    x_safe = {"lighting": (0.1, 0.9), "zone_setpoint": (21.0, 26.5)}
    mb = fit_mbcrt(ds, part, "power", ["zone_temp_1"], x_safe)
    reg.save("ctrl", mb, metrics={"regions": len(mb.power.leaves)})

    exo = ["oat", "lighting", "zone_setpoint"]
    fc = FitConfig(min_leaf=10, max_depth=12)
    reg.save("p_ar", fit_ar(ds, "power", 1, exo + ["zone_temp_1"], config=fc))
    reg.save("z1_ar", fit_ar(ds, "zone_temp_1", 1, exo, config=fc))
    print("seeded", sorted(reg.names()))


if __name__ == "__main__":
    main(sys.argv[1])
