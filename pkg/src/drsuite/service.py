"""Shared service core: the CLI and the HTTP API both call these functions,
so the two surfaces cannot drift apart numerically."""

from __future__ import annotations

import numpy as np

from .cart import FitConfig, fit_tree, predict_tree, prune_cv
from .dataset import TimeStampedDataset, derive_proxy_features
from .ensemble import fit_brt, fit_forest, predict_brt, predict_forest
from .errors import InvalidArgument, SchemaMismatch
from .events import DrEvent
from .horizon import (
    AutoRegressiveTreeModel,
    EvaluationReport,
    Strategy,
    evaluate_strategies,
    fit_ar,
    forecast_recursive,
)
from .mbcrt import (
    MbcrtModel,
    SynthesisConfig,
    VariablePartition,
    fit_mbcrt,
    run_dr_event,
    synthesize_step,
)
from .metrics import accuracy
from .testbed import RcBuildingConfig, SimState, ground_truth_strategy_energy

MODEL_TYPES = ("tree", "cvtree", "forest", "brt", "ar", "mbcrt")


def ensure_proxies(ds: TimeStampedDataset) -> TimeStampedDataset:
    if "day_of_week" in ds.column_names():
        return ds
    return derive_proxy_features(ds)


def default_features(ds: TimeStampedDataset, response: str) -> list[str]:
    names = []
    for role in ("disturbance", "proxy", "control", "lagged_response"):
        names.extend(n for n in ds.columns_with_role(role) if n != response)
    return names


def _design(ds: TimeStampedDataset, features: list[str]):
    X = ds.matrix(features)
    cat = {j: ds.column(nm).codes for j, nm in enumerate(features)
           if ds.column(nm).kind == "categorical"}
    return X, cat


def train_model(ds: TimeStampedDataset, model_type: str, response: str,
                features: list[str] | None = None, hyper: dict | None = None):
    """Fit any model family from a dataset; returns (model, metrics dict).

    `hyper` keys are family-specific: max_depth/min_leaf (all), cv_folds
    (cvtree), n_trees/mtry/seed (forest), n_stages/shrinkage (brt),
    delta/learner (ar), controls/disturbances/x_safe/zone_responses/delta
    (mbcrt)."""
    hyper = dict(hyper or {})
    if model_type not in MODEL_TYPES:
        raise InvalidArgument(f"unknown model type {model_type!r}")
    ds = ensure_proxies(ds)
    if response not in ds.column_names():
        raise SchemaMismatch(f"response column {response!r} not in dataset")

    config = FitConfig(
        min_leaf=int(hyper.pop("min_leaf", 5)),
        max_depth=int(hyper.pop("max_depth", 30 if model_type != "brt" else 4)),
    )

    if model_type == "mbcrt":
        controls = list(hyper.pop("controls"))
        disturbances = hyper.pop("disturbances", None)
        if disturbances is None:
            disturbances = [n for n in default_features(ds, response)
                            if n not in controls
                            and n not in hyper.get("zone_responses", [])]
        part = VariablePartition(controls=tuple(controls),
                                 disturbances=tuple(disturbances))
        x_safe = hyper.pop("x_safe", None)
        if x_safe is None:
            x_safe = {c: (float(ds.column(c).values.min()),
                          float(ds.column(c).values.max())) for c in controls}
        else:
            x_safe = {k: (float(v[0]), float(v[1])) for k, v in x_safe.items()}
        zone_responses = list(hyper.pop("zone_responses", []))
        model = fit_mbcrt(ds, part, response, zone_responses, x_safe,
                          delta=int(hyper.pop("delta", 0)))
        rep = model.power.leaves
        metrics = {"regions": len(rep),
                   "rmse": float(np.sqrt(np.mean([lm.rmse ** 2 for lm in rep.values()])))}
        return model, metrics

    features = list(features) if features else default_features(ds, response)
    if model_type == "ar":
        delta = int(hyper.pop("delta", 1))
        learner = hyper.pop("learner", "tree")
        model = fit_ar(ds, response, delta, features, learner=learner,
                       config=config, **hyper)
        lagged_actual = ds.column(response).values[delta:]
        preds = []
        lags = list(ds.column(response).values)
        for i in range(delta, ds.n_rows):
            x = {nm: ds.column(nm).values[i] for nm in features}
            for j in range(delta):
                x[f"lag_{j + 1}"] = lags[i - 1 - j]
            preds.append(model.predict_one(x))
        rep = accuracy(lagged_actual, preds)
        return model, {"accuracy": rep.accuracy, "rmse": rep.rmse}

    X, cat = _design(ds, features)
    y = ds.column(response).values
    if model_type == "tree":
        model = fit_tree(X, y, config, features, cat)
        preds = [predict_tree(model, {nm: X[i, j] for j, nm in enumerate(features)})
                 for i in range(len(y))]
    elif model_type == "cvtree":
        full = fit_tree(X, y, config, features, cat)
        model = prune_cv(full, X, y, k=int(hyper.pop("cv_folds", 10)), config=config)
        preds = [predict_tree(model, {nm: X[i, j] for j, nm in enumerate(features)})
                 for i in range(len(y))]
    elif model_type == "forest":
        model = fit_forest(X, y, n_trees=int(hyper.pop("n_trees", 100)),
                           mtry=hyper.pop("mtry", None), config=config,
                           seed=int(hyper.pop("seed", 0)),
                           feature_names=features, categorical_codes=cat)
        preds = [predict_forest(model, {nm: X[i, j] for j, nm in enumerate(features)})
                 for i in range(len(y))]
    else:  # brt
        model = fit_brt(X, y, n_stages=int(hyper.pop("n_stages", 200)),
                        shrinkage=float(hyper.pop("shrinkage", 0.1)),
                        config=config, feature_names=features, categorical_codes=cat)
        preds = [predict_brt(model, {nm: X[i, j] for j, nm in enumerate(features)})
                 for i in range(len(y))]
    rep = accuracy(y, preds)
    return model, {"accuracy": rep.accuracy, "rmse": rep.rmse}


def predict_rows(model, rows: list[dict], initial_lags: list[float] | None = None
                 ) -> list[float]:
    """Baseline trajectory for a list of feature rows. AR models forecast
    recursively from `initial_lags`; point models predict row-by-row."""
    if isinstance(model, AutoRegressiveTreeModel):
        return forecast_recursive(model, rows, initial_lags or [])
    if isinstance(model, MbcrtModel):
        raise InvalidArgument(
            "control-partitioned models synthesize set-points; "
            "use /synthesize, not baseline prediction")
    from .ensemble import BoostedModel, ForestModel

    out = []
    for row in rows:
        if isinstance(model, ForestModel):
            out.append(float(predict_forest(model, row)))
        elif isinstance(model, BoostedModel):
            out.append(float(predict_brt(model, row)))
        else:
            out.append(float(predict_tree(model, row)))
    return out


def evaluation_from_payload(power_model, zone_models: dict, payload: dict
                            ) -> EvaluationReport:
    strategies = [Strategy.from_json(s) for s in payload["strategies"]]
    return evaluate_strategies(
        power_model, zone_models, strategies,
        payload["forecast"], payload["initial_state"],
        int(payload["interval_minutes"]))


def synthesis_config_from_payload(data: dict | None) -> SynthesisConfig:
    data = data or {}
    cb = data.get("comfort_bounds")
    return SynthesisConfig(
        penalty=float(data.get("penalty", 50.0)),
        t_ref=tuple(float(v) for v in data.get("t_ref", ())),
        comfort_bounds=tuple((float(a), float(b)) for a, b in cb) if cb else None,
    )


def step_to_json(step) -> dict:
    return {"controls": step.controls, "kw_hat": step.kw_hat, "t_hat": step.t_hat,
            "region_ids": step.region_ids, "objective": step.objective,
            "status": step.status}


def synthesize_step_payload(model: MbcrtModel, x_d: dict, config: SynthesisConfig
                            ) -> dict:
    from .errors import InfeasibleComfort

    try:
        return step_to_json(synthesize_step(model, x_d, config))
    except InfeasibleComfort as exc:
        return step_to_json(exc.fallback)


def run_event(model: MbcrtModel, forecast: list[dict], initial_lags: list[float],
              config: SynthesisConfig, event, plant=None,
              baseline: list[float] | None = None) -> list[dict]:
    if isinstance(event, dict):
        event = DrEvent.from_json(event)
    return run_dr_event(model, forecast, initial_lags, config, event,
                        plant=plant, baseline=baseline)


def whatif(payload: dict) -> dict:
    """Ground-truth rollout of a strategy against the testbed."""
    cfg = RcBuildingConfig(**payload.get("config", {}))
    strategy = Strategy.from_json(payload["strategy"])
    initial = SimState(zone_temps=list(payload.get(
        "initial_temps", [24.0] * cfg.zones)))
    weather = payload["weather"]
    kwh, powers, temps = ground_truth_strategy_energy(cfg, initial, strategy, weather)
    return {"total_kwh": kwh, "power": powers, "zone_temps": temps}
