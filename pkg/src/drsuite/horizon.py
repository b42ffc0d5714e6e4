"""Auto-regressive trees, recursive finite-horizon forecasting, and ranking
of fixed rule-based curtailment strategies."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .cart import FitConfig, RegressionTreeModel, fit_tree, predict_tree
from .dataset import TimeStampedDataset, add_lagged_response, lag_names
from .ensemble import BoostedModel, ForestModel, predict_brt, predict_forest
from .errors import InsufficientHistory, InvalidArgument, SchemaMismatch


@dataclass
class AutoRegressiveTreeModel:
    base: RegressionTreeModel | ForestModel | BoostedModel
    delta: int
    response: str
    exogenous: list[str]

    def predict_one(self, x: dict[str, float]) -> float:
        if isinstance(self.base, ForestModel):
            return predict_forest(self.base, x)
        if isinstance(self.base, BoostedModel):
            return predict_brt(self.base, x)
        return predict_tree(self.base, x)


@dataclass(frozen=True)
class Strategy:
    """A fixed per-step schedule of control set-points over an event."""

    name: str
    interval_minutes: int
    steps: tuple[dict, ...]

    @property
    def horizon(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        return {"name": self.name, "interval_minutes": self.interval_minutes,
                "steps": [dict(s) for s in self.steps]}

    @classmethod
    def from_json(cls, data: dict) -> "Strategy":
        return cls(name=data["name"], interval_minutes=int(data["interval_minutes"]),
                   steps=tuple(dict(s) for s in data["steps"]))

    @classmethod
    def load(cls, path) -> "Strategy":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class EvaluationReport:
    trajectories: dict[str, list[float]]
    totals_kwh: dict[str, float]
    ranking: list[str]
    chosen: str

    def to_json(self) -> dict:
        return {"trajectories": self.trajectories, "totals_kwh": self.totals_kwh,
                "ranking": self.ranking, "chosen": self.chosen}


def fit_ar(ds: TimeStampedDataset, response: str, delta: int,
           exogenous: list[str], learner="tree",
           config: FitConfig = FitConfig(), **learner_kwargs) -> AutoRegressiveTreeModel:
    """Append response lags and fit the chosen learner on exogenous + lags."""
    if delta < 1:
        raise InvalidArgument("delta must be >= 1")
    lagged = add_lagged_response(ds, response, delta)
    features = list(exogenous) + lag_names(delta)
    X = lagged.matrix(features)
    y = lagged.column(response).values
    cat = {
        j: lagged.column(nm).codes
        for j, nm in enumerate(features)
        if lagged.column(nm).kind == "categorical"
    }
    if learner == "tree":
        base = fit_tree(X, y, config, features, cat)
    elif learner == "forest":
        from .ensemble import fit_forest

        base = fit_forest(X, y, config=config, feature_names=features,
                          categorical_codes=cat, **learner_kwargs)
    elif learner == "brt":
        from .ensemble import fit_brt

        base = fit_brt(X, y, config=config, feature_names=features,
                       categorical_codes=cat, **learner_kwargs)
    else:
        raise InvalidArgument(f"unknown learner {learner!r}")
    return AutoRegressiveTreeModel(base=base, delta=delta, response=response,
                                   exogenous=list(exogenous))


def forecast_recursive(model: AutoRegressiveTreeModel,
                       exo_forecast: list[dict[str, float]],
                       initial_lags: list[float]) -> list[float]:
    """Recursive multi-step forecast: each step's prediction replaces the
    oldest unavailable ground-truth lag. `initial_lags` is ordered
    most-recent-first."""
    if len(initial_lags) < model.delta:
        raise InsufficientHistory(
            f"need {model.delta} initial lags, got {len(initial_lags)}"
        )
    lags = list(initial_lags[: model.delta])
    out = []
    for row in exo_forecast:
        x = dict(row)
        missing = [nm for nm in model.exogenous if nm not in x]
        if missing:
            raise SchemaMismatch(f"forecast row missing features: {missing}")
        for j in range(model.delta):
            x[f"lag_{j + 1}"] = lags[j]
        yhat = model.predict_one(x)
        out.append(float(yhat))
        lags = [yhat] + lags[:-1]
    return out


def evaluate_strategies(power_model: AutoRegressiveTreeModel,
                        zone_models: dict[str, AutoRegressiveTreeModel],
                        strategies: list[Strategy],
                        weather_forecast: list[dict[str, float]],
                        initial_state: dict,
                        interval_minutes: int) -> EvaluationReport:
    """Rank fixed strategies by predicted event energy.

    Per step and per strategy: the zone-temperature models are advanced
    first on weather + set-points, then the power model consumes the fresh
    zone forecasts along with its own lagged values. Lowest total predicted
    kWh wins; ties break by strategy list order."""
    if not strategies:
        raise InvalidArgument("no strategies to evaluate")
    horizons = {s.horizon for s in strategies}
    if len(horizons) != 1:
        raise InvalidArgument(f"strategies disagree on horizon: {sorted(horizons)}")
    h = horizons.pop()
    if len(weather_forecast) < h:
        raise InvalidArgument("weather forecast shorter than strategy horizon")

    dt_hours = interval_minutes / 60.0
    trajectories: dict[str, list[float]] = {}
    totals: dict[str, float] = {}
    for strat in strategies:
        power_lags = list(initial_state["power_lags"][: power_model.delta])
        zone_lags = {z: list(initial_state["zone_lags"][z][: m.delta])
                     for z, m in zone_models.items()}
        traj = []
        for t in range(h):
            controls = strat.steps[t]
            base_row = dict(weather_forecast[t])
            base_row.update(controls)
            temps = {}
            for zname, zmodel in zone_models.items():
                x = dict(base_row)
                for j in range(zmodel.delta):
                    x[f"lag_{j + 1}"] = zone_lags[zname][j]
                temps[zname] = zmodel.predict_one(x)
            x = dict(base_row)
            x.update(temps)
            for j in range(power_model.delta):
                x[f"lag_{j + 1}"] = power_lags[j]
            kw = power_model.predict_one(x)
            traj.append(float(kw))
            power_lags = [kw] + power_lags[:-1]
            for zname in zone_models:
                zone_lags[zname] = [temps[zname]] + zone_lags[zname][:-1]
        trajectories[strat.name] = traj
        totals[strat.name] = sum(traj) * dt_hours

    order = {s.name: i for i, s in enumerate(strategies)}
    ranking = sorted(totals, key=lambda nm: (totals[nm], order[nm]))
    return EvaluationReport(trajectories=trajectories, totals_kwh=totals,
                            ranking=ranking, chosen=ranking[0])
