"""Accuracy metrics (NRMSE / CV), curtailment reports and tariff revenue."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, UndefinedMetric


@dataclass(frozen=True)
class AccuracyReport:
    rmse: float
    mean_actual: float
    nrmse: float
    accuracy: float  # 1 - nrmse
    n: int

    def to_json(self) -> dict:
        return {"rmse": self.rmse, "mean_actual": self.mean_actual,
                "nrmse": self.nrmse, "accuracy": self.accuracy, "n": self.n}


@dataclass(frozen=True)
class Tariff:
    reservation_rate: float  # $/kW/month
    energy_rate: float  # $/kWh
    months: float
    events_per_month: float
    event_hours: float

    def __post_init__(self):
        for f in ("reservation_rate", "energy_rate", "months",
                  "events_per_month", "event_hours"):
            if getattr(self, f) < 0:
                raise InvalidArgument(f"{f} must be nonnegative")


def _check_pair(actual, predicted):
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if len(actual) != len(predicted):
        raise InvalidArgument(f"length mismatch: {len(actual)} vs {len(predicted)}")
    if len(actual) == 0:
        raise InvalidArgument("empty vectors")
    return actual, predicted


def accuracy(actual, predicted) -> AccuracyReport:
    """accuracy = 1 - RMSE / mean(actual); undefined for zero mean."""
    actual, predicted = _check_pair(actual, predicted)
    mean = float(actual.mean())
    if mean == 0.0:
        raise UndefinedMetric("mean of actuals is zero; NRMSE undefined")
    rmse = float(np.sqrt(np.mean((actual - predicted) ** 2)))
    nrmse = rmse / mean
    return AccuracyReport(rmse=rmse, mean_actual=mean, nrmse=nrmse,
                          accuracy=1.0 - nrmse, n=len(actual))


def cv_statistic(actual, predicted) -> float:
    """Coefficient of variation, as a percentage: 100 * RMSE / mean(actual)."""
    return 100.0 * accuracy(actual, predicted).nrmse


def revenue(curtailed_kw: float, tariff: Tariff) -> dict:
    """Itemized DR revenue: a capacity reservation line plus an energy line
    for the curtailment delivered over the contracted events."""
    if curtailed_kw < 0:
        raise InvalidArgument("curtailed_kw must be nonnegative")
    reservation = curtailed_kw * tariff.reservation_rate * tariff.months
    energy_kwh = curtailed_kw * tariff.event_hours * tariff.events_per_month * tariff.months
    energy = energy_kwh * tariff.energy_rate
    return {
        "curtailed_kw": curtailed_kw,
        "reservation_dollars": reservation,
        "energy_kwh": energy_kwh,
        "energy_dollars": energy,
        "total_dollars": reservation + energy,
    }


def curtailment_report(baseline, actual, interval_minutes: int) -> dict:
    """Curtailment vs a baseline trajectory. Negative curtailment (actual
    above baseline) is reported, never clamped."""
    baseline, actual = _check_pair(baseline, actual)
    dt_h = interval_minutes / 60.0
    curtailed = baseline - actual
    total_kwh = float(curtailed.sum() * dt_h)
    baseline_kwh = float(baseline.sum() * dt_h)
    return {
        "avg_kw": float(curtailed.mean()),
        "total_kwh": total_kwh,
        "percent_vs_baseline": (100.0 * total_kwh / baseline_kwh
                                if baseline_kwh != 0 else float("nan")),
        "n_steps": len(curtailed),
    }
