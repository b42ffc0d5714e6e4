"""Command-line entry points. Every command prints machine-readable JSON
errors on stderr; schema problems exit 2, other domain errors exit 1."""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import service
from .dataset import load_csv, load_schema, write_csv
from .errors import DrSuiteError, SchemaMismatch
from .events import DrEvent
from .horizon import Strategy
from .metrics import Tariff, curtailment_report, revenue
from .registry import ModelRegistry
from .testbed import RcBuildingConfig, SimState, generate_dataset, make_plant


def _fail(exc: DrSuiteError):
    code = 2 if isinstance(exc, SchemaMismatch) else 1
    print(json.dumps(exc.to_json()), file=sys.stderr)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DrSuiteError as exc:
            _fail(exc)
        except FileNotFoundError as exc:
            print(json.dumps({"code": "FileNotFound", "message": str(exc)}),
                  file=sys.stderr)
            sys.exit(2)

    return wrapper


def _load_dataset(data_path, schema_path):
    try:
        schema = load_schema(schema_path)
    except FileNotFoundError:
        raise SchemaMismatch(f"schema file not found: {schema_path}") from None
    return load_csv(data_path, schema)


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


@click.group()
def main():
    """Demand-response decision suite: train models, rank strategies,
    synthesize set-points, and simulate the reference building."""


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--schema", "schema_path", required=True, type=click.Path())
@click.option("--model", "model_type", required=True,
              type=click.Choice(service.MODEL_TYPES))
@click.option("--out", "name", required=True, help="model name in the registry")
@click.option("--registry", "registry_dir", required=True, type=click.Path())
@click.option("--response", default="power", show_default=True)
@click.option("--features", default=None, help="comma-separated; default by role")
@click.option("--hyper", "hyper_path", default=None, type=click.Path(),
              help="JSON file of family-specific hyperparameters")
@handle_errors
def train(data_path, schema_path, model_type, name, registry_dir, response,
          features, hyper_path):
    """Fit a model on a timestamped CSV and persist it."""
    ds = _load_dataset(data_path, schema_path)
    hyper = _read_json(hyper_path) if hyper_path else {}
    feature_list = [f.strip() for f in features.split(",")] if features else None
    model, metrics = service.train_model(ds, model_type, response,
                                         feature_list, hyper)
    ds_full = service.ensure_proxies(ds)
    schema = [{"name": c.name, "kind": c.kind, "role": c.role, "units": c.units}
              for c in ds_full.columns]
    reg = ModelRegistry(registry_dir)
    meta = reg.save(name, model, metrics=metrics, schema=schema)
    click.echo(json.dumps(meta))


@main.command("predict-baseline")
@click.option("--model", "name", required=True)
@click.option("--registry", "registry_dir", required=True, type=click.Path())
@click.option("--forecast", "forecast_path", required=True, type=click.Path())
@click.option("--schema", "schema_path", required=True, type=click.Path())
@click.option("--response", default="power", show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path())
@handle_errors
def predict_baseline(name, registry_dir, forecast_path, schema_path, response,
                     out_path):
    """Predict the no-curtailment power trajectory over a forecast CSV.

    If the CSV carries the actual response column, prints accuracy too."""
    reg = ModelRegistry(registry_dir)
    try:
        model = reg.load(name)
    except KeyError:
        raise DrSuiteError(f"unknown model {name!r}") from None
    ds = service.ensure_proxies(_load_dataset(forecast_path, schema_path))
    names = ds.column_names()
    rows = [{nm: float(ds.column(nm).values[i]) for nm in names if nm != response}
            for i in range(ds.n_rows)]
    from .horizon import AutoRegressiveTreeModel

    initial_lags = None
    if isinstance(model, AutoRegressiveTreeModel) and response in names:
        d = model.delta
        initial_lags = [float(v) for v in ds.column(response).values[d - 1::-1]]
        rows = rows[d:]
    trajectory = service.predict_rows(model, rows, initial_lags)
    result = {"model": name, "trajectory": trajectory}
    if response in names:
        actual = ds.column(response).values[-len(trajectory):]
        from .metrics import accuracy

        result["accuracy"] = accuracy(actual, trajectory).to_json()
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(result, fh)
    click.echo(json.dumps(result))


@main.command("evaluate-strategies")
@click.option("--registry", "registry_dir", required=True, type=click.Path())
@click.option("--power-model", "power_name", required=True)
@click.option("--zone-model", "zone_specs", multiple=True,
              help="repeatable RESPONSE=MODELNAME pairs")
@click.option("--strategies", "strategies_dir", required=True, type=click.Path())
@click.option("--forecast", "forecast_path", required=True, type=click.Path(),
              help="JSON: {forecast: [rows], initial_state, interval_minutes}")
@handle_errors
def evaluate_strategies_cmd(registry_dir, power_name, zone_specs,
                            strategies_dir, forecast_path):
    """Rank fixed strategies by predicted event energy."""
    reg = ModelRegistry(registry_dir)
    power_model = reg.load(power_name)
    zone_models = {}
    for spec in zone_specs:
        resp, _, mname = spec.partition("=")
        zone_models[resp] = reg.load(mname)
    payload = _read_json(forecast_path)
    payload["strategies"] = [
        Strategy.load(p).to_json()
        for p in sorted(Path(strategies_dir).glob("*.json"))
    ]
    report = service.evaluation_from_payload(power_model, zone_models, payload)
    click.echo(json.dumps(report.to_json()))


@main.command()
@click.option("--registry", "registry_dir", required=True, type=click.Path())
@click.option("--model", "name", required=True)
@click.option("--event", "event_path", required=True, type=click.Path(),
              help="JSON DrEvent, or {n_steps: N}")
@click.option("--forecast", "forecast_path", required=True, type=click.Path(),
              help="JSON: {forecast: [rows], initial_lags?, baseline?, config?}")
@click.option("--closed-loop", "testbed_path", default=None, type=click.Path(),
              help="JSON: {config, initial_temps, weather} testbed plant")
@click.option("--out", "out_path", default=None, type=click.Path())
@handle_errors
def synthesize(registry_dir, name, event_path, forecast_path, testbed_path,
               out_path):
    """Run per-step set-point synthesis over a DR event."""
    reg = ModelRegistry(registry_dir)
    model = reg.load(name)
    event_data = _read_json(event_path)
    event = (int(event_data["n_steps"]) if "n_steps" in event_data
             else DrEvent.from_json(event_data))
    payload = _read_json(forecast_path)
    config = service.synthesis_config_from_payload(payload.get("config"))
    plant = None
    if testbed_path:
        tb = _read_json(testbed_path)
        cfg = RcBuildingConfig(**tb.get("config", {}))
        plant = make_plant(cfg, SimState(list(tb["initial_temps"])), tb["weather"])
    trace = service.run_event(model, payload["forecast"],
                              payload.get("initial_lags", []), config, event,
                              plant=plant, baseline=payload.get("baseline"))
    result = {"model": name, "trace": trace}
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(result, fh)
    click.echo(json.dumps(result))


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--days", required=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--schema-out", "schema_out", default=None, type=click.Path())
@handle_errors
def simulate(config_path, days, out_path, schema_out):
    """Generate an excited training dataset from the reference building."""
    cfg = RcBuildingConfig(**(_read_json(config_path) if config_path else {}))
    ds = generate_dataset(cfg, days=days)
    write_csv(ds, out_path, schema_out or str(out_path) + ".schema.json")
    click.echo(json.dumps({"rows": ds.n_rows, "columns": ds.column_names(),
                           "out": str(out_path)}))


@main.command()
@click.option("--baseline", "baseline_path", required=True, type=click.Path(),
              help="JSON list of baseline kW")
@click.option("--actual", "actual_path", required=True, type=click.Path(),
              help="JSON list of delivered kW")
@click.option("--interval", "interval_minutes", default=5, show_default=True)
@click.option("--tariff", "tariff_path", default=None, type=click.Path())
@handle_errors
def report(baseline_path, actual_path, interval_minutes, tariff_path):
    """Curtailment report, plus contract revenue when a tariff is given."""
    baseline = _read_json(baseline_path)
    actual = _read_json(actual_path)
    out = {"curtailment": curtailment_report(baseline, actual, interval_minutes)}
    if tariff_path:
        tariff = Tariff(**_read_json(tariff_path))
        out["revenue"] = revenue(max(0.0, out["curtailment"]["avg_kw"]), tariff)
    click.echo(json.dumps(out))


@main.command()
@click.option("--registry", "registry_dir", required=True, type=click.Path(),
              envvar="DRSUITE_REGISTRY")
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@handle_errors
def serve(registry_dir, port, host):
    """Serve the HTTP/JSON API over a model registry."""
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(registry_dir), host=host, port=port)


if __name__ == "__main__":
    main()
