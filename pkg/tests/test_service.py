import json

import pytest
from click.testing import CliRunner

from drsuite.cli import main
from drsuite.registry import ModelRegistry


@pytest.fixture()
def runner():
    return CliRunner()


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return json.loads(result.output.strip().splitlines()[-1])


@pytest.fixture()
def workspace(tmp_path, runner):
    """Simulated dataset + registry directory shared by pipeline tests."""
    data = tmp_path / "train.csv"
    run_ok(runner, ["simulate", "--days", "2", "--out", str(data)])
    return {"data": data, "schema": tmp_path / "train.csv.schema.json",
            "registry": tmp_path / "reg", "tmp": tmp_path}


class TestTrainAndPredict:
    def test_simulate_row_count(self, runner, tmp_path):
        out = run_ok(runner, ["simulate", "--days", "1",
                              "--out", str(tmp_path / "d.csv")])
        assert out["rows"] == 288
        assert "power" in out["columns"]

    def test_train_persists_model(self, runner, workspace):
        meta = run_ok(runner, [
            "train", "--data", str(workspace["data"]),
            "--schema", str(workspace["schema"]),
            "--model", "tree", "--out", "pt",
            "--registry", str(workspace["registry"])])
        assert meta["type"] == "tree"
        assert ModelRegistry(workspace["registry"]).names() == ["pt"]

    def test_missing_schema_exits_two(self, runner, workspace):
        result = runner.invoke(main, [
            "train", "--data", str(workspace["data"]),
            "--schema", str(workspace["tmp"] / "nope.json"),
            "--model", "tree", "--out", "pt",
            "--registry", str(workspace["registry"])])
        assert result.exit_code == 2
        err = json.loads(result.stderr.strip())
        assert err["code"] == "schema_mismatch"

    def test_predict_prints_accuracy(self, runner, workspace):
        run_ok(runner, [
            "train", "--data", str(workspace["data"]),
            "--schema", str(workspace["schema"]),
            "--model", "forest", "--out", "pf",
            "--registry", str(workspace["registry"]),
            "--hyper", _hyper(workspace["tmp"], {"n_trees": 20})])
        out = run_ok(runner, [
            "predict-baseline", "--model", "pf",
            "--registry", str(workspace["registry"]),
            "--forecast", str(workspace["data"]),
            "--schema", str(workspace["schema"])])
        assert len(out["trajectory"]) == 576
        assert out["accuracy"]["accuracy"] > 0.85  # in-sample; held-out in acceptance

    def test_unknown_model_errors(self, runner, workspace):
        result = runner.invoke(main, [
            "predict-baseline", "--model", "ghost",
            "--registry", str(workspace["registry"]),
            "--forecast", str(workspace["data"]),
            "--schema", str(workspace["schema"])])
        assert result.exit_code == 1


def _hyper(tmp_path, payload):
    p = tmp_path / f"hyper_{abs(hash(json.dumps(payload, sort_keys=True)))}.json"
    p.write_text(json.dumps(payload))
    return str(p)


def _write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


class TestSynthesize:
    @pytest.fixture()
    def mbcrt_registry(self, runner, workspace):
        run_ok(runner, [
            "train", "--data", str(workspace["data"]),
            "--schema", str(workspace["schema"]),
            "--model", "mbcrt", "--out", "ctrl",
            "--registry", str(workspace["registry"]),
            "--hyper", _hyper(workspace["tmp"], {
                "controls": ["chw_setpoint", "zone_setpoint", "lighting"],
                "disturbances": ["oat", "solar", "time_of_day", "day_of_week"],
                "zone_responses": ["zone_temp_1"]})])
        return workspace

    def test_one_hour_event_has_twelve_steps(self, runner, mbcrt_registry):
        ws = mbcrt_registry
        event = _write(ws["tmp"], "event.json", {
            "notification": "2013-07-17T13:00", "deadline": "2013-07-17T14:30",
            "start": "2013-07-17T15:00", "end": "2013-07-17T16:00",
            "recovery_end": "2013-07-17T17:00", "interval_minutes": 5})
        forecast = _write(ws["tmp"], "fc.json", {
            "forecast": [{"oat": 32.0, "solar": 0.6, "time_of_day": 900 + 5 * i,
                          "day_of_week": 3} for i in range(12)],
            "config": {"penalty": 10.0, "t_ref": [24.0]}})
        out = run_ok(runner, [
            "synthesize", "--registry", str(ws["registry"]), "--model", "ctrl",
            "--event", event, "--forecast", forecast])
        assert len(out["trace"]) == 12
        for step in out["trace"]:
            assert step["status"] in ("optimal", "infeasible_comfort")
            assert set(step["controls"]) == {
                "chw_setpoint", "zone_setpoint", "lighting"}

    def test_integer_step_event(self, runner, mbcrt_registry):
        ws = mbcrt_registry
        event = _write(ws["tmp"], "e2.json", {"n_steps": 3})
        forecast = _write(ws["tmp"], "fc2.json", {
            "forecast": [{"oat": 30.0, "solar": 0.2, "time_of_day": 600,
                          "day_of_week": 2}] * 3,
            "config": {"t_ref": [24.0]}})
        out = run_ok(runner, [
            "synthesize", "--registry", str(ws["registry"]), "--model", "ctrl",
            "--event", event, "--forecast", forecast])
        assert len(out["trace"]) == 3


class TestEvaluateStrategies:
    def test_ranking_pipeline(self, runner, workspace):
        ws = workspace
        for resp, name in [("power", "p_ar"), ("zone_temp_1", "z1_ar")]:
            run_ok(runner, [
                "train", "--data", str(ws["data"]), "--schema", str(ws["schema"]),
                "--model", "ar", "--out", name,
                "--registry", str(ws["registry"]), "--response", resp,
                "--features", "oat,solar,chw_setpoint,zone_setpoint,lighting",
                "--hyper", _hyper(ws["tmp"], {"delta": 1})])
        sdir = ws["tmp"] / "strategies"
        sdir.mkdir()
        for i, light in enumerate([0.9, 0.3]):
            _write(sdir, f"s{i}.json", {
                "name": f"s{i}", "interval_minutes": 5,
                "steps": [{"chw_setpoint": 7.0, "zone_setpoint": 24.0,
                           "lighting": light}] * 6})
        forecast = _write(ws["tmp"], "eval.json", {
            "forecast": [{"oat": 31.0, "solar": 0.5}] * 6,
            "initial_state": {"power_lags": [90.0],
                              "zone_lags": {"zone_temp_1": [24.5]}},
            "interval_minutes": 5})
        out = run_ok(runner, [
            "evaluate-strategies", "--registry", str(ws["registry"]),
            "--power-model", "p_ar", "--zone-model", "zone_temp_1=z1_ar",
            "--strategies", str(sdir), "--forecast", forecast])
        assert set(out["ranking"]) == {"s0", "s1"}
        assert out["chosen"] == out["ranking"][0]
        assert out["totals_kwh"][out["ranking"][0]] <= out["totals_kwh"][out["ranking"][1]]


class TestReport:
    def test_curtailment_and_revenue(self, runner, tmp_path):
        baseline = _write(tmp_path, "b.json", [100.0] * 12)
        actual = _write(tmp_path, "a.json", [80.0] * 12)
        tariff = _write(tmp_path, "t.json", {
            "reservation_rate": 25.0, "energy_rate": 1.0, "months": 4,
            "events_per_month": 5, "event_hours": 1.0})
        out = run_ok(runner, ["report", "--baseline", baseline,
                              "--actual", actual, "--interval", "5",
                              "--tariff", tariff])
        assert out["curtailment"]["avg_kw"] == pytest.approx(20.0)
        assert out["revenue"]["total_dollars"] == pytest.approx(
            20.0 * 25.0 * 4 + 20.0 * 1 * 5 * 4 * 1.0)
