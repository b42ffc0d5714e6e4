"""HTTP/JSON API over a model registry. Thin transport layer: every
numerical path goes through service.py, the same core the CLI uses.

Errors are {code, message, detail}: unknown model 404, schema problems 422.
Solver infeasibility is a domain outcome and comes back as 200 with a
status field. Synthesis events run server-side: instantly in "replay"
mode, on a timer in "live" mode; traces are append-only and survive
completion, so a GET after the event finishes replays the whole thing."""

from __future__ import annotations

import itertools
import json
import threading
import time

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import service
from .errors import DrSuiteError, InvalidArgument, SchemaMismatch
from .events import DrEvent
from .registry import ModelRegistry
from .serialize import model_from_json


class _EventRun:
    """One running (or finished) synthesis event; owns its sequential state."""

    def __init__(self, event_id: str, model, forecast, initial_lags, config,
                 n_steps: int, baseline, mode: str, step_seconds: float):
        self.id = event_id
        self.model = model
        self.forecast = forecast
        self.initial_lags = initial_lags
        self.config = config
        self.n_steps = n_steps
        self.baseline = baseline
        self.mode = mode
        self.step_seconds = step_seconds
        self.trace: list[dict] = []
        self.status = "running"
        self.lock = threading.Lock()

    def _run(self):
        done = 0
        config = self.config
        while done < self.n_steps:
            with self.lock:
                config = self.config
            # one-step sub-event keeps per-step config updates honest
            chunk = service.run_event(
                self.model, self.forecast[done:done + 1],
                self._lags_at(done), config, 1,
                baseline=(self.baseline[done:done + 1] if self.baseline else None))
            with self.lock:
                step = chunk[0]
                step["t"] = done
                if self.baseline and self.trace:
                    prev = self.trace[-1].get("cum_curtailment_kwh", 0.0)
                    step["cum_curtailment_kwh"] = prev + step.get(
                        "cum_curtailment_kwh", 0.0)
                self.trace.append(step)
            done += 1
            if self.mode == "live" and done < self.n_steps:
                time.sleep(self.step_seconds)
        with self.lock:
            self.status = "complete"

    def _lags_at(self, t: int) -> list[float]:
        if t == 0:
            return list(self.initial_lags)
        past = [s["kw_hat"] for s in self.trace[::-1]]
        return past + list(self.initial_lags)

    def start(self):
        if self.mode == "replay":
            self._run()
        else:
            threading.Thread(target=self._run, daemon=True).start()

    def snapshot(self) -> dict:
        with self.lock:
            return {"id": self.id, "status": self.status,
                    "n_steps": self.n_steps, "trace": list(self.trace)}


def _error(status: int, code: str, message: str, detail=None) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"code": code, "message": message,
                                 "detail": detail})


def create_app(registry_dir) -> FastAPI:
    app = FastAPI(title="drsuite service")
    registry = ModelRegistry(registry_dir)
    events: dict[str, _EventRun] = {}
    event_ids = itertools.count(1)
    events_lock = threading.Lock()

    def load_model(name: str):
        try:
            return registry.load(name)
        except KeyError:
            raise _NotFound(name) from None

    class _NotFound(Exception):
        def __init__(self, name):
            self.name = name

    @app.exception_handler(_NotFound)
    async def not_found_handler(request: Request, exc: _NotFound):
        return _error(404, "not_found", f"unknown model {exc.name!r}")

    @app.exception_handler(SchemaMismatch)
    async def schema_handler(request: Request, exc: SchemaMismatch):
        return _error(422, exc.code, str(exc))

    @app.exception_handler(DrSuiteError)
    async def domain_handler(request: Request, exc: DrSuiteError):
        return _error(422, exc.code, str(exc))

    @app.get("/models")
    def list_models():
        return registry.list_meta()

    @app.get("/models/{name}")
    def model_meta(name: str):
        try:
            meta = registry.meta(name)
            meta["model_meta"] = registry.envelope_meta(name)
            return meta
        except KeyError:
            raise _NotFound(name) from None

    @app.post("/models", status_code=201)
    async def upload_model(request: Request):
        body = await request.json()
        name = body.get("name")
        if not name:
            raise InvalidArgument("upload requires a model name")
        model = model_from_json(body["model"])
        return registry.save(name, model, metrics=body.get("metrics"),
                             schema=body.get("schema"))

    @app.post("/predict/baseline")
    async def predict_baseline(request: Request):
        body = await request.json()
        model = load_model(body["model"])
        trajectory = service.predict_rows(model, body["rows"],
                                          body.get("initial_lags"))
        return {"model": body["model"], "trajectory": trajectory}

    @app.post("/evaluate/strategies")
    async def evaluate(request: Request):
        body = await request.json()
        power_model = load_model(body["power_model"])
        zone_models = {resp: load_model(nm)
                       for resp, nm in body.get("zone_models", {}).items()}
        report = service.evaluation_from_payload(power_model, zone_models, body)
        return report.to_json()

    @app.post("/synthesize/step")
    async def synthesize_one(request: Request):
        body = await request.json()
        model = load_model(body["model"])
        config = service.synthesis_config_from_payload(body.get("config"))
        return service.synthesize_step_payload(model, body["x_d"], config)

    @app.post("/events", status_code=201)
    async def start_event(request: Request):
        body = await request.json()
        model = load_model(body["model"])
        event = body.get("event")
        n_steps = (DrEvent.from_json(event).n_steps if isinstance(event, dict)
                   else int(body.get("n_steps", event or 0)))
        forecast = body["forecast"]
        if len(forecast) < n_steps:
            raise InvalidArgument(
                f"forecast has {len(forecast)} rows for {n_steps} steps")
        config = service.synthesis_config_from_payload(body.get("config"))
        mode = body.get("mode", "replay")
        if mode not in ("replay", "live"):
            raise InvalidArgument(f"unknown mode {mode!r}")
        with events_lock:
            event_id = str(next(event_ids))
            run = _EventRun(event_id, model, forecast,
                            body.get("initial_lags", []), config, n_steps,
                            body.get("baseline"), mode,
                            float(body.get("step_seconds", 1.0)))
            events[event_id] = run
        run.start()
        return {"id": event_id, "status": run.status, "n_steps": n_steps}

    @app.get("/events/{event_id}/trace")
    def event_trace(event_id: str):
        run = events.get(event_id)
        if run is None:
            return _error(404, "not_found", f"unknown event {event_id!r}")
        return run.snapshot()

    @app.post("/events/{event_id}/config")
    async def event_config(event_id: str, request: Request):
        run = events.get(event_id)
        if run is None:
            return _error(404, "not_found", f"unknown event {event_id!r}")
        body = await request.json()
        new_config = service.synthesis_config_from_payload(body)
        with run.lock:
            run.config = new_config
            applied_from = len(run.trace)
        return {"id": event_id, "applied_from_step": applied_from}

    @app.post("/simulate/whatif")
    async def simulate_whatif(request: Request):
        body = await request.json()
        return service.whatif(body)

    return app
