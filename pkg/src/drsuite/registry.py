"""Named, versioned model persistence on disk. One JSON file per model:
{name, type, trained_at, metrics, model}. Reads return immutable snapshots;
saves replace the file atomically."""

from __future__ import annotations

import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from .errors import InvalidArgument
from .serialize import model_from_json, model_to_json


class ModelRegistry:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, name: str) -> Path:
        if not name or "/" in name or name.startswith("."):
            raise InvalidArgument(f"bad model name {name!r}")
        return self.root / f"{name}.json"

    def save(self, name: str, model, metrics: dict | None = None,
             schema: list | None = None) -> dict:
        envelope = model_to_json(model)
        record = {
            "name": name,
            "type": envelope["type"],
            "trained_at": datetime.now(timezone.utc).isoformat(),
            "metrics": metrics or {},
            "schema": schema or [],
            "model": envelope,
        }
        path = self._path(name)
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(record, fh)
        os.replace(tmp, path)
        return self.meta(name)

    def load(self, name: str):
        return model_from_json(self._record(name)["model"])

    def _record(self, name: str) -> dict:
        path = self._path(name)
        if not path.exists():
            raise KeyError(name)
        with open(path) as fh:
            return json.load(fh)

    def meta(self, name: str) -> dict:
        rec = self._record(name)
        return {k: rec[k] for k in ("name", "type", "trained_at", "metrics", "schema")}

    def envelope_meta(self, name: str) -> dict:
        """Family-specific metadata from the stored envelope (for mbcrt this
        carries x_safe, the control partition, and the lag order)."""
        return self._record(name)["model"].get("meta", {})

    def names(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))

    def list_meta(self) -> list[dict]:
        return [self.meta(n) for n in self.names()]
