"""Timestamped building datasets: CSV ingestion, proxy features, lags, splits."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from datetime import date, datetime

import numpy as np

from .errors import (
    EmptyData,
    InsufficientHistory,
    InvalidArgument,
    IrregularInterval,
    SchemaMismatch,
)

ROLES = ("disturbance", "control", "proxy", "response", "lagged_response")
KINDS = ("continuous", "categorical")


@dataclass(frozen=True)
class Column:
    name: str
    kind: str = "continuous"
    role: str = "disturbance"
    values: np.ndarray = field(default_factory=lambda: np.empty(0))
    units: str = ""
    codes: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown column kind {self.kind!r}")
        if self.role not in ROLES:
            raise InvalidArgument(f"unknown column role {self.role!r}")
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.kind == "categorical":
            if self.codes is None:
                raise InvalidArgument(f"categorical column {self.name!r} needs a code set")
            bad = set(vals.tolist()) - {float(c) for c in self.codes}
            if bad:
                raise InvalidArgument(
                    f"column {self.name!r} has values {sorted(bad)} outside its code set"
                )


@dataclass(frozen=True)
class TimeStampedDataset:
    timestamps: tuple[datetime, ...]
    columns: tuple[Column, ...]
    interval_minutes: int

    def __post_init__(self):
        n = len(self.timestamps)
        if n == 0:
            raise EmptyData("dataset has no rows")
        for i in range(1, n):
            gap = (self.timestamps[i] - self.timestamps[i - 1]).total_seconds() / 60.0
            if gap != self.interval_minutes:
                raise IrregularInterval(
                    f"row {i + 1}: expected {self.interval_minutes} min spacing, got {gap:g}"
                )
        for col in self.columns:
            if len(col.values) != n:
                raise InvalidArgument(
                    f"column {col.name!r} has {len(col.values)} values for {n} rows"
                )
        if not any(c.role == "response" for c in self.columns):
            raise InvalidArgument("dataset needs at least one response column")

    @property
    def n_rows(self) -> int:
        return len(self.timestamps)

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaMismatch(f"no column named {name!r}")

    def columns_with_role(self, role: str) -> list[str]:
        return [c.name for c in self.columns if c.role == role]

    def matrix(self, names: list[str]) -> np.ndarray:
        """Design matrix (n_rows x len(names)) in the given column order."""
        return np.column_stack([self.column(n).values for n in names])

    def row(self, i: int) -> dict[str, float]:
        return {c.name: float(c.values[i]) for c in self.columns}


def _parse_timestamp(text: str) -> datetime:
    return datetime.fromisoformat(text.strip())


def load_schema(path) -> list[dict]:
    with open(path) as fh:
        entries = json.load(fh)
    if not isinstance(entries, list):
        raise SchemaMismatch("schema file must be a JSON list of column records")
    for e in entries:
        if "name" not in e:
            raise SchemaMismatch("schema entry missing 'name'")
    return entries


def load_csv(path, schema: list[dict]) -> TimeStampedDataset:
    """Read a timestamped CSV against a declared column schema.

    Schema entries: {name, kind, role, units, codes?}. The file's first
    column must be `timestamp` (ISO-8601); every other header must have a
    schema entry. Rows with missing or unparseable cells are rejected with
    their row numbers.
    """
    by_name = {e["name"]: e for e in schema}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyData(f"{path}: empty file") from None
        if not header or header[0] != "timestamp":
            raise SchemaMismatch(f"{path}: first column must be 'timestamp'")
        names = header[1:]
        for name in names:
            if name not in by_name:
                raise SchemaMismatch(f"{path}: column {name!r} not declared in schema")

        timestamps: list[datetime] = []
        data: list[list[float]] = [[] for _ in names]
        bad_rows: list[int] = []
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(names) + 1:
                bad_rows.append(rownum)
                continue
            try:
                ts = _parse_timestamp(row[0])
                vals = [float(cell) for cell in row[1:]]
            except ValueError:
                bad_rows.append(rownum)
                continue
            if any(math.isnan(v) for v in vals):
                bad_rows.append(rownum)
                continue
            timestamps.append(ts)
            for j, v in enumerate(vals):
                data[j].append(v)

    if bad_rows:
        raise SchemaMismatch(f"{path}: unparseable or missing cells in rows {bad_rows}")
    if not timestamps:
        raise EmptyData(f"{path}: no data rows")
    if len(timestamps) >= 2:
        # the smallest gap is the sampling interval; a skipped row can only
        # make a gap larger, so this pins the blame on the right row
        interval = min(
            (timestamps[i] - timestamps[i - 1]).total_seconds() / 60.0
            for i in range(1, len(timestamps))
        )
    else:
        interval = 1.0
    if interval <= 0 or interval != int(interval):
        raise IrregularInterval(f"{path}: row 2: non-positive or fractional interval {interval:g}")
    interval = int(interval)
    for i in range(1, len(timestamps)):
        gap = (timestamps[i] - timestamps[i - 1]).total_seconds() / 60.0
        if gap != interval:
            raise IrregularInterval(
                f"{path}: row {i + 1}: expected {interval} min spacing, got {gap:g}"
            )

    columns = []
    for j, name in enumerate(names):
        e = by_name[name]
        columns.append(
            Column(
                name=name,
                kind=e.get("kind", "continuous"),
                role=e.get("role", "disturbance"),
                values=np.array(data[j], dtype=float),
                units=e.get("units", ""),
                codes=tuple(e["codes"]) if e.get("codes") else None,
            )
        )
    return TimeStampedDataset(tuple(timestamps), tuple(columns), interval)


def write_csv(ds: TimeStampedDataset, path, schema_path=None):
    """Write a dataset back to CSV (and optionally its sidecar schema)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp"] + ds.column_names())
        for i, ts in enumerate(ds.timestamps):
            writer.writerow([ts.isoformat()] + [repr(float(c.values[i])) for c in ds.columns])
    if schema_path is not None:
        entries = [
            {
                "name": c.name,
                "kind": c.kind,
                "role": c.role,
                "units": c.units,
                **({"codes": list(c.codes)} if c.codes else {}),
            }
            for c in ds.columns
        ]
        with open(schema_path, "w") as fh:
            json.dump(entries, fh, indent=2)


PROXY_COLUMNS = ("day_of_week", "time_of_day", "is_weekend", "is_holiday")


def derive_proxy_features(ds: TimeStampedDataset, holidays: set[date] | None = None) -> TimeStampedDataset:
    """Append schedule proxy columns: day_of_week (Mon=1), time_of_day
    (minutes since midnight), is_weekend, is_holiday."""
    holidays = holidays or set()
    for name in PROXY_COLUMNS:
        if name in ds.column_names():
            raise SchemaMismatch(f"proxy column {name!r} already present")
    dow = np.array([ts.isoweekday() for ts in ds.timestamps], dtype=float)
    tod = np.array([ts.hour * 60 + ts.minute for ts in ds.timestamps], dtype=float)
    weekend = np.array([1.0 if ts.isoweekday() >= 6 else 0.0 for ts in ds.timestamps])
    holiday = np.array([1.0 if ts.date() in holidays else 0.0 for ts in ds.timestamps])
    new_cols = (
        Column("day_of_week", "categorical", "proxy", dow, "day", codes=tuple(range(1, 8))),
        Column("time_of_day", "continuous", "proxy", tod, "min"),
        Column("is_weekend", "categorical", "proxy", weekend, "", codes=(0, 1)),
        Column("is_holiday", "categorical", "proxy", holiday, "", codes=(0, 1)),
    )
    return TimeStampedDataset(ds.timestamps, ds.columns + new_cols, ds.interval_minutes)


def lag_names(delta: int) -> list[str]:
    return [f"lag_{j}" for j in range(1, delta + 1)]


def add_lagged_response(ds: TimeStampedDataset, response: str, delta: int) -> TimeStampedDataset:
    """Append lag_1..lag_delta of a response column; drops the first delta rows."""
    if delta < 1:
        raise InvalidArgument(f"delta must be >= 1, got {delta}")
    if delta >= ds.n_rows:
        raise InsufficientHistory(f"delta={delta} with only {ds.n_rows} rows")
    y = ds.column(response).values
    for name in lag_names(delta):
        if name in ds.column_names():
            raise SchemaMismatch(f"lag column {name!r} already present")
    cols = [replace(c, values=c.values[delta:]) for c in ds.columns]
    for j in range(1, delta + 1):
        cols.append(
            Column(f"lag_{j}", "continuous", "lagged_response", y[delta - j : len(y) - j],
                   ds.column(response).units)
        )
    return TimeStampedDataset(ds.timestamps[delta:], tuple(cols), ds.interval_minutes)


def chronological_split(ds: TimeStampedDataset, train_fraction: float):
    """Split into (train, test) preserving time order; train gets the first
    ceil(n * train_fraction) rows."""
    if not 0.0 < train_fraction < 1.0:
        raise InvalidArgument(f"train_fraction must be in (0,1), got {train_fraction}")
    n = ds.n_rows
    k = math.ceil(n * train_fraction)
    if k == 0 or k == n:
        raise InvalidArgument(f"split {train_fraction} leaves an empty half for n={n}")
    return _slice(ds, 0, k), _slice(ds, k, n)


def _slice(ds: TimeStampedDataset, lo: int, hi: int) -> TimeStampedDataset:
    cols = tuple(replace(c, values=c.values[lo:hi]) for c in ds.columns)
    return TimeStampedDataset(ds.timestamps[lo:hi], cols, ds.interval_minutes)


def from_arrays(timestamps, columns, interval_minutes) -> TimeStampedDataset:
    return TimeStampedDataset(tuple(timestamps), tuple(columns), interval_minutes)
