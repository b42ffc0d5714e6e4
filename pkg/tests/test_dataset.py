import json
from datetime import date, datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drsuite.dataset import (
    Column,
    TimeStampedDataset,
    add_lagged_response,
    chronological_split,
    derive_proxy_features,
    load_csv,
    load_schema,
    write_csv,
)
from drsuite.errors import (
    InsufficientHistory,
    InvalidArgument,
    IrregularInterval,
    SchemaMismatch,
)


def make_ds(values, start=datetime(2013, 7, 15), interval=5, name="kW"):
    ts = [start + timedelta(minutes=interval * i) for i in range(len(values))]
    col = Column(name, "continuous", "response", np.array(values, dtype=float), "kW")
    return TimeStampedDataset(tuple(ts), (col,), interval)


def write_file(tmp_path, rows, header="timestamp,oat,kW"):
    f = tmp_path / "data.csv"
    f.write_text(header + "\n" + "\n".join(rows) + "\n")
    return f


SCHEMA = [
    {"name": "oat", "kind": "continuous", "role": "disturbance", "units": "degC"},
    {"name": "kW", "kind": "continuous", "role": "response", "units": "kW"},
]


class TestLoadCsv:
    def test_three_row_five_minute_file(self, tmp_path):
        f = write_file(tmp_path, [
            "2013-07-17T15:00,30.0,100.0",
            "2013-07-17T15:05,30.5,101.0",
            "2013-07-17T15:10,31.0,99.0",
        ])
        ds = load_csv(f, SCHEMA)
        assert ds.interval_minutes == 5
        assert ds.n_rows == 3
        assert ds.column("oat").values.tolist() == [30.0, 30.5, 31.0]

    def test_skipped_interval_names_row(self, tmp_path):
        f = write_file(tmp_path, [
            "2013-07-17T15:00,30.0,100.0",
            "2013-07-17T15:10,30.5,101.0",  # skips 10 minutes
            "2013-07-17T15:15,31.0,99.0",
        ])
        with pytest.raises(IrregularInterval, match="row 2"):
            load_csv(f, SCHEMA)

    def test_ashrae_style_columns(self, tmp_path):
        # temperature, wind, humidity, solar flux + WBE/CHW/HW responses
        schema = [
            {"name": n, "kind": "continuous", "role": "disturbance"}
            for n in ("temperature", "wind", "humidity", "solar_flux")
        ] + [
            {"name": n, "kind": "continuous", "role": "response"}
            for n in ("WBE", "CHW", "HW")
        ]
        header = "timestamp,temperature,wind,humidity,solar_flux,WBE,CHW,HW"
        f = write_file(tmp_path, [
            "1989-09-01T00:00,70,5,0.01,0,500,2.1,1.5",
            "1989-09-01T01:00,69,6,0.01,0,480,2.0,1.4",
        ], header=header)
        ds = load_csv(f, schema)
        assert len(ds.columns) == 7
        assert ds.columns_with_role("response") == ["WBE", "CHW", "HW"]

    def test_unknown_column(self, tmp_path):
        f = write_file(tmp_path, ["2013-07-17T15:00,1,2"], header="timestamp,bogus,kW")
        with pytest.raises(SchemaMismatch):
            load_csv(f, SCHEMA)

    def test_empty_file(self, tmp_path):
        f = tmp_path / "empty.csv"
        f.write_text("")
        from drsuite.errors import EmptyData

        with pytest.raises(EmptyData):
            load_csv(f, SCHEMA)

    def test_missing_cell_reports_row_number(self, tmp_path):
        f = write_file(tmp_path, [
            "2013-07-17T15:00,30.0,100.0",
            "2013-07-17T15:05,,101.0",
        ])
        with pytest.raises(SchemaMismatch, match=r"\[3\]"):
            load_csv(f, SCHEMA)

    def test_round_trip(self, tmp_path):
        ds = make_ds([100.0, 101.5, 99.25, 98.0 / 3.0])
        out = tmp_path / "out.csv"
        sidecar = tmp_path / "out.schema.json"
        write_csv(ds, out, sidecar)
        again = load_csv(out, load_schema(sidecar))
        np.testing.assert_allclose(again.column("kW").values,
                                   ds.column("kW").values, atol=1e-9)
        assert again.timestamps == ds.timestamps


class TestProxyFeatures:
    def test_wednesday_afternoon(self):
        ds = make_ds([1.0, 2.0], start=datetime(2013, 7, 17, 15, 0))
        out = derive_proxy_features(ds)
        assert out.column("day_of_week").values[0] == 3  # Wednesday, Monday=1
        assert out.column("time_of_day").values[0] == 900
        assert out.column("is_weekend").values[0] == 0

    def test_saturday_is_weekend(self):
        ds = make_ds([1.0], start=datetime(2013, 7, 20, 10, 0))
        out = derive_proxy_features(ds)
        assert out.column("is_weekend").values[0] == 1

    def test_holiday_flag(self):
        ds = make_ds([1.0, 2.0], start=datetime(2013, 7, 4, 9, 0))
        out = derive_proxy_features(ds, holidays={date(2013, 7, 4)})
        assert out.column("is_holiday").values[0] == 1

    def test_double_application_raises(self):
        ds = derive_proxy_features(make_ds([1.0, 2.0]))
        with pytest.raises(SchemaMismatch):
            derive_proxy_features(ds)

    def test_all_roles_are_proxy(self):
        out = derive_proxy_features(make_ds([1.0]))
        for name in ("day_of_week", "time_of_day", "is_weekend", "is_holiday"):
            assert out.column(name).role == "proxy"


class TestLaggedResponse:
    def test_delta_one(self):
        out = add_lagged_response(make_ds([1, 2, 3, 4]), "kW", 1)
        assert out.n_rows == 3
        assert out.column("lag_1").values.tolist() == [1, 2, 3]
        assert out.column("kW").values.tolist() == [2, 3, 4]

    def test_delta_two_hand_shift(self):
        out = add_lagged_response(make_ds([1, 2, 3, 4]), "kW", 2)
        assert out.n_rows == 2
        assert out.column("lag_1").values.tolist() == [2, 3]
        assert out.column("lag_2").values.tolist() == [1, 2]

    def test_delta_six_spans_thirty_minutes(self):
        out = add_lagged_response(make_ds(list(range(20))), "kW", 6)
        names = [f"lag_{j}" for j in range(1, 7)]
        assert all(n in out.column_names() for n in names)
        # six 5-minute lags cover 30 minutes of history
        assert out.interval_minutes * 6 == 30

    def test_insufficient_history(self):
        with pytest.raises(InsufficientHistory):
            add_lagged_response(make_ds([1, 2, 3]), "kW", 3)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=40),
           st.integers(1, 3))
    @settings(max_examples=50, deadline=None)
    def test_lag_values_exact(self, values, delta):
        if delta >= len(values):
            return
        out = add_lagged_response(make_ds(values), "kW", delta)
        raw = np.array(values, dtype=float)
        for j in range(1, delta + 1):
            np.testing.assert_array_equal(
                out.column(f"lag_{j}").values, raw[delta - j : len(raw) - j]
            )


class TestChronologicalSplit:
    def test_ten_rows_point_eight(self):
        train, test = chronological_split(make_ds(list(range(10))), 0.8)
        assert train.n_rows == 8 and test.n_rows == 2

    def test_empty_test_forbidden(self):
        with pytest.raises(InvalidArgument):
            chronological_split(make_ds(list(range(10))), 0.95)

    def test_sixty_days_at_five_minutes(self):
        n = 17280
        train, test = chronological_split(make_ds([float(i % 97) for i in range(n)]), 5 / 6)
        assert train.n_rows == 14400 and test.n_rows == 2880

    def test_concat_reproduces_input(self):
        ds = make_ds([float(i) for i in range(13)])
        train, test = chronological_split(ds, 0.6)
        joined = np.concatenate([train.column("kW").values, test.column("kW").values])
        np.testing.assert_array_equal(joined, ds.column("kW").values)
        assert train.timestamps + test.timestamps == ds.timestamps
