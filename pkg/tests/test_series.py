from __future__ import annotations

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bessplan.errors import DataError
from bessplan.scenarios import NodalSeries, load_series


def write_series_csv(tmp_path, frame: pd.DataFrame, name="series.csv"):
    path = tmp_path / name
    frame.to_csv(path, index=False)
    return path


def hourly_stamps(n):
    return pd.date_range("2018-01-01", periods=n, freq="h")


def test_q_derived_from_power_factor(tmp_path):
    path = write_series_csv(
        tmp_path,
        pd.DataFrame({"timestamp": hourly_stamps(24), "mv1_demand": np.full(24, 10.0)}),
    )
    schema = {
        "schema": "bessplan-series/1",
        "columns": {"mv1_demand": {"grid": "mv", "node": 1, "kind": "demand",
                                   "unit": "MW", "power_factor": 0.9}},
    }
    series = load_series(path, schema)
    assert len(series) == 1
    expected_q = 10.0 * np.tan(np.arccos(0.9))
    np.testing.assert_allclose(series[0].q, expected_q, rtol=1e-12)
    assert abs(expected_q - 4.843) < 1e-3


def test_pv_series_has_zero_q(tmp_path):
    path = write_series_csv(
        tmp_path,
        pd.DataFrame({"timestamp": hourly_stamps(48), "mv11_pv": np.linspace(0, 5, 48)}),
    )
    schema = {
        "schema": "bessplan-series/1",
        "columns": {"mv11_pv": {"grid": "mv", "node": 11, "kind": "pv", "unit": "MW"}},
    }
    series = load_series(path, schema)
    assert np.all(series[0].q == 0.0)


def test_explicit_q_column(tmp_path):
    path = write_series_csv(
        tmp_path,
        pd.DataFrame({
            "timestamp": hourly_stamps(24),
            "hv5_agg": np.full(24, 35.0),
            "hv5_agg_q": np.full(24, 30.0),
        }),
    )
    schema = {
        "schema": "bessplan-series/1",
        "columns": {
            "hv5_agg": {"grid": "hv", "node": 5, "kind": "aggregate", "unit": "MW"},
            "hv5_agg_q": {"grid": "hv", "node": 5, "kind": "aggregate",
                          "quantity": "q", "unit": "Mvar"},
        },
    }
    series = load_series(path, schema)
    np.testing.assert_allclose(series[0].q, 30.0)


def test_short_day_rejected(tmp_path):
    path = write_series_csv(
        tmp_path,
        pd.DataFrame({"timestamp": hourly_stamps(23), "mv1_demand": np.ones(23)}),
    )
    schema = {"schema": "bessplan-series/1",
              "columns": {"mv1_demand": {"grid": "mv", "node": 1, "kind": "demand", "unit": "MW"}}}
    with pytest.raises(DataError):
        load_series(path, schema)


def test_missing_column_rejected(tmp_path):
    path = write_series_csv(
        tmp_path, pd.DataFrame({"timestamp": hourly_stamps(24), "other": np.ones(24)})
    )
    schema = {"schema": "bessplan-series/1",
              "columns": {"mv1_demand": {"grid": "mv", "node": 1, "kind": "demand", "unit": "MW"}}}
    with pytest.raises(DataError):
        load_series(path, schema)


def test_nan_rejected(tmp_path):
    values = np.ones(24)
    values[3] = np.nan
    path = write_series_csv(
        tmp_path, pd.DataFrame({"timestamp": hourly_stamps(24), "mv1_demand": values})
    )
    schema = {"schema": "bessplan-series/1",
              "columns": {"mv1_demand": {"grid": "mv", "node": 1, "kind": "demand", "unit": "MW"}}}
    with pytest.raises(DataError):
        load_series(path, schema)


def test_non_hourly_stamps_rejected(tmp_path):
    stamps = pd.date_range("2018-01-01", periods=24, freq="30min")
    path = write_series_csv(
        tmp_path, pd.DataFrame({"timestamp": stamps, "mv1_demand": np.ones(24)})
    )
    schema = {"schema": "bessplan-series/1",
              "columns": {"mv1_demand": {"grid": "mv", "node": 1, "kind": "demand", "unit": "MW"}}}
    with pytest.raises(DataError):
        load_series(path, schema)


@settings(max_examples=30, deadline=None)
@given(pf=st.floats(min_value=0.3, max_value=1.0),
       p=st.floats(min_value=1e-3, max_value=500.0))
def test_power_factor_identity(pf, p):
    # derived Q must reproduce the declared power factor
    q = p * np.tan(np.arccos(pf))
    assert abs(p / np.hypot(p, q) - pf) < 1e-9


def test_nodal_series_invariants():
    with pytest.raises(DataError):
        NodalSeries(node=1, grid="mv", kind="pv", p=np.ones(24), q=np.ones(24))
    with pytest.raises(DataError):
        NodalSeries(node=1, grid="mv", kind="demand", p=np.ones(12), q=np.zeros(12))
