from __future__ import annotations

import json

import pytest

from bessplan import fixtures
from bessplan.errors import DataError
from bessplan.netmodel.netfile import load_network, save_network


def test_roundtrip(tmp_path, cigre14):
    path = tmp_path / "net.json"
    save_network(cigre14, path)
    loaded = load_network(path)
    assert loaded.name == cigre14.name
    assert loaded.bus_ids == cigre14.bus_ids
    assert loaded.n_branch == cigre14.n_branch
    assert loaded.ess_candidates == cigre14.ess_candidates
    for a, b in zip(loaded.branches, cigre14.branches):
        assert a.impedance == b.impedance
        assert a.ampacity == b.ampacity
        assert a.transformer == b.transformer


def test_unknown_schema_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"schema": "other/9", "buses": []}))
    with pytest.raises(DataError):
        load_network(path)


def test_malformed_record_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "schema": "bessplan-network/1",
        "buses": [{"id": 1, "kind": "slack", "base_kv": 110.0}],
        "lines": [{"from": 1, "to": 2}],  # missing impedance fields
    }))
    with pytest.raises(DataError):
        load_network(path)


def test_shipped_fixture_naming():
    hv = fixtures.load_fixture_network("ieee9")
    mv = fixtures.load_fixture_network("cigre14")
    assert hv.slack_bus == 1
    assert mv.slack_bus == 0
    assert len(hv.generators) == 3
    # capacities follow the benchmark: 250 / 300 / 270 MVA
    assert sorted(g.s_max_mva for g in hv.generators) == [250.0, 270.0, 300.0]
    assert set(mv.ess_candidates) == set(range(1, 15))
