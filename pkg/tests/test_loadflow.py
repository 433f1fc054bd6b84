from __future__ import annotations

import numpy as np
import pytest

from bessplan.errors import ConvergenceError
from bessplan.netmodel import Branch, Bus, Network, solve_loadflow

from oracles import reference_loadflow, two_bus_voltage


def test_flat_no_load(tiny3):
    p = np.zeros(3)
    q = np.zeros(3)
    op = solve_loadflow(tiny3, p, q, slack_voltage=1.0)
    np.testing.assert_allclose(op.v_mag, 1.0, atol=1e-12)
    np.testing.assert_allclose(np.abs(op.currents), 0.0, atol=1e-12)
    assert op.mismatch < 1e-8


def test_two_bus_against_closed_form():
    z = 0.02 + 0.1j
    net = Network(
        name="twobus",
        buses=[Bus(id=1, kind="slack"), Bus(id=2, v_min=0.8, v_max=1.2)],
        branches=[Branch(from_bus=1, to_bus=2, resistance=z.real, reactance=z.imag)],
    )
    p = np.array([0.0, -0.1])
    q = np.array([0.0, -0.05])
    op = solve_loadflow(net, p, q)
    v_expected = two_bus_voltage(z, 0.1, 0.05)
    assert abs(op.voltages[1] - v_expected) < 1e-8
    assert op.mismatch < 1e-8


def test_ieee9_against_reference(ieee9, ieee9_nominal_injections):
    p, q = ieee9_nominal_injections
    op = solve_loadflow(ieee9, p, q, slack_voltage=1.0)
    v_ref = reference_loadflow(ieee9, p, q, slack_voltage=1.0)
    np.testing.assert_allclose(op.v_mag, np.abs(v_ref), atol=1e-6)
    np.testing.assert_allclose(np.angle(op.voltages), np.angle(v_ref), atol=1e-6)
    assert op.mismatch < 1e-8


def test_cigre14_against_reference(cigre14, cigre14_nominal_injections):
    p, q = cigre14_nominal_injections
    op = solve_loadflow(cigre14, p, q, slack_voltage=1.02)
    v_ref = reference_loadflow(cigre14, p, q, slack_voltage=1.02)
    np.testing.assert_allclose(op.v_mag, np.abs(v_ref), atol=1e-6)


def test_slack_absorbs_residual(ieee9, ieee9_nominal_injections):
    p, q = ieee9_nominal_injections
    op = solve_loadflow(ieee9, p, q)
    # generation must equal load plus losses; losses from branch currents
    losses = sum(
        abs(op.currents[k]) ** 2 * br.resistance for k, br in enumerate(ieee9.branches)
    )
    assert abs(op.p.sum() - losses) < 1e-7


def test_nonconvergence_reports_mismatch(tiny3):
    p = np.array([0.0, 0.0, -80.0])  # absurd load, cannot converge
    q = np.zeros(3)
    with pytest.raises(ConvergenceError) as err:
        solve_loadflow(tiny3, p, q, max_iter=8)
    assert err.value.mismatch is None or err.value.mismatch > 0
