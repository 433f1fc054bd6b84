"""Bus admittance matrix assembly."""

from __future__ import annotations

import numpy as np

from ..errors import StructuralError
from .network import Network


def build_admittance(network: Network) -> np.ndarray:
    """Dense complex n x n bus admittance matrix in per unit.

    Branches use the standard pi model with the off-nominal tap on the
    ``from_bus`` side:

        Y[f,f] += (y + y_sh/2) / tap**2
        Y[f,t] += -y / tap
        Y[t,f] += -y / tap
        Y[t,t] += y + y_sh/2

    Raises StructuralError for zero-impedance branches or a grid where some
    bus is not connected to the slack.
    """
    n = network.n_bus
    y_bus = np.zeros((n, n), dtype=complex)
    for br in network.branches:
        if abs(br.impedance) == 0.0:
            raise StructuralError(
                f"{network.name}: branch {br.from_bus}-{br.to_bus} has zero series impedance"
            )
        y = 1.0 / br.impedance
        y_half = br.shunt_admittance / 2.0
        f = network.index_of(br.from_bus)
        t = network.index_of(br.to_bus)
        tap = br.tap_ratio
        y_bus[f, f] += (y + y_half) / tap**2
        y_bus[t, t] += y + y_half
        y_bus[f, t] += -y / tap
        y_bus[t, f] += -y / tap
    unreached = network.unreachable_buses()
    if unreached:
        raise StructuralError(
            f"{network.name}: buses {sorted(unreached)} not connected to the slack"
        )
    return y_bus


def series_currents(network: Network, voltages: np.ndarray) -> np.ndarray:
    """Complex current through each branch's series impedance, from -> to.

    For tapped branches the current is taken on the network side of the ideal
    transformer, i.e. I = y * (V_from / tap - V_to).
    """
    currents = np.zeros(network.n_branch, dtype=complex)
    for k, br in enumerate(network.branches):
        y = 1.0 / br.impedance
        v_f = voltages[network.index_of(br.from_bus)]
        v_t = voltages[network.index_of(br.to_bus)]
        currents[k] = y * (v_f / br.tap_ratio - v_t)
    return currents
