"""Sensitivity coefficients and per-hour affine grid models.

At a converged operating point, voltage magnitudes, branch current magnitudes
and the slack power flow are approximated as affine functions of the stacked
nodal injections x = [P_nonslack; Q_nonslack] and the slack voltage magnitude:

    v  = K_v  x + b_v v0 + c_v
    i  = K_i  x + d_i v0 + e_i
    [P0; Q0] = K_S x + f_S v0 + g_S

The coefficient blocks are obtained from one LU factorization of the Newton
Jacobian with one right-hand side per injection plus one for the slack
voltage; the offsets make each model exact at the linearization point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import ConvergenceError, SingularJacobianError
from .loadflow import OperatingPoint, _injection_jacobian, solve_loadflow
from .network import Network

# branches below this current carry only charging/noise-level flow; the
# magnitude is (numerically) non-differentiable there, so their sensitivity
# rows are zeroed and the branch is flagged
ZERO_CURRENT_TOL = 1e-3


@dataclass(frozen=True)
class LinearGridModel:
    """Affine grid model around one operating point (all arrays per unit)."""

    K_v: np.ndarray
    b_v: np.ndarray
    c_v: np.ndarray
    K_i: np.ndarray
    d_i: np.ndarray
    e_i: np.ndarray
    K_S: np.ndarray
    f_S: np.ndarray
    g_S: np.ndarray
    injection_buses: tuple[int, ...]
    bus_ids: tuple[int, ...]
    slack_bus: int
    zero_current_branches: tuple[int, ...]
    x_star: np.ndarray
    v0_star: float

    @property
    def n_injections(self) -> int:
        return len(self.injection_buses)

    def slack_flow_at_linearization(self) -> np.ndarray:
        """[P0, Q0] of the operating point the model was built at (exact)."""
        return self.K_S @ self.x_star + self.f_S * self.v0_star + self.g_S

    def stack_injections(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Stack full-bus injection arrays into the model's [P; Q] vector."""
        idx = [self.bus_ids.index(b) for b in self.injection_buses]
        return np.concatenate([np.asarray(p)[idx], np.asarray(q)[idx]])


def evaluate_linear(
    model: LinearGridModel,
    p_injection: np.ndarray,
    q_injection: np.ndarray,
    slack_voltage: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate the affine model; returns (v_mag, i_mag, [P0, Q0])."""
    p_injection = np.asarray(p_injection, dtype=float)
    q_injection = np.asarray(q_injection, dtype=float)
    n = len(model.bus_ids)
    if p_injection.shape != (n,) or q_injection.shape != (n,):
        raise ValueError(f"injection arrays must have shape ({n},)")
    x = model.stack_injections(p_injection, q_injection)
    v = model.K_v @ x + model.b_v * slack_voltage + model.c_v
    i = model.K_i @ x + model.d_i * slack_voltage + model.e_i
    s0 = model.K_S @ x + model.f_S * slack_voltage + model.g_S
    return v, i, s0


def compute_sensitivities(network: Network, point: OperatingPoint) -> LinearGridModel:
    """Build the affine grid model at a converged load-flow solution.

    Sensitivities are computed from the Newton Jacobian at the solution: the
    injection sensitivities are columns of its inverse, the slack-voltage
    sensitivity comes from the partial derivative of the power mismatch with
    respect to the slack magnitude.  Branch current magnitudes follow by chain
    rule from complex-current sensitivities; branches carrying (numerically)
    zero current get zero rows and are flagged, since the magnitude is not
    differentiable there.
    """
    y_bus = network.admittance()
    voltages = point.voltages
    pq = network.non_slack_indices
    m = len(pq)
    slack = network.slack_index

    ds_dva, ds_dvm = _injection_jacobian(y_bus, voltages)
    jac = np.block(
        [[ds_dva[np.ix_(pq, pq)].real, ds_dvm[np.ix_(pq, pq)].real],
         [ds_dva[np.ix_(pq, pq)].imag, ds_dvm[np.ix_(pq, pq)].imag]]
    )
    condition = np.linalg.cond(jac)
    if not np.isfinite(condition) or condition > 1e12:
        raise SingularJacobianError(
            f"{network.name}: load-flow Jacobian numerically singular "
            f"(condition estimate {condition:.3e})",
            condition,
        )

    # Right-hand sides: one column per P/Q injection, one for the slack voltage.
    # F(x; params) = S_calc - S_spec = 0, so dx/dPl = J^-1 e_l and
    # dx/dv0 = -J^-1 dF/dv0 with dF/dv0 the slack-magnitude column of dS/dVm.
    rhs = np.zeros((2 * m, 2 * m + 1))
    rhs[:, : 2 * m] = np.eye(2 * m)
    slack_col = ds_dvm[pq, slack]
    rhs[:, 2 * m] = -np.concatenate([slack_col.real, slack_col.imag])

    lu, piv = scipy.linalg.lu_factor(jac)
    solution = scipy.linalg.lu_solve((lu, piv), rhs)
    d_theta = solution[:m, :]
    d_vmag = solution[m:, :]

    # Complex voltage sensitivities for every bus and parameter.
    n = network.n_bus
    n_param = 2 * m + 1
    d_v = np.zeros((n, n_param), dtype=complex)
    phase = voltages[pq] / np.abs(voltages[pq])
    d_v[pq, :] = phase[:, None] * (d_vmag + 1j * np.abs(voltages[pq])[:, None] * d_theta)
    d_v[slack, 2 * m] = voltages[slack] / abs(voltages[slack])

    # Voltage magnitude block.
    K_v = np.zeros((n, 2 * m))
    K_v[pq, :] = d_vmag[:, : 2 * m]
    b_v = np.zeros(n)
    b_v[pq] = d_vmag[:, 2 * m]
    b_v[slack] = 1.0

    # Branch current magnitude block.
    n_br = network.n_branch
    K_i = np.zeros((n_br, 2 * m))
    d_i = np.zeros(n_br)
    zero_branches = []
    for k, br in enumerate(network.branches):
        current = point.currents[k]
        if abs(current) < ZERO_CURRENT_TOL:
            zero_branches.append(k)
            continue
        y = 1.0 / br.impedance
        f = network.index_of(br.from_bus)
        t = network.index_of(br.to_bus)
        d_current = y * (d_v[f, :] / br.tap_ratio - d_v[t, :])
        grad = (np.conj(current) * d_current).real / abs(current)
        K_i[k, :] = grad[: 2 * m]
        d_i[k] = grad[2 * m]

    # Slack power flow block: S0 = V0 (Y[0,:] V)*.
    i_slack = y_bus[slack, :] @ voltages
    d_s0 = voltages[slack] * np.conj(y_bus[slack, :] @ d_v)
    d_s0[2 * m] += d_v[slack, 2 * m] * np.conj(i_slack)
    K_S = np.vstack([d_s0[: 2 * m].real, d_s0[: 2 * m].imag])
    f_S = np.array([d_s0[2 * m].real, d_s0[2 * m].imag])

    # Offsets pin the model to the operating point.
    x_star = np.concatenate([point.p[pq], point.q[pq]])
    v0 = abs(voltages[slack])
    c_v = np.abs(voltages) - K_v @ x_star - b_v * v0
    e_i = np.abs(point.currents) - K_i @ x_star - d_i * v0
    g_S = np.array([point.p[slack], point.q[slack]]) - K_S @ x_star - f_S * v0

    return LinearGridModel(
        K_v=K_v, b_v=b_v, c_v=c_v,
        K_i=K_i, d_i=d_i, e_i=e_i,
        K_S=K_S, f_S=f_S, g_S=g_S,
        injection_buses=tuple(network.bus_ids[i] for i in pq),
        bus_ids=network.bus_ids,
        slack_bus=network.slack_bus,
        zero_current_branches=tuple(zero_branches),
        x_star=x_star,
        v0_star=v0,
    )


def linearize_horizon(
    network: Network,
    p_series: np.ndarray,
    q_series: np.ndarray,
    slack_voltage: float | np.ndarray = 1.0,
) -> list[LinearGridModel]:
    """One affine grid model per time step of a (T x n_bus) injection series."""
    p_series = np.atleast_2d(np.asarray(p_series, dtype=float))
    q_series = np.atleast_2d(np.asarray(q_series, dtype=float))
    horizon = p_series.shape[0]
    if horizon == 0:
        raise ValueError("empty linearization horizon")
    if p_series.shape != q_series.shape or p_series.shape[1] != network.n_bus:
        raise ValueError("forecast series shape must be (T, n_bus) for both P and Q")
    v0 = np.broadcast_to(np.asarray(slack_voltage, dtype=float), (horizon,))
    models = []
    for t in range(horizon):
        try:
            point = solve_loadflow(network, p_series[t], q_series[t], slack_voltage=v0[t])
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"{network.name}: load flow failed at hour {t}: {exc}", exc.mismatch, hour=t
            ) from exc
        models.append(compute_sensitivities(network, point))
    return models
