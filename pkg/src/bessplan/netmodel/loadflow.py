"""Newton-Raphson AC load flow with a single slack and PQ injections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError
from .admittance import series_currents
from .network import Network


@dataclass(frozen=True)
class OperatingPoint:
    """Converged load-flow solution.

    ``voltages`` are complex bus phasors, ``currents`` complex series currents
    per branch (from -> to), ``p``/``q`` the realized net injections at every
    bus including the slack.  All per unit.
    """

    voltages: np.ndarray
    currents: np.ndarray
    p: np.ndarray
    q: np.ndarray
    slack_voltage: float
    mismatch: float
    iterations: int

    @property
    def v_mag(self) -> np.ndarray:
        return np.abs(self.voltages)

    @property
    def i_mag(self) -> np.ndarray:
        return np.abs(self.currents)


def _injection_jacobian(y_bus: np.ndarray, voltages: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """dS/d(angle), dS/d(magnitude) for complex injections S = V (Y V)*."""
    i_bus = y_bus @ voltages
    diag_v = np.diag(voltages)
    diag_i = np.diag(i_bus)
    diag_vnorm = np.diag(voltages / np.abs(voltages))
    ds_dva = 1j * diag_v @ np.conj(diag_i - y_bus @ diag_v)
    ds_dvm = diag_v @ np.conj(y_bus @ diag_vnorm) + np.conj(diag_i) @ diag_vnorm
    return ds_dva, ds_dvm


def mismatch_jacobian(y_bus: np.ndarray, voltages: np.ndarray, pq: np.ndarray) -> np.ndarray:
    """Real 2m x 2m Newton Jacobian restricted to the non-slack buses ``pq``."""
    ds_dva, ds_dvm = _injection_jacobian(y_bus, voltages)
    h = ds_dva[np.ix_(pq, pq)]
    n = ds_dvm[np.ix_(pq, pq)]
    return np.block([[h.real, n.real], [h.imag, n.imag]])


def solve_loadflow(
    network: Network,
    p_injection: np.ndarray,
    q_injection: np.ndarray,
    slack_voltage: float = 1.0,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> OperatingPoint:
    """Solve the AC load flow for given per-unit net injections.

    ``p_injection``/``q_injection`` are arrays over all buses in network order
    (generation positive, consumption negative); the slack entries are
    ignored.  Starts flat at 1.0 pu, 0 rad.
    """
    p_injection = np.asarray(p_injection, dtype=float)
    q_injection = np.asarray(q_injection, dtype=float)
    n = network.n_bus
    if p_injection.shape != (n,) or q_injection.shape != (n,):
        raise ValueError(f"injection arrays must have shape ({n},)")
    y_bus = network.admittance()
    pq = network.non_slack_indices
    s_spec = p_injection + 1j * q_injection

    voltages = np.ones(n, dtype=complex)
    voltages[network.slack_index] = slack_voltage

    mismatch = np.inf
    for iteration in range(max_iter + 1):
        s_calc = voltages * np.conj(y_bus @ voltages)
        delta = s_spec[pq] - s_calc[pq]
        mismatch = float(np.max(np.abs(np.concatenate([delta.real, delta.imag]))))
        if mismatch < tol:
            return _operating_point(network, voltages, s_calc, slack_voltage, mismatch, iteration)
        if iteration == max_iter:
            break
        jac = mismatch_jacobian(y_bus, voltages, pq)
        try:
            step = np.linalg.solve(jac, np.concatenate([delta.real, delta.imag]))
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(
                f"{network.name}: singular Jacobian at iteration {iteration}", mismatch
            ) from exc
        m = len(pq)
        angles = np.angle(voltages)
        mags = np.abs(voltages)
        angles[pq] += step[:m]
        mags[pq] += step[m:]
        if np.any(mags <= 0):
            raise ConvergenceError(
                f"{network.name}: voltage magnitude collapsed during iteration", mismatch
            )
        voltages = mags * np.exp(1j * angles)

    raise ConvergenceError(
        f"{network.name}: load flow did not converge after {max_iter} iterations "
        f"(max mismatch {mismatch:.3e} pu)",
        mismatch,
    )


def _operating_point(network, voltages, s_calc, slack_voltage, mismatch, iterations):
    return OperatingPoint(
        voltages=voltages.copy(),
        currents=series_currents(network, voltages),
        p=s_calc.real.copy(),
        q=s_calc.imag.copy(),
        slack_voltage=float(slack_voltage),
        mismatch=mismatch,
        iterations=iterations,
    )
