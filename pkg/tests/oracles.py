"""Independent reference implementations used as test oracles.

These deliberately avoid the package's own algorithms: the admittance oracle
assembles through incidence matrices, the load-flow oracle is a Z-bus style
fixed-point iteration instead of Newton-Raphson.
"""

from __future__ import annotations

import numpy as np


def admittance_by_incidence(network) -> np.ndarray:
    """Ybus via incidence matrices: Y = Cf' diag(yff) Cf + ... (matpower style)."""
    n = network.n_bus
    nb = network.n_branch
    cf = np.zeros((nb, n))
    ct = np.zeros((nb, n))
    yff = np.zeros(nb, dtype=complex)
    yft = np.zeros(nb, dtype=complex)
    ytf = np.zeros(nb, dtype=complex)
    ytt = np.zeros(nb, dtype=complex)
    for k, br in enumerate(network.branches):
        cf[k, network.index_of(br.from_bus)] = 1.0
        ct[k, network.index_of(br.to_bus)] = 1.0
        ys = 1.0 / br.impedance
        bc = br.shunt_admittance
        tap = br.tap_ratio
        yff[k] = (ys + bc / 2) / (tap * tap)
        yft[k] = -ys / tap
        ytf[k] = -ys / tap
        ytt[k] = ys + bc / 2
    return (
        cf.T @ np.diag(yff) @ cf
        + cf.T @ np.diag(yft) @ ct
        + ct.T @ np.diag(ytf) @ cf
        + ct.T @ np.diag(ytt) @ ct
    )


def reference_loadflow(
    network,
    p_injection: np.ndarray,
    q_injection: np.ndarray,
    slack_voltage: float = 1.0,
    tol: float = 1e-12,
    max_iter: int = 2000,
) -> np.ndarray:
    """Fixed-point (implicit Z-bus) load flow; returns complex bus voltages.

    Splits Ybus into slack and non-slack blocks and iterates
    V = Ynn^-1 (conj(S/V) - Yn0 V0) until the voltage update stalls.
    """
    y_bus = admittance_by_incidence(network)
    n = network.n_bus
    slack = network.slack_index
    others = [i for i in range(n) if i != slack]
    y_nn = y_bus[np.ix_(others, others)]
    y_n0 = y_bus[others, slack]
    s = (np.asarray(p_injection) + 1j * np.asarray(q_injection))[others]
    v0 = slack_voltage + 0j

    v = np.ones(len(others), dtype=complex)
    lu = np.linalg.inv(y_nn)
    for _ in range(max_iter):
        i_inj = np.conj(s / v)
        v_new = lu @ (i_inj - y_n0 * v0)
        if np.max(np.abs(v_new - v)) < tol:
            v = v_new
            break
        v = v_new
    else:
        raise RuntimeError("reference load flow did not converge")
    full = np.empty(n, dtype=complex)
    full[slack] = v0
    full[others] = v
    return full


def two_bus_voltage(z: complex, p_load: float, q_load: float, v_slack: float = 1.0) -> complex:
    """Closed-form receiving-end voltage of a 2-bus line with a PQ load.

    Solves V (conj((V - V0)/z)) = -(P + jQ) for the complex load voltage by
    reducing to a quadratic in |V|^2.
    """
    s_load = p_load + 1j * q_load  # consumption, positive
    # V conj(I) = -S_load with I = (V - V0)/z  (current into the bus)
    # => |V|^2 - conj(V) V0 = -conj(S_load) z ... solve via |V|^2 = u substitution
    a = 1.0
    c = s_load * np.conj(z)
    # |V|^2 = u; V = (u + c) / conj(V0)  from V conj(V - V0) = -conj(S) z... derive:
    # conj(V)(V - V0) = -conj(S_load) z  =>  u - conj(V) V0 = -conj(S_load) z
    # conj(V) = (u + conj(S_load) z) / V0; |conj(V)|^2 = u:
    # |u + conj(S_load) z|^2 = u |V0|^2
    cz = np.conj(s_load) * z
    # u^2 + 2 Re(cz) u + |cz|^2 = u |V0|^2
    coeffs = [a, 2 * cz.real - abs(v_slack) ** 2, abs(cz) ** 2]
    roots = np.roots(coeffs)
    u = max(r.real for r in roots if abs(r.imag) < 1e-12)
    v_conj = (u + cz) / v_slack
    return np.conj(v_conj)
