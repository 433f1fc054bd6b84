"""Affine grid-constraint rows shared by the day-ahead and sizing problems."""

from __future__ import annotations

import numpy as np

from ..netmodel.network import Network
from ..netmodel.sensitivity import LinearGridModel
from .conic import LinExpr, ProblemBuilder


def dot(coefs: np.ndarray, exprs: list) -> LinExpr:
    """Dense coefficient row times a list of LinExpr-or-float entries."""
    terms: dict[int, float] = {}
    const = 0.0
    for coef, entry in zip(coefs, exprs):
        if coef == 0.0:
            continue
        if isinstance(entry, LinExpr):
            const += coef * entry.const
            for idx, val in entry.terms.items():
                terms[idx] = terms.get(idx, 0.0) + coef * val
        else:
            const += coef * float(entry)
    return LinExpr(terms, const)


class GridHour:
    """One grid at one hour: injection expressions against one affine model."""

    def __init__(self, network: Network, model: LinearGridModel,
                 p_exprs: list, q_exprs: list, v0):
        self.network = network
        self.model = model
        inj_pos = [network.index_of(b) for b in model.injection_buses]
        self.x_exprs = [p_exprs[i] for i in inj_pos] + [q_exprs[i] for i in inj_pos]
        self.v0 = v0

    def _affine(self, row: np.ndarray, v0_coef: float, offset: float) -> LinExpr:
        expr = dot(row, self.x_exprs)
        if v0_coef != 0.0:
            expr += v0_coef * self.v0 if isinstance(self.v0, LinExpr) else v0_coef * float(self.v0)
        expr += offset
        return expr

    def voltage(self, bus_pos: int) -> LinExpr:
        m = self.model
        return self._affine(m.K_v[bus_pos], m.b_v[bus_pos], m.c_v[bus_pos])

    def current(self, branch_pos: int) -> LinExpr:
        m = self.model
        return self._affine(m.K_i[branch_pos], m.d_i[branch_pos], m.e_i[branch_pos])

    def slack_p(self) -> LinExpr:
        m = self.model
        return self._affine(m.K_S[0], m.f_S[0], m.g_S[0])

    def slack_q(self) -> LinExpr:
        m = self.model
        return self._affine(m.K_S[1], m.f_S[1], m.g_S[1])

    def add_voltage_limits(self, builder: ProblemBuilder, lo: np.ndarray, hi: np.ndarray,
                           tag: str):
        for pos in range(self.network.n_bus):
            v = self.voltage(pos)
            bus = self.network.buses[pos].id
            builder.add_ge(v, lo[pos], f"vmin[{tag}][{bus}]")
            builder.add_le(v, hi[pos], f"vmax[{tag}][{bus}]")

    def add_ampacity_limits(self, builder: ProblemBuilder, scale: float, tag: str):
        for pos, br in enumerate(self.network.branches):
            builder.add_le(
                self.current(pos),
                br.ampacity * scale,
                f"ampacity[{tag}][{br.from_bus}-{br.to_bus}]",
            )


def add_generator_capability(builder: ProblemBuilder, p_expr, q_expr, gen, s_base: float,
                             tag: str):
    """Apparent-power cone, reactive ratio band, and active limits for one plant."""
    s_max = gen.s_max_mva / s_base
    builder.add_soc(LinExpr(const=s_max), [p_expr, q_expr], f"gen_smax[{tag}]")
    builder.add_le(q_expr, gen.q_ratio * p_expr, f"gen_qmax[{tag}]")
    builder.add_ge(q_expr, -gen.q_ratio * p_expr, f"gen_qmin[{tag}]")
    builder.add_ge(p_expr, gen.p_min_mw / s_base, f"gen_pmin[{tag}]")
    builder.add_le(p_expr, gen.p_max_mw / s_base, f"gen_pmax[{tag}]")
