"""Solver-agnostic conic program container and incremental builder.

Canonical form:

    minimize    c' x + offset
    subject to  A x == b
                G x <= h
                F_k x + g_k  in  SOC(d_k)   (first entry >= norm of the rest)

Every constraint row carries a human-readable label so infeasibility
diagnostics can name the offending constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import ProblemError

# objectives are assembled in MEUR: EUR-scale coefficients next to per-unit
# constraint rows destroy the interior-point equilibration
COST_SCALE = 1e-6


class LinExpr:
    """Sparse affine expression over problem variables."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: dict[int, float] | None = None, const: float = 0.0):
        self.terms = terms if terms is not None else {}
        self.const = float(const)

    def copy(self) -> "LinExpr":
        return LinExpr(dict(self.terms), self.const)

    def __add__(self, other):
        out = self.copy()
        out += other
        return out

    def __iadd__(self, other):
        if isinstance(other, LinExpr):
            for idx, coef in other.terms.items():
                self.terms[idx] = self.terms.get(idx, 0.0) + coef
            self.const += other.const
        else:
            self.const += float(other)
        return self

    def __sub__(self, other):
        return self + (other * -1.0 if isinstance(other, LinExpr) else -float(other))

    def __rsub__(self, other):
        return (self * -1.0) + float(other)

    def __radd__(self, other):
        return self + other

    def __mul__(self, scale: float):
        scale = float(scale)
        return LinExpr({i: c * scale for i, c in self.terms.items()}, self.const * scale)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def value(self, x: np.ndarray) -> float:
        return self.const + sum(x[i] * c for i, c in self.terms.items())


@dataclass
class SocBlock:
    """Affine map into a second-order cone: F x + g in SOC(dim)."""

    F: sp.csr_matrix
    g: np.ndarray
    label: str

    @property
    def dim(self) -> int:
        return len(self.g)


@dataclass
class ConicProblem:
    """Assembled canonical-form problem plus naming metadata."""

    c: np.ndarray
    objective_offset: float
    A: sp.csr_matrix
    b: np.ndarray
    G: sp.csr_matrix
    h: np.ndarray
    soc_blocks: list[SocBlock]
    var_names: dict[str, int]
    eq_labels: list[str]
    ineq_labels: list[str]
    meta: dict = field(default_factory=dict)

    @property
    def n_var(self) -> int:
        return len(self.c)

    @property
    def n_eq(self) -> int:
        return len(self.b)

    @property
    def n_ineq(self) -> int:
        return len(self.h)

    def value(self, x: np.ndarray, name: str) -> float:
        return float(x[self.var_names[name]])

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.c @ x + self.objective_offset)

    def residuals(self, x: np.ndarray) -> dict[str, float]:
        """Worst-case primal residuals of each constraint family."""
        eq = float(np.max(np.abs(self.A @ x - self.b))) if self.n_eq else 0.0
        ineq = float(np.max(self.G @ x - self.h)) if self.n_ineq else 0.0
        soc = 0.0
        for block in self.soc_blocks:
            z = block.F @ x + block.g
            soc = max(soc, float(np.linalg.norm(z[1:]) - z[0]))
        return {"eq": eq, "ineq": max(ineq, 0.0), "soc": max(soc, 0.0)}


class ProblemBuilder:
    """Accumulates variables and constraints, then emits a ConicProblem."""

    def __init__(self):
        self._names: dict[str, int] = {}
        self._eq: list[tuple[LinExpr, str]] = []
        self._ineq: list[tuple[LinExpr, str]] = []
        self._soc: list[tuple[list[LinExpr], str]] = []
        self._objective = LinExpr()
        self.meta: dict = {}

    # -- variables -----------------------------------------------------------

    def add_var(self, name: str, lower: float | None = None, upper: float | None = None) -> LinExpr:
        if name in self._names:
            raise ProblemError(f"duplicate variable name {name!r}")
        idx = len(self._names)
        self._names[name] = idx
        expr = LinExpr({idx: 1.0})
        if lower is not None:
            self.add_ge(expr, lower, f"lb[{name}]")
        if upper is not None:
            self.add_le(expr, upper, f"ub[{name}]")
        return expr

    def var_index(self, name: str) -> int:
        return self._names[name]

    @property
    def n_var(self) -> int:
        return len(self._names)

    # -- constraints ---------------------------------------------------------

    def add_eq(self, lhs: LinExpr, rhs: "LinExpr | float", label: str):
        self._eq.append((_as_expr(lhs) - rhs, label))

    def add_le(self, lhs: "LinExpr | float", rhs: "LinExpr | float", label: str):
        self._ineq.append((_as_expr(lhs) - rhs, label))

    def add_ge(self, lhs: "LinExpr | float", rhs: "LinExpr | float", label: str):
        self._ineq.append((_as_expr(rhs) - lhs, label))

    def add_soc(self, bound: "LinExpr | float", components: list[LinExpr], label: str):
        """bound >= || components ||_2."""
        self._soc.append(([_as_expr(bound), *[_as_expr(e) for e in components]], label))

    def add_objective(self, expr: "LinExpr | float"):
        self._objective += expr

    # -- assembly ------------------------------------------------------------

    def build(self, meta: dict | None = None) -> ConicProblem:
        n = self.n_var
        c = np.zeros(n)
        for idx, coef in self._objective.terms.items():
            c[idx] = coef

        a_mat, b_vec = _stack_rows([e for e, _ in self._eq], n)
        g_mat, h_vec = _stack_rows([e for e, _ in self._ineq], n)

        blocks = []
        for exprs, label in self._soc:
            f_mat, g_vec = _stack_rows(exprs, n)
            blocks.append(SocBlock(F=f_mat, g=g_vec, label=label))

        merged_meta = dict(self.meta)
        if meta:
            merged_meta.update(meta)
        return ConicProblem(
            c=c,
            objective_offset=self._objective.const,
            A=a_mat,
            b=-b_vec,
            G=g_mat,
            h=-h_vec,
            soc_blocks=blocks,
            var_names=dict(self._names),
            eq_labels=[label for _, label in self._eq],
            ineq_labels=[label for _, label in self._ineq],
            meta=merged_meta,
        )


def _as_expr(value) -> LinExpr:
    if isinstance(value, LinExpr):
        return value
    return LinExpr(const=float(value))


def _stack_rows(exprs: list[LinExpr], n_var: int):
    """Rows -> (sparse matrix of coefficients, vector of constants)."""
    data, rows, cols = [], [], []
    consts = np.zeros(len(exprs))
    for r, expr in enumerate(exprs):
        consts[r] = expr.const
        for idx, coef in expr.terms.items():
            if coef != 0.0:
                rows.append(r)
                cols.append(idx)
                data.append(coef)
    mat = sp.csr_matrix((data, (rows, cols)), shape=(len(exprs), n_var))
    return mat, consts
