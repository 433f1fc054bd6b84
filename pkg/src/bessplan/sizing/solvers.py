"""Adapters from the canonical conic form to concrete solver back-ends.

Adapters are registered by name; each takes a ConicProblem plus options and
returns a SolveResult with a normalized status.  Both shipped back-ends accept
the homogeneous form  A x + s = b, s in (Zero x Nonneg x SOC...).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import SolverError
from .conic import ConicProblem

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_LIMIT = "numerical-limit"


@dataclass(frozen=True)
class SolverOptions:
    """Back-end name and tolerances.

    Gap tolerances act on the objective scale (EUR here), feasibility on the
    per-unit constraint scale; the defaults keep epigraph slacks far below
    the 1e-6 pu audit thresholds without demanding sub-microeuro gaps.
    """

    name: str = "clarabel"
    tol_feas: float = 5e-8
    tol_gap_abs: float = 5e-8
    tol_gap_rel: float = 5e-8
    max_iter: int = 100
    verbose: bool = False


@dataclass
class SolveResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int
    solve_time: float
    solver: str
    diagnostics: list[str] = field(default_factory=list)

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def _stacked_data(problem: ConicProblem):
    """Stack equalities, inequalities and SOC blocks into one (A, b, dims)."""
    mats = [problem.A, problem.G]
    rhs = [problem.b, problem.h]
    soc_dims = []
    for block in problem.soc_blocks:
        mats.append(-block.F)
        rhs.append(block.g)
        soc_dims.append(block.dim)
    a_full = sp.vstack([m.tocsc() for m in mats], format="csc")
    b_full = np.concatenate(rhs) if rhs else np.zeros(0)
    return a_full, b_full, soc_dims


def _solve_clarabel(problem: ConicProblem, options: SolverOptions) -> SolveResult:
    import clarabel

    a_full, b_full, soc_dims = _stacked_data(problem)
    cones = []
    if problem.n_eq:
        cones.append(clarabel.ZeroConeT(problem.n_eq))
    if problem.n_ineq:
        cones.append(clarabel.NonnegativeConeT(problem.n_ineq))
    cones.extend(clarabel.SecondOrderConeT(d) for d in soc_dims)

    settings = clarabel.DefaultSettings()
    settings.verbose = options.verbose
    settings.max_iter = options.max_iter
    settings.tol_feas = options.tol_feas
    settings.tol_gap_abs = options.tol_gap_abs
    settings.tol_gap_rel = options.tol_gap_rel

    p_mat = sp.csc_matrix((problem.n_var, problem.n_var))
    try:
        solver = clarabel.DefaultSolver(p_mat, problem.c, a_full, b_full, cones, settings)
        solution = solver.solve()
    except BaseException as exc:  # the rust extension raises plain exceptions
        raise SolverError(f"clarabel failed: {exc}") from exc

    status_name = str(solution.status)
    mapping = {
        "Solved": OPTIMAL,
        "AlmostSolved": NUMERICAL_LIMIT,
        "PrimalInfeasible": INFEASIBLE,
        "AlmostPrimalInfeasible": INFEASIBLE,
        "DualInfeasible": UNBOUNDED,
        "AlmostDualInfeasible": UNBOUNDED,
    }
    status = mapping.get(status_name, NUMERICAL_LIMIT)
    x = np.asarray(solution.x) if status in (OPTIMAL, NUMERICAL_LIMIT) else None
    diagnostics = [f"clarabel status {status_name}"]
    if status_name == "AlmostSolved" and x is not None:
        # the interior point sometimes stalls a hair above the gap tolerance;
        # accept iff the returned point verifiably satisfies the constraints
        residuals = problem.residuals(x)
        if max(residuals.values()) < 1e-6:
            status = OPTIMAL
            diagnostics.append(
                "accepted reduced-accuracy point: primal residuals "
                + ", ".join(f"{k}={v:.2e}" for k, v in residuals.items())
            )
    if status == INFEASIBLE:
        diagnostics += _infeasibility_rows(problem, np.asarray(solution.z))
    return SolveResult(
        status=status,
        x=x,
        objective=problem.objective_value(x) if x is not None else None,
        iterations=int(solution.iterations),
        solve_time=float(solution.solve_time),
        solver="clarabel",
        diagnostics=diagnostics,
    )


def _solve_scs(problem: ConicProblem, options: SolverOptions) -> SolveResult:
    import scs

    a_full, b_full, soc_dims = _stacked_data(problem)
    cone = {}
    if problem.n_eq:
        cone["z"] = problem.n_eq
    if problem.n_ineq:
        cone["l"] = problem.n_ineq
    if soc_dims:
        cone["q"] = soc_dims
    data = {"A": a_full, "b": b_full, "c": problem.c}
    try:
        out = scs.solve(
            data,
            cone,
            verbose=options.verbose,
            eps_abs=options.tol_feas,
            eps_rel=options.tol_gap_rel,
            max_iters=max(options.max_iter * 500, 5000),
        )
    except BaseException as exc:
        raise SolverError(f"scs failed: {exc}") from exc

    raw = out["info"]["status"]
    mapping = {
        "solved": OPTIMAL,
        "solved (inaccurate - reached max_iters)": NUMERICAL_LIMIT,
        "infeasible": INFEASIBLE,
        "unbounded": UNBOUNDED,
    }
    status = mapping.get(raw, NUMERICAL_LIMIT)
    x = out.get("x") if status in (OPTIMAL, NUMERICAL_LIMIT) else None
    diagnostics = [f"scs status {raw}"]
    if status == INFEASIBLE and out.get("y") is not None:
        diagnostics += _infeasibility_rows(problem, np.asarray(out["y"]))
    return SolveResult(
        status=status,
        x=np.asarray(x) if x is not None else None,
        objective=problem.objective_value(np.asarray(x)) if x is not None else None,
        iterations=int(out["info"]["iter"]),
        solve_time=float(out["info"]["solve_time"]) / 1000.0,
        solver="scs",
        diagnostics=diagnostics,
    )


def _infeasibility_rows(problem: ConicProblem, dual: np.ndarray, top: int = 8) -> list[str]:
    """Name the constraint rows with the largest infeasibility-certificate duals."""
    labels = list(problem.eq_labels) + list(problem.ineq_labels)
    for block in problem.soc_blocks:
        labels += [block.label] * block.dim
    if dual is None or len(dual) != len(labels) or not labels:
        return []
    order = np.argsort(-np.abs(dual))[:top]
    out = ["largest infeasibility-certificate entries:"]
    for idx in order:
        if abs(dual[idx]) < 1e-12:
            break
        out.append(f"  {labels[idx]}  (certificate {dual[idx]:+.3e})")
    return out


ADAPTERS = {
    "clarabel": _solve_clarabel,
    "scs": _solve_scs,
}


def solve(problem: ConicProblem, options: SolverOptions | None = None) -> SolveResult:
    """Solve a ConicProblem with the adapter named in the options."""
    options = options or SolverOptions()
    try:
        adapter = ADAPTERS[options.name]
    except KeyError:
        raise SolverError(
            f"unknown solver {options.name!r}; registered: {sorted(ADAPTERS)}"
        ) from None
    try:
        return adapter(problem, options)
    except SolverError:
        raise
    except BaseException as exc:
        return SolveResult(
            status=NUMERICAL_LIMIT,
            x=None,
            objective=None,
            iterations=0,
            solve_time=0.0,
            solver=options.name,
            diagnostics=[f"back-end failure: {exc}"],
        )
