"""Linear programs, a HiGHS-backed solver, and a cutting-plane driver.

Constraints are stored sparsely (index -> coefficient); the desk-scale
persuasion LPs have thousands of rows touching only a handful of variables
each.  Dual multipliers follow the sensitivity convention in the problem's
own sense: duals[r] = d(objective)/d(rhs of row r).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import SolverError

logger = logging.getLogger(__name__)

OPTIMALITY_TOL = 1e-7
CUT_VIOLATION_TOL = 1e-7

RELATIONS = ("<=", ">=", "==")


@dataclass
class Constraint:
    """One linear row: sum of coeffs[j] * x_j  <relation>  rhs."""

    coeffs: dict[int, float]
    relation: str
    rhs: float
    tag: object = None

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")

    def violation(self, x: np.ndarray) -> float:
        """How far x is on the wrong side (0 when satisfied)."""
        lhs = sum(c * x[j] for j, c in self.coeffs.items())
        if self.relation == "<=":
            return max(0.0, lhs - self.rhs)
        if self.relation == ">=":
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


class LinearProgram:
    """Dense-interface LP: objective, rows, per-variable bounds."""

    def __init__(self, num_vars: int, sense: str = "max", objective=None):
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self.num_vars = num_vars
        self.sense = sense
        self.objective = np.zeros(num_vars)
        if objective is not None:
            self.set_objective(objective)
        self.rows: list[Constraint] = []
        # (lower, upper); None encodes the corresponding infinity
        self.bounds: list[tuple[Optional[float], Optional[float]]] = [
            (0.0, None) for _ in range(num_vars)
        ]

    def set_objective(self, coeffs) -> None:
        arr = np.asarray(coeffs, dtype=float)
        if arr.shape != (self.num_vars,):
            raise ValueError(f"objective must have {self.num_vars} coefficients")
        if not np.all(np.isfinite(arr)):
            raise ValueError("objective coefficients must be finite")
        self.objective = arr

    def set_bounds(self, j: int, lower: Optional[float], upper: Optional[float]) -> None:
        self.bounds[j] = (lower, upper)

    def add_constraint(
        self,
        coeffs: Mapping[int, float] | Sequence[float],
        relation: str,
        rhs: float,
        tag: object = None,
    ) -> Constraint:
        if isinstance(coeffs, Mapping):
            row = {int(j): float(c) for j, c in coeffs.items() if c != 0.0}
        else:
            row = {j: float(c) for j, c in enumerate(coeffs) if c != 0.0}
        if row and max(row) >= self.num_vars:
            raise ValueError("constraint references an unknown variable")
        if not all(np.isfinite(list(row.values()))) or not np.isfinite(rhs):
            raise ValueError("constraint coefficients must be finite")
        con = Constraint(row, relation, float(rhs), tag)
        self.rows.append(con)
        return con

    def dump(self) -> str:
        """Plain-text rendering (variables v0..vk, one constraint per line)."""
        terms = " + ".join(
            f"{c:g} v{j}" for j, c in enumerate(self.objective) if c != 0.0
        )
        lines = [f"{self.sense} {terms or '0'}"]
        for con in self.rows:
            lhs = " + ".join(f"{c:g} v{j}" for j, c in sorted(con.coeffs.items()))
            lines.append(f"  {lhs or '0'} {con.relation} {con.rhs:g}")
        for j, (lo, hi) in enumerate(self.bounds):
            lines.append(f"  {'-inf' if lo is None else f'{lo:g}'} <= v{j} <= "
                         f"{'+inf' if hi is None else f'{hi:g}'}")
        return "\n".join(lines)


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded | round-limit | numerical_failure
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    duals: Optional[np.ndarray] = None
    lower_duals: Optional[np.ndarray] = None
    upper_duals: Optional[np.ndarray] = None
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


_STATUS_MAP = {0: "optimal", 2: "infeasible", 3: "unbounded"}


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve with HiGHS; numerical trouble maps to a distinct status."""
    sign = 1.0 if lp.sense == "min" else -1.0
    c = sign * lp.objective

    ub_rows, ub_rhs, ub_sign, eq_rows, eq_rhs = [], [], [], [], []
    row_slot: list[tuple[str, int]] = []
    for con in lp.rows:
        if con.relation == "==":
            row_slot.append(("eq", len(eq_rows)))
            eq_rows.append(con.coeffs)
            eq_rhs.append(con.rhs)
        elif con.relation == "<=":
            row_slot.append(("ub", len(ub_rows)))
            ub_rows.append(con.coeffs)
            ub_rhs.append(con.rhs)
            ub_sign.append(1.0)
        else:
            row_slot.append(("ub", len(ub_rows)))
            ub_rows.append({j: -v for j, v in con.coeffs.items()})
            ub_rhs.append(-con.rhs)
            ub_sign.append(-1.0)

    def assemble(rows):
        data, ri, ci = [], [], []
        for r, coeffs in enumerate(rows):
            for j, v in coeffs.items():
                ri.append(r)
                ci.append(j)
                data.append(v)
        return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), lp.num_vars))

    kwargs = {}
    if ub_rows:
        kwargs["A_ub"] = assemble(ub_rows)
        kwargs["b_ub"] = np.array(ub_rhs)
    if eq_rows:
        kwargs["A_eq"] = assemble(eq_rows)
        kwargs["b_eq"] = np.array(eq_rhs)

    try:
        res = linprog(c, bounds=lp.bounds, method="highs", **kwargs)
    except Exception as exc:  # malformed input surfaces as a solver error
        raise SolverError(f"LP backend raised: {exc}") from exc

    status = _STATUS_MAP.get(res.status)
    if status is None:
        return LpSolution(status="numerical_failure", message=res.message)
    if status != "optimal":
        return LpSolution(status=status, message=res.message)

    # sensitivities in the user's sense: flip the max negation and the
    # >=-to-<= row negation back
    duals = np.zeros(len(lp.rows))
    for r, (kind, pos) in enumerate(row_slot):
        if kind == "eq":
            duals[r] = sign * res.eqlin.marginals[pos]
        else:
            duals[r] = sign * ub_sign[pos] * res.ineqlin.marginals[pos]
    return LpSolution(
        status="optimal",
        x=np.asarray(res.x),
        objective=float(sign * res.fun),
        duals=duals,
        lower_duals=sign * np.asarray(res.lower.marginals),
        upper_duals=sign * np.asarray(res.upper.marginals),
    )


def solve_small_dense(
    c: np.ndarray,
    A_ub: Optional[np.ndarray],
    b_ub: Optional[np.ndarray],
    A_eq: Optional[np.ndarray],
    b_eq: Optional[np.ndarray],
    bounds,
) -> tuple[str, Optional[np.ndarray], Optional[float]]:
    """Minimal-overhead lane for the many tiny dense LPs (minimization).

    Same backend as solve_lp but skips row bookkeeping and dual extraction;
    geometry probes call this thousands of times.
    """
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options={"presolve": False, "disp": False},
    )
    status = _STATUS_MAP.get(res.status, "numerical_failure")
    if status != "optimal":
        return status, None, None
    return status, np.asarray(res.x), float(res.fun)


def duality_gap(lp: LinearProgram, sol: LpSolution) -> float:
    """|primal objective - dual objective| assembled from the multipliers."""
    if not sol.is_optimal:
        raise ValueError("duality gap is defined for optimal solutions only")
    dual_obj = sum(y * con.rhs for y, con in zip(sol.duals, lp.rows))
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            dual_obj += sol.lower_duals[j] * lo
        if hi is not None:
            dual_obj += sol.upper_duals[j] * hi
    return abs(sol.objective - dual_obj)


# A separation oracle maps a candidate point to violated constraints
# (empty list = feasible).  Each returned cut must be violated by at least
# CUT_VIOLATION_TOL at the queried point.
SeparationOracle = Callable[[np.ndarray], list[Constraint]]


def default_max_rounds(lp: LinearProgram) -> int:
    return 10 * (lp.num_vars + 100)


def solve_with_cuts(
    base: LinearProgram,
    oracle: SeparationOracle,
    max_rounds: Optional[int] = None,
) -> tuple[LpSolution, list[Constraint]]:
    """Row generation: solve the relaxation, add violated cuts, repeat.

    Cuts accumulate in `base` and are never removed, so for min problems the
    relaxation optima are nondecreasing.  Returns the final solution (status
    'round-limit' if the cap was hit with cuts still outstanding) and the
    generated cuts.
    """
    if max_rounds is None:
        max_rounds = default_max_rounds(base)
    generated: list[Constraint] = []
    sol = LpSolution(status="numerical_failure", message="no rounds run")
    for round_idx in range(max_rounds):
        sol = solve_lp(base)
        if not sol.is_optimal:
            return sol, generated
        added = 0
        for cut in oracle(sol.x):
            violation = cut.violation(sol.x)
            if violation < CUT_VIOLATION_TOL:
                logger.debug("dropping sub-tolerance cut (violation %.2e)", violation)
                continue
            base.rows.append(cut)
            generated.append(cut)
            added += 1
        if added == 0:
            logger.debug("cut loop converged after %d rounds", round_idx + 1)
            return sol, generated
    return replace(sol, status="round-limit"), generated
