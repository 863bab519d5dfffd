"""Bounded-variable linear programs and a certified solve routine.

``LpProblem`` carries a minimization objective, equality rows, upper-bound
rows and per-variable bounds.  ``lp_solve`` delegates the pivoting to
scipy's HiGHS backend (tightened to 1e-10 feasibility tolerances) and then
independently re-checks the returned point against every constraint at
1e-9; a point that fails the re-check surfaces as ``SolverError`` rather
than a wrong ``Optimal``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

FEAS_TOL = 1e-9

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
    "presolve": True,
}


class SolverError(Exception):
    """The backend failed or returned a point that fails certification."""


class LpStatus(Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LpProblem:
    """min objective . x  subject to eq rows, ub rows and box bounds.

    ``eq_constraints`` and ``ub_constraints`` are sequences of
    (coefficient row, rhs); a ub row means row . x <= rhs.  ``bounds`` holds
    one (lower, upper) pair per variable, upper may be ``math.inf``.
    ``var_labels`` / ``eq_labels`` / ``ub_labels`` are optional debug names.
    """

    objective: tuple[float, ...]
    eq_constraints: tuple[tuple[tuple[float, ...], float], ...] = ()
    ub_constraints: tuple[tuple[tuple[float, ...], float], ...] = ()
    bounds: tuple[tuple[float, float], ...] = ()
    var_labels: tuple[str, ...] = ()
    eq_labels: tuple[str, ...] = ()
    ub_labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.objective)
        bounds = self.bounds or tuple((0.0, math.inf) for _ in range(n))
        object.__setattr__(self, "bounds", bounds)
        if len(bounds) != n:
            raise ValueError(f"{len(bounds)} bounds for {n} variables")
        for lo, hi in bounds:
            if lo > hi:
                raise ValueError(f"bound lower {lo} exceeds upper {hi}")
        for rows in (self.eq_constraints, self.ub_constraints):
            for row, _ in rows:
                if len(row) != n:
                    raise ValueError(
                        f"constraint row of length {len(row)}, want {n}")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def dump(self) -> str:
        """Text rendering, one line per constraint: label, coeffs, sense, rhs."""
        lines = []
        for kind, sense, rows, labels in (
                ("eq", "=", self.eq_constraints, self.eq_labels),
                ("ub", "<=", self.ub_constraints, self.ub_labels)):
            for i, (row, rhs) in enumerate(rows):
                label = labels[i] if i < len(labels) else f"{kind}{i}"
                coeffs = " ".join(repr(float(v)) for v in row)
                lines.append(f"{label}: {coeffs} ({sense}) {float(rhs)!r}")
        return "\n".join(lines)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: tuple[float, ...] = ()
    objective_value: float = math.nan
    iterations: int = 0


class _ProblemBuilder:
    """Incremental construction helper used by the planners.

    Rows are accumulated as numpy arrays over a fixed variable space; the
    result is frozen into an ``LpProblem``.
    """

    def __init__(self, n_vars: int, var_labels: Sequence[str] = ()) -> None:
        self.n = n_vars
        self.objective = np.zeros(n_vars)
        self.lower = np.zeros(n_vars)
        self.upper = np.full(n_vars, math.inf)
        self.var_labels = tuple(var_labels)
        self._eq: list[tuple[np.ndarray, float]] = []
        self._ub: list[tuple[np.ndarray, float]] = []
        self._eq_labels: list[str] = []
        self._ub_labels: list[str] = []

    def row(self, entries: dict[int, float]) -> np.ndarray:
        r = np.zeros(self.n)
        for j, v in entries.items():
            r[j] += v
        return r

    def add_eq(self, entries: dict[int, float], rhs: float,
               label: str = "") -> None:
        self._eq.append((self.row(entries), rhs))
        self._eq_labels.append(label)

    def add_ub(self, entries: dict[int, float], rhs: float,
               label: str = "") -> None:
        self._ub.append((self.row(entries), rhs))
        self._ub_labels.append(label)

    def build(self) -> LpProblem:
        # rows stay numpy arrays (frozen); converting thousands of long
        # rows to tuples dominates planning time otherwise
        for r, _ in self._eq:
            r.setflags(write=False)
        for r, _ in self._ub:
            r.setflags(write=False)
        return LpProblem(
            objective=tuple(self.objective),
            eq_constraints=tuple(self._eq),
            ub_constraints=tuple(self._ub),
            bounds=tuple(zip(self.lower.tolist(), self.upper.tolist())),
            var_labels=self.var_labels,
            eq_labels=tuple(self._eq_labels),
            ub_labels=tuple(self._ub_labels),
        )


def _stack(rows) -> tuple[np.ndarray, np.ndarray]:
    a = np.vstack([np.asarray(row, dtype=float) for row, _ in rows])
    b = np.asarray([rhs for _, rhs in rows], dtype=float)
    return a, b


def _certify(problem: LpProblem, x: np.ndarray,
             a_eq, b_eq, a_ub, b_ub) -> None:
    """Raise SolverError unless x is primal feasible within FEAS_TOL."""
    if a_eq is not None:
        resid = np.abs(a_eq @ x - b_eq)
        worst = int(np.argmax(resid))
        if resid[worst] > FEAS_TOL:
            raise SolverError(
                f"eq constraint {worst} violated by {resid[worst]:.3e} "
                f"after solve")
    if a_ub is not None:
        resid = a_ub @ x - b_ub
        worst = int(np.argmax(resid))
        if resid[worst] > FEAS_TOL:
            raise SolverError(
                f"ub constraint {worst} violated by {resid[worst]:.3e} "
                f"after solve")
    lower = np.asarray([lo for lo, _ in problem.bounds])
    upper = np.asarray([hi for _, hi in problem.bounds])
    if np.any(x < lower - FEAS_TOL) or np.any(x > upper + FEAS_TOL):
        j = int(np.argmax(np.maximum(lower - x, x - upper)))
        raise SolverError(
            f"variable {j} = {x[j]} outside bounds after solve")


def lp_solve(problem: LpProblem) -> LpSolution:
    """Solve a bounded-variable LP; deterministic for identical inputs.

    Returns OPTIMAL with a certified feasible minimizer, or INFEASIBLE /
    UNBOUNDED.  Any other backend outcome, and any returned point failing
    the 1e-9 feasibility re-check, raises SolverError.
    """
    c = np.asarray(problem.objective, dtype=float)
    a_eq = b_eq = a_ub = b_ub = None
    if problem.eq_constraints:
        a_eq, b_eq = _stack(problem.eq_constraints)
    if problem.ub_constraints:
        a_ub, b_ub = _stack(problem.ub_constraints)

    def backend_matrix(a):
        # the planning programs are very sparse at this scale
        if a is not None and a.size > 50_000:
            return csr_matrix(a)
        return a

    res = linprog(c, A_ub=backend_matrix(a_ub), b_ub=b_ub,
                  A_eq=backend_matrix(a_eq), b_eq=b_eq,
                  bounds=list(problem.bounds), method="highs",
                  options=_HIGHS_OPTIONS)

    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED)
    if res.status != 0 or res.x is None:
        raise SolverError(f"LP backend failed: {res.message}")

    x = np.asarray(res.x, dtype=float)
    _certify(problem, x, a_eq, b_eq, a_ub, b_ub)
    return LpSolution(LpStatus.OPTIMAL, tuple(x.tolist()),
                      float(np.dot(c, x)), int(np.sum(res.nit)))
