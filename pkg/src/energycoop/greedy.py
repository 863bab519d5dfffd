"""Closed-form one-step greedy controller and its one-slot LP twin.

Per slot the controller minimizes the grid draw and, among equal-cost
choices, maximizes the stored-energy sum.  ``greedy_step`` does this with
closed-form case rules keyed on the signs of the two net energies and on
whether the line (efficiency beta) beats the charge/discharge round trip
(alpha squared); ``greedy_step_lp`` reaches the same cost and storage sum
by solving a single LP whose objective prices terminal storage at a rate
gamma strictly between 0 and alpha*beta, and serves as the independent
oracle in the tests.
"""

from __future__ import annotations

from .lp import LpStatus, SolverError, _ProblemBuilder, lp_solve
from .model import (
    ControlAction,
    InvalidState,
    NetEnergyProfile,
    StorageState,
    SystemParams,
    Trajectory,
    normalize_action,
)

# Net energies within this band of zero are classified as exactly zero so
# the case split is deterministic.
CASE_TOL = 1e-12

MODES = ("standard", "force_case_2a", "no_storage", "no_transfer")


class GammaOutOfRange(Exception):
    """The storage-price gamma is outside the valid open interval (0, alpha*beta)."""


def _clean(e: float) -> float:
    return 0.0 if abs(e) <= CASE_TOL else e


def _fill(alpha: float, cap: float, s: float, surplus: float,
          ) -> tuple[float, float, float]:
    """Charge as much of ``surplus`` as fits: returns (charge, new s, leftover).

    Bookkeeping is exact: a storage-limited charge lands on the cap, so
    later full/not-full tests never see rounding dust.
    """
    room = max(0.0, cap - s)
    want = room / alpha
    if want <= surplus:
        return want, cap, surplus - want
    return surplus, min(cap, s + alpha * surplus), 0.0


def _case1(alpha: float, beta: float, cap1: float, cap2: float,
           s1: float, s2: float, e1: float, e2: float):
    """Both stations in surplus: charge locally, cross-charge, curtail."""
    c1, s1, left1 = _fill(alpha, cap1, s1, e1)
    c2, s2, left2 = _fill(alpha, cap2, s2, e2)
    x12 = x21 = 0.0
    if left1 > 0.0 and s2 < cap2:
        x12 = left1
        extra, s2, _ = _fill(alpha, cap2, s2, beta * x12)
        c2 += extra
    elif left2 > 0.0 and s1 < cap1:
        x21 = left2
        extra, s1, _ = _fill(alpha, cap1, s1, beta * x21)
        c1 += extra
    return (0.0, 0.0, c1, c2, 0.0, 0.0, x12, x21, s1, s2, "1")


def _case2a(alpha: float, beta: float, cap1: float, cap2: float,
            s1: float, s2: float, e1: float, e2: float):
    """Surplus at BS 1, deficit at BS 2, line preferred: transfer first."""
    deficit = -e2
    if deficit / beta <= e1:
        # the deficit is fully covered by transfer; leftover surplus is
        # stored exactly as in the all-surplus case
        x12 = deficit / beta
        w1, w2, c1, c2, d1, d2, x12b, _, s1, s2, _ = _case1(
            alpha, beta, cap1, cap2, s1, s2, e1 - x12, 0.0)
        return (w1, w2, c1, c2, d1, d2, x12 + x12b, 0.0, s1, s2, "2A")
    x12 = e1
    rem = deficit - beta * e1  # > 0: deficit left after sending everything
    d2 = min(rem / alpha, s2)
    s2 = max(0.0, s2 - d2)
    rem -= alpha * d2
    if rem <= CASE_TOL:
        return (0.0, 0.0, 0.0, 0.0, 0.0, d2, x12, 0.0, s1, s2, "2A")
    d1 = min(rem / (alpha * beta), s1)
    s1 = max(0.0, s1 - d1)
    x12 += alpha * d1
    w2 = max(0.0, rem - alpha * beta * d1)
    return (0.0, w2, 0.0, 0.0, d1, d2, x12, 0.0, s1, s2, "2A")


def _case2b(alpha: float, beta: float, cap1: float, cap2: float,
            s1: float, s2: float, e1: float, e2: float):
    """Surplus at BS 1, deficit at BS 2, storage round trip preferred.

    BS 1 keeps as much energy in its own storage as covering the deficit
    allows.  When even the whole surplus plus BS 2's storage cannot cover
    the deficit, everything is thrown at it: full transfer, full local
    discharge, then remote discharge, then grid.
    """
    deficit = -e2
    if deficit >= beta * e1 + alpha * s2:
        d2, s2 = s2, 0.0
        rem = max(0.0, deficit - beta * e1 - alpha * d2)
        d1 = min(rem / (alpha * beta), s1)
        s1 = max(0.0, s1 - d1)
        x12 = e1 + alpha * d1
        w2 = max(0.0, rem - alpha * beta * d1)
        return (0.0, w2, 0.0, 0.0, d1, d2, x12, 0.0, s1, s2, "2B.1")
    room1 = max(0.0, cap1 - s1)
    x12 = max((deficit - alpha * s2) / beta, e1 - room1 / alpha, 0.0)
    c1 = max(0.0, e1 - x12)
    d2 = max((deficit - beta * x12) / alpha, 0.0)
    if d2 > 0.0:
        d2 = min(d2, s2)
        c2 = 0.0
    else:
        c2 = min(max(0.0, cap2 - s2) / alpha,
                 max(0.0, beta * x12 - deficit))
    s1 = min(cap1, s1 + alpha * c1)
    s2 = min(cap2, max(0.0, s2 + alpha * c2 - d2))
    return (0.0, 0.0, c1, c2, 0.0, d2, x12, 0.0, s1, s2, "2B.2")


def _mirror(result):
    """Swap the two stations' roles in a step result."""
    w1, w2, c1, c2, d1, d2, x12, x21, s1, s2, label = result
    return (w2, w1, c2, c1, d2, d1, x21, x12, s2, s1, "3" + label[1:])


def _case4(alpha: float, beta: float, cap1: float, cap2: float,
           s1: float, s2: float, e1: float, e2: float, force_2a: bool):
    """Both stations in deficit: each drains its own storage first."""
    parts = []
    for s, e in ((s1, e1), (s2, e2)):
        need = -e / alpha
        if need <= s:
            parts.append((need, s - need, 0.0))
        else:
            parts.append((s, 0.0, e + alpha * s))
    (d1, s1, e1p), (d2, s2, e2p) = parts
    if e1p < 0.0 and e2p < 0.0:
        return (-e1p, -e2p, 0.0, 0.0, d1, d2, 0.0, 0.0, s1, s2, "4")
    sub = _dispatch(alpha, beta, cap1, cap2, s1, s2, e1p, e2p, force_2a)
    w1, w2, c1, c2, d1s, d2s, x12, x21, s1, s2, label = sub
    return (w1, w2, c1, c2, d1 + d1s, d2 + d2s, x12, x21, s1, s2,
            "4-" + label)


def _dispatch(alpha: float, beta: float, cap1: float, cap2: float,
              s1: float, s2: float, e1: float, e2: float, force_2a: bool):
    e1, e2 = _clean(e1), _clean(e2)
    if e1 >= 0.0 and e2 >= 0.0:
        return _case1(alpha, beta, cap1, cap2, s1, s2, e1, e2)
    if e1 >= 0.0:
        if force_2a or beta >= alpha * alpha:
            return _case2a(alpha, beta, cap1, cap2, s1, s2, e1, e2)
        return _case2b(alpha, beta, cap1, cap2, s1, s2, e1, e2)
    if e2 >= 0.0:
        if force_2a or beta >= alpha * alpha:
            return _mirror(_case2a(alpha, beta, cap2, cap1, s2, s1, e2, e1))
        return _mirror(_case2b(alpha, beta, cap2, cap1, s2, s1, e2, e1))
    return _case4(alpha, beta, cap1, cap2, s1, s2, e1, e2, force_2a)


def _step_no_storage(beta: float, e1: float, e2: float):
    e1, e2 = _clean(e1), _clean(e2)
    w1 = w2 = x12 = x21 = 0.0
    if e1 < 0.0 and e2 < 0.0:
        w1, w2 = -e1, -e2
    elif e1 >= 0.0 > e2:
        if beta > 0.0:
            x12 = min(e1, -e2 / beta)
        w2 = max(0.0, -(e2 + beta * x12))
    elif e2 >= 0.0 > e1:
        if beta > 0.0:
            x21 = min(e2, -e1 / beta)
        w1 = max(0.0, -(e1 + beta * x21))
    return (w1, w2, 0.0, 0.0, 0.0, 0.0, x12, x21)


def _step_no_transfer(alpha: float, cap1: float, cap2: float,
                      s1: float, s2: float, e1: float, e2: float):
    out = []
    for cap, s, e in ((cap1, s1, _clean(e1)), (cap2, s2, _clean(e2))):
        w = c = d = 0.0
        if e >= 0.0:
            if alpha > 0.0:
                c, s, _ = _fill(alpha, cap, s, e)
        else:
            if alpha > 0.0:
                d = min(s, -e / alpha)
                s = max(0.0, s - d)
            w = max(0.0, -(e + alpha * d))
        out.append((w, c, d, s))
    (w1, c1, d1, s1), (w2, c2, d2, s2) = out
    return (w1, w2, c1, c2, d1, d2, 0.0, 0.0, s1, s2)


def capped_step(alpha: float, beta: float, cap1: float, cap2: float,
                s1: float, s2: float, e1: float, e2: float,
                mode: str = "standard",
                ) -> tuple[ControlAction, StorageState, str]:
    """One greedy step with independent per-station storage caps.

    The caps replace the shared capacity everywhere the decision rules
    reference it; the hybrid planner uses this to run the controller inside
    the storage head-room its offline component leaves free.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if not (-CASE_TOL <= s1 <= cap1 + CASE_TOL
            and -CASE_TOL <= s2 <= cap2 + CASE_TOL):
        raise InvalidState(
            f"storage ({s1}, {s2}) outside caps ({cap1}, {cap2})")
    s1 = min(max(s1, 0.0), cap1)
    s2 = min(max(s2, 0.0), cap2)

    if mode == "no_storage":
        fields = _step_no_storage(beta, e1, e2)
        return ControlAction(*fields), StorageState(s1, s2), "no_storage"
    if mode == "no_transfer":
        *fields, s1n, s2n = _step_no_transfer(
            alpha, cap1, cap2, s1, s2, e1, e2)
        return ControlAction(*fields), StorageState(s1n, s2n), "no_transfer"

    if alpha <= 0.0 or beta <= 0.0:
        raise ValueError(
            "standard greedy needs alpha > 0 and beta > 0; use the "
            "no_storage / no_transfer modes at the boundary")
    *fields, s1n, s2n, label = _dispatch(
        alpha, beta, cap1, cap2, s1, s2, e1, e2,
        force_2a=(mode == "force_case_2a"))
    return ControlAction(*fields), StorageState(s1n, s2n), label


def greedy_step_with_case(params: SystemParams, state: StorageState,
                          e1: float, e2: float, mode: str = "standard",
                          ) -> tuple[ControlAction, StorageState, str]:
    """Like ``greedy_step`` but also reports which decision case fired."""
    return capped_step(params.alpha, params.beta, params.s_max,
                       params.s_max, state.s1, state.s2, e1, e2, mode)


def greedy_step(params: SystemParams, state: StorageState,
                e1: float, e2: float,
                ) -> tuple[ControlAction, StorageState]:
    """Single closed-form greedy step from ``state`` under (e1, e2)."""
    action, new_state, _ = greedy_step_with_case(params, state, e1, e2)
    return action, new_state


def greedy_step_lp(params: SystemParams, state: StorageState,
                   e1: float, e2: float, gamma: float | None = None,
                   ) -> tuple[ControlAction, StorageState]:
    """One-slot LP equivalent of the greedy step.

    Minimizes (w1 + w2) - gamma * (stored energy after the slot); any gamma
    in the open interval (0, alpha*beta) makes the LP agree with the
    two-stage greedy on both the grid cost and the storage sum (individual
    storage levels may differ at ties).  Defaults to the interval midpoint.

    For extreme efficiencies (alpha**2 * beta below roughly 1e-12) the
    storage reward drops under the backend's dual tolerance and the LP may
    return an equal-cost action that stores less than the closed-form
    controller; the grid cost is unaffected.
    """
    a, b = params.alpha, params.beta
    if gamma is None:
        gamma = a * b / 2.0
    if not (0.0 < gamma < a * b):
        raise GammaOutOfRange(
            f"gamma must be in (0, {a * b}), got {gamma}")
    if not (-CASE_TOL <= state.s1 <= params.s_max + CASE_TOL
            and -CASE_TOL <= state.s2 <= params.s_max + CASE_TOL):
        raise InvalidState(f"state {state} outside [0, {params.s_max}]")

    names = ("w1", "w2", "c1", "c2", "d1", "d2", "x12", "x21")
    pb = _ProblemBuilder(8, names)
    w1, w2, c1, c2, d1, d2, x12, x21 = range(8)
    pb.objective[[w1, w2]] = 1.0
    pb.objective[[c1, c2]] = -gamma * a
    pb.objective[[d1, d2]] = gamma
    for bs, (s, c, d) in enumerate(((state.s1, c1, d1), (state.s2, c2, d2))):
        pb.add_ub({c: a, d: -1.0}, params.s_max - s, f"storage_ub{bs + 1}")
        pb.add_ub({c: -a, d: 1.0}, s, f"storage_lb{bs + 1}")
        pb.upper[d] = s
    pb.add_ub({w1: -1.0, c1: 1.0, d1: -a, x12: 1.0, x21: -b}, e1, "neutral1")
    pb.add_ub({w2: -1.0, c2: 1.0, d2: -a, x21: 1.0, x12: -b}, e2, "neutral2")

    sol = lp_solve(pb.build())
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverError(f"one-slot LP ended {sol.status.value}")
    action = normalize_action(
        ControlAction(*(max(0.0, v) for v in sol.x)), a)
    s1 = min(max(state.s1 + a * action.c1 - action.d1, 0.0), params.s_max)
    s2 = min(max(state.s2 + a * action.c2 - action.d2, 0.0), params.s_max)
    return action, StorageState(s1, s2)


def run_greedy(params: SystemParams, profile: NetEnergyProfile,
               mode: str = "standard") -> Trajectory:
    """Roll the greedy controller over the whole horizon.

    Modes: ``standard`` (the case rules as derived), ``force_case_2a``
    (transfer-first rule applied to every mixed-sign slot, optimal when one
    station is always in surplus and the other always in deficit),
    ``no_storage`` (required when alpha = 0) and ``no_transfer`` (required
    when beta = 0).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if profile.n_slots != params.n_slots:
        raise ValueError(
            f"profile has {profile.n_slots} slots, params say {params.n_slots}")
    if params.alpha == 0.0 and mode != "no_storage":
        raise ValueError("alpha = 0 requires mode='no_storage'")
    if params.beta == 0.0 and params.alpha > 0.0 and mode != "no_transfer":
        raise ValueError("beta = 0 requires mode='no_transfer'")

    state = StorageState(*params.s_init)
    actions, states, cases = [], [state], []
    for t in range(params.n_slots):
        action, state, label = greedy_step_with_case(
            params, state, profile.e1[t], profile.e2[t], mode)
        actions.append(action)
        states.append(state)
        cases.append(label)
    return Trajectory(tuple(actions), tuple(states), tuple(cases))
