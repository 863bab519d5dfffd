"""Domain types, storage dynamics, feasibility checking and cost accounting.

Two base stations (BS 1 and BS 2) share energy over a resistive power line.
Each has a renewable source, a grid connection and a finite battery.  Per
time slot the controller picks grid draws ``w``, storage charges ``c``,
discharges ``d`` and line transfers ``x12``/``x21``.  Charging a battery
stores only ``alpha * c`` and a transfer delivers only ``beta * x`` at the
far end; both efficiencies live in [0, 1].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

DEFAULT_TOL = 1e-6

ACTION_FIELDS = ("w1", "w2", "c1", "c2", "d1", "d2", "x12", "x21")

TRAJECTORY_HEADER = ("t", "E1", "E2", "w1", "w2", "c1", "c2",
                     "d1", "d2", "x12", "x21", "s1", "s2")


class ModelError(Exception):
    """Base class for model-level failures."""


class BoundViolation(ModelError):
    """A storage level left the admissible [0, s_max] band."""


class DischargeExceedsStorage(ModelError):
    """A discharge request exceeds the currently stored energy."""


class LengthMismatch(ModelError):
    """Sequence lengths disagree with the declared horizon."""


class InvalidState(ModelError):
    """A storage state is outside its admissible range."""


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the two-BS system.

    alpha   storage efficiency (fraction surviving a charge, and applied
            symmetrically when discharged energy enters the energy balance)
    beta    transfer efficiency of the connecting power line
    s_max   per-BS storage capacity
    n_slots horizon length N
    s_init  initial storage pair, defaults to empty batteries
    """

    alpha: float
    beta: float
    s_max: float
    n_slots: int
    s_init: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if self.s_max < 0.0:
            raise ValueError(f"s_max must be >= 0, got {self.s_max}")
        if self.n_slots < 1:
            raise ValueError(f"n_slots must be >= 1, got {self.n_slots}")
        s1, s2 = self.s_init
        if not (0.0 <= s1 <= self.s_max and 0.0 <= s2 <= self.s_max):
            raise ValueError(
                f"s_init must lie in [0, s_max]^2, got {self.s_init}")

    def with_horizon(self, n_slots: int) -> "SystemParams":
        return SystemParams(self.alpha, self.beta, self.s_max,
                            n_slots, self.s_init)

    def with_s_init(self, s1: float, s2: float) -> "SystemParams":
        return SystemParams(self.alpha, self.beta, self.s_max,
                            self.n_slots, (s1, s2))


@dataclass(frozen=True)
class NetEnergyProfile:
    """Per-slot net energies for both base stations.

    ``e_i(t)`` is renewable generation minus demand; positive means surplus,
    negative means deficit.  The renewable/demand split is optional and kept
    only when the profile was built from one.
    """

    e1: tuple[float, ...]
    e2: tuple[float, ...]
    re1: tuple[float, ...] | None = None
    de1: tuple[float, ...] | None = None
    re2: tuple[float, ...] | None = None
    de2: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "e1", tuple(float(v) for v in self.e1))
        object.__setattr__(self, "e2", tuple(float(v) for v in self.e2))
        if len(self.e1) != len(self.e2):
            raise LengthMismatch(
                f"e1 has {len(self.e1)} slots, e2 has {len(self.e2)}")
        split = (self.re1, self.de1, self.re2, self.de2)
        if any(v is not None for v in split):
            if any(v is None for v in split):
                raise ValueError("re/de sequences must be given together")
            for name in ("re1", "de1", "re2", "de2"):
                seq = tuple(float(v) for v in getattr(self, name))
                object.__setattr__(self, name, seq)
                if len(seq) != len(self.e1):
                    raise LengthMismatch(f"{name} length != profile length")
                if any(v < 0.0 for v in seq):
                    raise ValueError(f"{name} must be nonnegative")
            for t in range(len(self.e1)):
                if (self.e1[t] != self.re1[t] - self.de1[t]
                        or self.e2[t] != self.re2[t] - self.de2[t]):
                    raise ValueError(f"e != re - de at slot {t}")

    @classmethod
    def from_renewable_demand(cls, re1: Sequence[float], de1: Sequence[float],
                              re2: Sequence[float], de2: Sequence[float],
                              ) -> "NetEnergyProfile":
        e1 = tuple(float(r) - float(d) for r, d in zip(re1, de1, strict=True))
        e2 = tuple(float(r) - float(d) for r, d in zip(re2, de2, strict=True))
        return cls(e1=e1, e2=e2, re1=tuple(re1), de1=tuple(de1),
                   re2=tuple(re2), de2=tuple(de2))

    @property
    def n_slots(self) -> int:
        return len(self.e1)


@dataclass(frozen=True)
class ControlAction:
    """One slot's decision tuple.

    All fields are nonnegative energies in a feasible action; validity is
    established by ``check_feasible`` rather than at construction time so
    that deliberately broken actions can still be inspected.
    """

    w1: float = 0.0
    w2: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    d1: float = 0.0
    d2: float = 0.0
    x12: float = 0.0
    x21: float = 0.0

    def as_tuple(self) -> tuple[float, ...]:
        return (self.w1, self.w2, self.c1, self.c2,
                self.d1, self.d2, self.x12, self.x21)


@dataclass(frozen=True)
class StorageState:
    """Stored energy pair (s1, s2)."""

    s1: float
    s2: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.s1, self.s2)


@dataclass(frozen=True)
class Trajectory:
    """A control policy rolled out over the horizon.

    ``states`` has one more entry than ``actions``; ``states[0]`` is the
    initial storage pair and ``states[t+1]`` results from applying
    ``actions[t]``.  ``cases`` optionally records which greedy decision rule
    produced each slot's action (debug/introspection only).
    """

    actions: tuple[ControlAction, ...]
    states: tuple[StorageState, ...]
    cases: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.states) != len(self.actions) + 1:
            raise LengthMismatch(
                f"{len(self.states)} states for {len(self.actions)} actions")
        if self.cases is not None and len(self.cases) != len(self.actions):
            raise LengthMismatch("cases length != actions length")

    @property
    def n_slots(self) -> int:
        return len(self.actions)

    @property
    def total_cost(self) -> float:
        return total_cost(self)


@dataclass(frozen=True)
class Violation:
    """One violated constraint: name, slot index and signed residual."""

    constraint: str
    slot: int
    residual: float


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def step_state(params: SystemParams, state: StorageState,
               action: ControlAction, tol: float = DEFAULT_TOL,
               ) -> StorageState:
    """Advance storage one slot: s_i' = s_i + alpha*c_i - d_i.

    Raises DischargeExceedsStorage / BoundViolation when the action drives a
    storage level outside [0, s_max] by more than ``tol``; results inside the
    tolerance band are clamped onto the bound.
    """
    if action.d1 > state.s1 + tol or action.d2 > state.s2 + tol:
        raise DischargeExceedsStorage(
            f"discharge ({action.d1}, {action.d2}) exceeds storage "
            f"({state.s1}, {state.s2})")
    out = []
    for s, c, d in ((state.s1, action.c1, action.d1),
                    (state.s2, action.c2, action.d2)):
        nxt = s + params.alpha * c - d
        if nxt < -tol or nxt > params.s_max + tol:
            raise BoundViolation(f"storage {nxt} outside [0, {params.s_max}]")
        out.append(min(max(nxt, 0.0), params.s_max))
    return StorageState(out[0], out[1])


def neutralization_residuals(params: SystemParams, e1: float, e2: float,
                             action: ControlAction) -> tuple[float, float]:
    """Per-BS energy-balance slack; nonnegative means demand is covered."""
    a, b = params.alpha, params.beta
    r1 = (e1 + action.w1 - action.c1 + a * action.d1
          - action.x12 + b * action.x21)
    r2 = (e2 + action.w2 - action.c2 + a * action.d2
          - action.x21 + b * action.x12)
    return r1, r2


def check_feasible(params: SystemParams, profile: NetEnergyProfile,
                   traj: Trajectory, tol: float = DEFAULT_TOL,
                   ) -> FeasibilityReport:
    """Check a trajectory against every model constraint.

    The report lists each violated constraint with its slot and residual
    (negative residual = amount of violation).  An empty report certifies,
    within ``tol``: nonnegative actions, d_i <= s_i, exact storage dynamics,
    storage bounds, the declared initial state, and both energy
    neutralization inequalities at every slot.
    """
    n = params.n_slots
    if profile.n_slots != n:
        raise LengthMismatch(f"profile has {profile.n_slots} slots, want {n}")
    if traj.n_slots != n:
        raise LengthMismatch(f"trajectory has {traj.n_slots} slots, want {n}")

    bad: list[Violation] = []

    def flag(name: str, slot: int, residual: float) -> None:
        if residual < -tol:
            bad.append(Violation(name, slot, residual))

    for i, (s0, si) in enumerate(zip(traj.states[0].as_tuple(),
                                     params.s_init)):
        flag(f"initial_state_s{i + 1}", 0, -abs(s0 - si))

    for t in range(n):
        act = traj.actions[t]
        s, s_next = traj.states[t], traj.states[t + 1]
        for name, val in zip(ACTION_FIELDS, act.as_tuple()):
            flag(f"nonneg_{name}", t, val)
        flag("discharge_le_storage_1", t, s.s1 - act.d1)
        flag("discharge_le_storage_2", t, s.s2 - act.d2)
        dyn1 = s_next.s1 - (s.s1 + params.alpha * act.c1 - act.d1)
        dyn2 = s_next.s2 - (s.s2 + params.alpha * act.c2 - act.d2)
        flag("dynamics_1", t, -abs(dyn1))
        flag("dynamics_2", t, -abs(dyn2))
        r1, r2 = neutralization_residuals(
            params, profile.e1[t], profile.e2[t], act)
        flag("neutralization_1", t, r1)
        flag("neutralization_2", t, r2)

    for t, s in enumerate(traj.states):
        flag("storage_lower_1", t, s.s1)
        flag("storage_lower_2", t, s.s2)
        flag("storage_upper_1", t, params.s_max - s.s1)
        flag("storage_upper_2", t, params.s_max - s.s2)

    return FeasibilityReport(tuple(bad))


def _cancel_charge_discharge(c: float, d: float, alpha: float,
                             ) -> tuple[float, float]:
    """Complementary (c', d') preserving the stored-energy delta alpha*c - d.

    Removing the overlap m = min(alpha*c, d) takes m/alpha off the charge
    and m off the discharge, so one side lands exactly on zero.  The
    balance term -c + alpha*d never decreases: cancellation returns
    m/alpha of charge draw while giving up only alpha*m of discharge
    credit, and m/alpha >= alpha*m.  With alpha = 0 a charge stores
    nothing, so it is dropped outright whenever a discharge is present.
    """
    if c <= 0.0 or d <= 0.0:
        return c, d
    if alpha <= 0.0:
        return 0.0, d
    if alpha * c >= d:
        return c - d / alpha, 0.0
    return 0.0, d - alpha * c


def normalize_action(action: ControlAction, alpha: float,
                     tol: float = DEFAULT_TOL) -> ControlAction:
    """Cancel simultaneous charge/discharge and opposing line transfers.

    The net storage change alpha*c_i - d_i and the net line flow are kept
    intact, so dynamics are untouched; each energy-balance slack can only
    grow (it is preserved exactly when the relevant efficiency is 1).  Grid
    draws are left unchanged so an optimizer's objective value survives
    normalization exactly.  Fields below -tol are rejected; solver dust in
    [-tol, 0) is snapped to zero.
    """
    fields = action.as_tuple()
    if any(v < -tol for v in fields):
        raise ValueError(f"cannot normalize a negative action: {action}")
    w1, w2, c1, c2, d1, d2, x12, x21 = (max(0.0, v) for v in fields)
    c1, d1 = _cancel_charge_discharge(c1, d1, alpha)
    c2, d2 = _cancel_charge_discharge(c2, d2, alpha)
    q = min(x12, x21)
    x12, x21 = x12 - q, x21 - q
    return ControlAction(w1, w2, c1, c2, d1, d2, x12, x21)


def total_cost(traj: Trajectory, from_slot: int = 0) -> float:
    """Grid energy drawn from ``from_slot`` to the end of the horizon."""
    if not (0 <= from_slot <= traj.n_slots):
        raise ValueError(f"from_slot {from_slot} outside [0, {traj.n_slots}]")
    return sum(a.w1 + a.w2 for a in traj.actions[from_slot:])


def save_trajectory(traj: Trajectory, profile: NetEnergyProfile,
                    path: str | Path, with_cases: bool = False) -> None:
    """Write a trajectory CSV.

    One row per slot with the slot's net energies, action and start-of-slot
    storage; a final row carries only the terminal storage.  ``with_cases``
    appends a ``case`` column when the trajectory recorded decision cases.
    """
    if profile.n_slots != traj.n_slots:
        raise LengthMismatch(
            f"profile has {profile.n_slots} slots, trajectory {traj.n_slots}")
    cases = traj.cases if (with_cases and traj.cases is not None) else None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = list(TRAJECTORY_HEADER)
        if cases is not None:
            header.append("case")
        writer.writerow(header)
        for t, act in enumerate(traj.actions):
            s = traj.states[t]
            row = [t, repr(profile.e1[t]), repr(profile.e2[t])]
            row += [repr(v) for v in act.as_tuple()]
            row += [repr(s.s1), repr(s.s2)]
            if cases is not None:
                row.append(cases[t])
            writer.writerow(row)
        final = traj.states[-1]
        row = [traj.n_slots] + [""] * 10 + [repr(final.s1), repr(final.s2)]
        if cases is not None:
            row.append("")
        writer.writerow(row)


def load_trajectory(path: str | Path,
                    ) -> tuple[NetEnergyProfile, Trajectory]:
    """Read a trajectory CSV back into (profile, trajectory)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0][:13]] != list(TRAJECTORY_HEADER):
        raise LengthMismatch(f"{path}: not a trajectory CSV")
    has_case = len(rows[0]) == 14 and rows[0][13].strip() == "case"
    body, final = rows[1:-1], rows[-1]
    e1, e2, actions, states, cases = [], [], [], [], []
    for row in body:
        vals = [float(v) for v in row[1:13]]
        e1.append(vals[0])
        e2.append(vals[1])
        actions.append(ControlAction(*vals[2:10]))
        states.append(StorageState(vals[10], vals[11]))
        if has_case:
            cases.append(row[13])
    states.append(StorageState(float(final[11]), float(final[12])))
    traj = Trajectory(tuple(actions), tuple(states),
                      tuple(cases) if has_case else None)
    return NetEnergyProfile(e1=tuple(e1), e2=tuple(e2)), traj
