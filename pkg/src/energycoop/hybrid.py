"""Hybrid planning: offline on the predictable part, greedy on the rest.

The net energy splits into a deterministic component known for the whole
horizon and a residual revealed causally.  An offline plan is computed once
for the deterministic component; per slot, the greedy controller then
covers whatever the realized energy leaves over, inside the storage
head-room the offline plan does not occupy.  The emitted trajectory is the
exact field-wise sum of the two components.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .greedy import capped_step
from .model import (
    ControlAction,
    LengthMismatch,
    NetEnergyProfile,
    StorageState,
    SystemParams,
    Trajectory,
    neutralization_residuals,
)
from .offline import plan_offline


@dataclass(frozen=True)
class DecomposedProfile:
    """Realized net energies together with their predictable component."""

    deterministic: NetEnergyProfile
    realized: NetEnergyProfile

    def __post_init__(self) -> None:
        if self.deterministic.n_slots != self.realized.n_slots:
            raise LengthMismatch(
                f"deterministic has {self.deterministic.n_slots} slots, "
                f"realized has {self.realized.n_slots}")

    @property
    def n_slots(self) -> int:
        return self.deterministic.n_slots

    @property
    def residual(self) -> NetEnergyProfile:
        """Realized minus deterministic, per slot."""
        e1 = tuple(r - d for r, d in zip(self.realized.e1,
                                         self.deterministic.e1))
        e2 = tuple(r - d for r, d in zip(self.realized.e2,
                                         self.deterministic.e2))
        return NetEnergyProfile(e1=e1, e2=e2)


def _residual_energy(params: SystemParams, e1: float, e2: float,
                     act: ControlAction) -> tuple[float, float]:
    """Energy left for the greedy layer once the offline action is booked.

    For BS 1 this is e1 + w1d - c1d + alpha*d1d - x12d + beta*x21d: the
    realized energy plus everything the offline action contributes to the
    slot's balance.  With zero residual noise it is exactly the offline
    plan's neutralization slack, and the combined action satisfies the
    realized-profile balance whenever the greedy layer neutralizes it.
    """
    return neutralization_residuals(params, e1, e2, act)


def residual_profile(decomposed: DecomposedProfile, offline_traj: Trajectory,
                     params: SystemParams) -> NetEnergyProfile:
    """Per-slot energies the greedy layer must neutralize."""
    if offline_traj.n_slots != decomposed.n_slots:
        raise LengthMismatch(
            f"offline trajectory has {offline_traj.n_slots} slots, "
            f"profiles have {decomposed.n_slots}")
    g1, g2 = [], []
    for t in range(decomposed.n_slots):
        r1, r2 = _residual_energy(params, decomposed.realized.e1[t],
                                  decomposed.realized.e2[t],
                                  offline_traj.actions[t])
        g1.append(r1)
        g2.append(r2)
    return NetEnergyProfile(e1=tuple(g1), e2=tuple(g2))


@dataclass(frozen=True)
class HybridResult:
    """Combined trajectory plus the two components for inspection.

    ``greedy_profile`` is the residual energy the greedy layer actually
    saw, including any energy recovered by forced releases (see
    ``run_hybrid_stream``); the greedy component is feasible against it
    under the per-slot caps.
    """

    combined: Trajectory
    offline: Trajectory
    greedy: Trajectory
    greedy_profile: NetEnergyProfile


def run_hybrid_stream(params: SystemParams,
                      deterministic: NetEnergyProfile,
                      realized_slots: Iterable[tuple[float, float]],
                      offline_traj: Trajectory | None = None,
                      ) -> HybridResult:
    """Run the hybrid policy consuming realized energies slot by slot.

    ``realized_slots`` is only ever advanced one slot at a time and never
    ahead of the slot being decided, so feeding a live source is safe.  The
    greedy layer at slot t runs under per-station caps equal to the storage
    head-room the offline plan leaves after the slot; when an offline
    charge shrinks a cap below the greedy layer's carried storage, the
    overhang is released as a forced discharge whose recovered energy
    (alpha per unit) is credited to the slot's residual.
    """
    n = params.n_slots
    if deterministic.n_slots != n:
        raise LengthMismatch(
            f"deterministic profile has {deterministic.n_slots} slots, "
            f"params say {n}")
    if offline_traj is None:
        offline_traj = plan_offline(params, deterministic)

    g_state = StorageState(0.0, 0.0)
    g_actions, g_states, g_energies, cases = [], [g_state], [], []
    combined_actions, combined_states = [], []
    combined_states.append(StorageState(
        offline_traj.states[0].s1 + g_state.s1,
        offline_traj.states[0].s2 + g_state.s2))

    it: Iterator[tuple[float, float]] = iter(realized_slots)
    for t in range(n):
        try:
            e1, e2 = next(it)
        except StopIteration:
            raise LengthMismatch(
                f"realized energies ended at slot {t}, want {n}") from None
        act_d = offline_traj.actions[t]
        g1, g2 = _residual_energy(params, e1, e2, act_d)

        s_d_next = offline_traj.states[t + 1]
        cap1 = max(0.0, params.s_max - s_d_next.s1)
        cap2 = max(0.0, params.s_max - s_d_next.s2)
        q1 = max(0.0, g_state.s1 - cap1)
        q2 = max(0.0, g_state.s2 - cap2)
        g1 += params.alpha * q1
        g2 += params.alpha * q2

        act_g, g_state, label = capped_step(
            params.alpha, params.beta, cap1, cap2,
            g_state.s1 - q1, g_state.s2 - q2, g1, g2)
        act_g = ControlAction(
            act_g.w1, act_g.w2, act_g.c1, act_g.c2,
            act_g.d1 + q1, act_g.d2 + q2, act_g.x12, act_g.x21)

        g_actions.append(act_g)
        g_states.append(g_state)
        g_energies.append((g1, g2))
        cases.append(label)

        combined_actions.append(ControlAction(*(
            vd + vg for vd, vg in zip(act_d.as_tuple(), act_g.as_tuple()))))
        combined_states.append(StorageState(
            s_d_next.s1 + g_state.s1, s_d_next.s2 + g_state.s2))

    combined = Trajectory(tuple(combined_actions), tuple(combined_states),
                          tuple(cases))
    greedy_traj = Trajectory(tuple(g_actions), tuple(g_states), tuple(cases))
    greedy_profile = NetEnergyProfile(
        e1=tuple(g1 for g1, _ in g_energies),
        e2=tuple(g2 for _, g2 in g_energies))
    return HybridResult(combined, offline_traj, greedy_traj, greedy_profile)


def run_hybrid(params: SystemParams, decomposed: DecomposedProfile,
               ) -> Trajectory:
    """Hybrid policy over a decomposed profile; returns the combined plan."""
    result = run_hybrid_stream(
        params, decomposed.deterministic,
        zip(decomposed.realized.e1, decomposed.realized.e2))
    return result.combined
