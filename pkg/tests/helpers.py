"""Random-instance generators shared across the test modules."""

from __future__ import annotations

from energycoop import NetEnergyProfile, StorageState, SystemParams


def rand_unit_open(rng) -> float:
    """Uniform draw on (0, 1]."""
    return 1.0 - rng.uniform(0.0, 1.0)


def rand_params(rng, n_slots, alpha=None, beta=None, s_max=None,
                s_init=(0.0, 0.0)) -> SystemParams:
    a = alpha if alpha is not None else rand_unit_open(rng)
    b = beta if beta is not None else rand_unit_open(rng)
    sm = s_max if s_max is not None else rng.uniform(0.2, 3.0)
    return SystemParams(a, b, sm, n_slots, s_init)


def rand_profile(rng, n_slots, e1_range=(-3.0, 3.0), e2_range=(-3.0, 3.0),
                 ) -> NetEnergyProfile:
    e1 = rng.uniform(*e1_range, n_slots)
    e2 = rng.uniform(*e2_range, n_slots)
    return NetEnergyProfile(e1=tuple(e1), e2=tuple(e2))


def rand_state(rng, s_max) -> StorageState:
    return StorageState(rng.uniform(0.0, s_max), rng.uniform(0.0, s_max))
