"""Experiment domains: gridworlds, the moving-goal bandit, and a two-link reacher.

All domains share a tiny protocol: `reset(seed) -> obs`, `step(action) ->
EnvStep`, plus `observation_size` / `action_size` / `continuous` attributes.
Rewards are sparse (exactly 1 on success, else 0) and every episode ends on
success or on the per-domain step cap.
"""

from __future__ import annotations

import re

from .gridworld import DoorKeyEnv, EmptyRoomEnv, MultiRoomEnv
from .bandit import MovingBanditEnv
from .reacher import ReacherEnv
from .base import EnvStep

_BANDIT_RE = re.compile(r"^bandit-(\d+)$")


def make(domain: str, seed=None):
    """Build a domain instance from its string id.

    Known ids: empty6, multiroom-n2s4, doorkey6, bandit-<N>, reacher.
    """
    if domain == "empty6":
        return EmptyRoomEnv(seed=seed)
    if domain == "multiroom-n2s4":
        return MultiRoomEnv(seed=seed)
    if domain == "doorkey6":
        return DoorKeyEnv(seed=seed)
    if domain == "reacher":
        return ReacherEnv(seed=seed)
    m = _BANDIT_RE.match(domain)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise ValueError(f"bandit needs at least one goal, got {domain!r}")
        return MovingBanditEnv(num_goals=n, seed=seed)
    raise ValueError(
        f"unknown domain {domain!r}; known: empty6, multiroom-n2s4, doorkey6, "
        "bandit-<N>, reacher"
    )


__all__ = [
    "make",
    "EnvStep",
    "EmptyRoomEnv",
    "MultiRoomEnv",
    "DoorKeyEnv",
    "MovingBanditEnv",
    "ReacherEnv",
]
