"""Shared step record and tiny helpers for the domain implementations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class EnvStep:
    observation: np.ndarray
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


def new_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))
