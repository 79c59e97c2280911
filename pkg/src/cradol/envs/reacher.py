"""Kinematic two-link reacher with a sparse fingertip-on-target reward.

Explicit Euler joint dynamics with unit inertia and light velocity damping;
torques live in [-1, 1]^2. Link lengths follow the classic simulated arm
(0.1 and 0.11) so the 0.003 success radius covers a realistic slice of the
workspace. Observations pack normalized joint angles, clamped normalized
joint velocities, and the episode's target position.
"""

from __future__ import annotations

import numpy as np

from .base import EnvStep, new_rng

LINK1 = 0.1
LINK2 = 0.11
REACH = LINK1 + LINK2
DT = 0.02
DAMPING = 0.99
TORQUE_SCALE = 1.0
SUCCESS_RADIUS = 0.003
MAX_STEPS = 200
VEL_CLAMP = 2.0  # steady-state |omega| under max torque is dt/(1-damping)
TARGET_RADII = (0.05, 0.2)


class ReacherEnv:
    observation_size = 6
    action_size = 2
    continuous = True
    max_steps = MAX_STEPS

    def __init__(self, seed=None, damping=DAMPING):
        self._rng = new_rng(seed)
        self.damping = float(damping)
        self.angles = np.zeros(2)
        self.velocities = np.zeros(2)
        self.target = np.zeros(2)
        self.steps = 0
        self.done = True

    def reset(self, seed=None) -> np.ndarray:
        if seed is not None:
            self._rng = new_rng(seed)
        self.angles = self._rng.uniform(-np.pi, np.pi, 2)
        self.velocities = self._rng.uniform(-0.5, 0.5, 2)
        # uniform over the annulus by area
        r = np.sqrt(self._rng.uniform(TARGET_RADII[0] ** 2, TARGET_RADII[1] ** 2))
        phi = self._rng.uniform(-np.pi, np.pi)
        self.target = np.array([r * np.cos(phi), r * np.sin(phi)])
        self.steps = 0
        self.done = False
        return self._observe()

    def fingertip(self) -> np.ndarray:
        t1 = self.angles[0]
        t12 = self.angles[0] + self.angles[1]
        return np.array(
            [LINK1 * np.cos(t1) + LINK2 * np.cos(t12), LINK1 * np.sin(t1) + LINK2 * np.sin(t12)]
        )

    def step(self, action) -> EnvStep:
        if self.done:
            raise RuntimeError("episode is done; call reset() first")
        torque = np.clip(np.asarray(action, dtype=np.float64).reshape(2), -1.0, 1.0)
        self.velocities = self.damping * self.velocities + TORQUE_SCALE * torque * DT
        self.angles = self.angles + self.velocities * DT
        self.steps += 1
        dist = float(np.linalg.norm(self.fingertip() - self.target))
        success = dist < SUCCESS_RADIUS
        reward = 1.0 if success else 0.0
        self.done = success or self.steps >= self.max_steps
        return EnvStep(
            observation=self._observe(),
            reward=reward,
            done=self.done,
            info={"step": self.steps, "success": success, "distance": dist},
        )

    def _observe(self) -> np.ndarray:
        ang = np.mod(self.angles, 2.0 * np.pi) / (2.0 * np.pi)
        vel = (np.clip(self.velocities, -VEL_CLAMP, VEL_CLAMP) + VEL_CLAMP) / (2.0 * VEL_CLAMP)
        tgt = (self.target + REACH) / (2.0 * REACH)
        return np.concatenate([ang, vel, tgt])

    def render(self) -> str:
        tip = self.fingertip()
        return (
            f"angles=({self.angles[0]:+.3f},{self.angles[1]:+.3f}) "
            f"vel=({self.velocities[0]:+.3f},{self.velocities[1]:+.3f}) "
            f"tip=({tip[0]:+.3f},{tip[1]:+.3f}) target=({self.target[0]:+.3f},{self.target[1]:+.3f})"
        )
