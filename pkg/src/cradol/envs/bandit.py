"""Moving-goal bandit: N marked positions, one correct, resampled per episode.

The observation concatenates the agent's position, every goal position, and
a one-hot flag naming the correct goal. Distractor goals are pure spurious
features; only proximity to the correct one pays.
"""

from __future__ import annotations

import numpy as np

from .base import EnvStep, new_rng

STEP_SIZE = 0.05
SUCCESS_RADIUS = 0.1
MAX_STEPS = 50

# up, down, left, right, stay
MOVES = ((0.0, STEP_SIZE), (0.0, -STEP_SIZE), (-STEP_SIZE, 0.0), (STEP_SIZE, 0.0), (0.0, 0.0))


class MovingBanditEnv:
    action_size = 5
    continuous = False
    max_steps = MAX_STEPS

    def __init__(self, num_goals=5, seed=None):
        self.num_goals = int(num_goals)
        self.observation_size = 2 + 2 * self.num_goals + self.num_goals
        self._rng = new_rng(seed)
        self.done = True
        self.agent = np.zeros(2)
        self.goals = np.zeros((self.num_goals, 2))
        self.correct = 0
        self.steps = 0

    def reset(self, seed=None) -> np.ndarray:
        if seed is not None:
            self._rng = new_rng(seed)
        self.agent = self._rng.random(2)
        self.goals = self._rng.random((self.num_goals, 2))
        self.correct = int(self._rng.integers(self.num_goals))
        self.steps = 0
        self.done = False
        return self._observe()

    def step(self, action) -> EnvStep:
        if self.done:
            raise RuntimeError("episode is done; call reset() first")
        action = int(action)
        if not 0 <= action < self.action_size:
            raise ValueError(f"action must be in [0, {self.action_size}), got {action}")
        dx, dy = MOVES[action]
        self.agent = np.clip(self.agent + (dx, dy), 0.0, 1.0)
        self.steps += 1
        dist = float(np.linalg.norm(self.agent - self.goals[self.correct]))
        success = dist < SUCCESS_RADIUS
        reward = 1.0 if success else 0.0
        self.done = success or self.steps >= self.max_steps
        return EnvStep(
            observation=self._observe(),
            reward=reward,
            done=self.done,
            info={"step": self.steps, "success": success},
        )

    def _observe(self) -> np.ndarray:
        onehot = np.zeros(self.num_goals)
        onehot[self.correct] = 1.0
        return np.concatenate([self.agent, self.goals.reshape(-1), onehot])

    def render(self) -> str:
        marks = [f"goal{i}{'*' if i == self.correct else ''}=({g[0]:.2f},{g[1]:.2f})" for i, g in enumerate(self.goals)]
        return f"agent=({self.agent[0]:.2f},{self.agent[1]:.2f}) " + " ".join(marks)
