"""Partially observable gridworlds with sparse goal rewards.

Three layouts: a single empty room, two rooms joined by a closed door, and a
room split by a wall with a locked door whose key must be picked up first.
The agent sees a 7x7 egocentric window, 3 values per cell (object id, color
id, door state), each channel normalized by its maximum id, flattened to a
147-float vector. Actions: turn-left, turn-right, forward, pickup, toggle.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .base import EnvStep, new_rng

# object ids
UNSEEN, EMPTY, WALL, DOOR, KEY, GOAL = 0, 1, 2, 3, 4, 5
MAX_OBJ = 5
# color ids
NO_COLOR, GREY, GREEN, YELLOW = 0, 1, 2, 3
MAX_COLOR = 3
# door states (state channel is 0 for everything else)
OPEN, CLOSED, LOCKED = 0, 1, 2
MAX_STATE = 2

VIEW = 7
OBS_SIZE = VIEW * VIEW * 3

TURN_LEFT, TURN_RIGHT, FORWARD, PICKUP, TOGGLE = range(5)

# 0=east, 1=south, 2=west, 3=north
DIR_VEC = ((1, 0), (0, 1), (-1, 0), (0, -1))
AGENT_GLYPH = ">v<^"


class GridWorldBase:
    """Common movement, observation, and bookkeeping for all grid layouts."""

    observation_size = OBS_SIZE
    action_size = 5
    continuous = False
    max_steps = 100

    def __init__(self, seed=None):
        self._rng = new_rng(seed)
        self.grid = None
        self.agent_pos = (0, 0)
        self.agent_dir = 0
        self.carrying = False
        self.steps = 0
        self.done = True

    # layout generation, filled in by subclasses
    def _generate(self):
        raise NotImplementedError

    def reset(self, seed=None) -> np.ndarray:
        if seed is not None:
            self._rng = new_rng(seed)
        self._generate()
        self.carrying = False
        self.steps = 0
        self.done = False
        return self._observe()

    def step(self, action) -> EnvStep:
        if self.done:
            raise RuntimeError("episode is done; call reset() first")
        action = int(action)
        if not 0 <= action < self.action_size:
            raise ValueError(f"action must be in [0, {self.action_size}), got {action}")

        reward = 0.0
        success = False
        x, y = self.agent_pos
        if action == TURN_LEFT:
            self.agent_dir = (self.agent_dir - 1) % 4
        elif action == TURN_RIGHT:
            self.agent_dir = (self.agent_dir + 1) % 4
        elif action == FORWARD:
            dx, dy = DIR_VEC[self.agent_dir]
            nx, ny = x + dx, y + dy
            if self._walkable(nx, ny):
                self.agent_pos = (nx, ny)
                if self.grid[ny, nx, 0] == GOAL:
                    reward = 1.0
                    success = True
        elif action == PICKUP:
            fx, fy = self._front()
            if self._in_grid(fx, fy) and self.grid[fy, fx, 0] == KEY and not self.carrying:
                self.carrying = True
                self.grid[fy, fx] = (EMPTY, NO_COLOR, 0)
        elif action == TOGGLE:
            fx, fy = self._front()
            if self._in_grid(fx, fy) and self.grid[fy, fx, 0] == DOOR:
                state = self.grid[fy, fx, 2]
                if state == LOCKED:
                    if self.carrying:
                        self.grid[fy, fx, 2] = OPEN
                elif state == CLOSED:
                    self.grid[fy, fx, 2] = OPEN
                else:
                    self.grid[fy, fx, 2] = CLOSED

        self.steps += 1
        self.done = success or self.steps >= self.max_steps
        return EnvStep(
            observation=self._observe(),
            reward=reward,
            done=self.done,
            info={"step": self.steps, "success": success},
        )

    def _in_grid(self, x, y):
        h, w = self.grid.shape[:2]
        return 0 <= x < w and 0 <= y < h

    def _walkable(self, x, y):
        if not self._in_grid(x, y):
            return False
        obj, _, state = self.grid[y, x]
        return obj in (EMPTY, GOAL) or (obj == DOOR and state == OPEN)

    def _front(self):
        dx, dy = DIR_VEC[self.agent_dir]
        return self.agent_pos[0] + dx, self.agent_pos[1] + dy

    def _observe(self) -> np.ndarray:
        """7x7 egocentric window: agent at bottom-center looking up the view."""
        fwd = DIR_VEC[self.agent_dir]
        right = DIR_VEC[(self.agent_dir + 1) % 4]
        ax, ay = self.agent_pos
        out = np.zeros((VIEW, VIEW, 3), dtype=np.float64)
        for vr in range(VIEW):
            f = (VIEW - 1) - vr
            for vc in range(VIEW):
                l = vc - VIEW // 2
                wx = ax + f * fwd[0] + l * right[0]
                wy = ay + f * fwd[1] + l * right[1]
                if self._in_grid(wx, wy):
                    out[vr, vc] = self.grid[wy, wx]
        if self.carrying:
            # own cell shows the carried item
            out[VIEW - 1, VIEW // 2] = (KEY, YELLOW, 0)
        out[:, :, 0] /= MAX_OBJ
        out[:, :, 1] /= MAX_COLOR
        out[:, :, 2] /= MAX_STATE
        return out.reshape(-1)

    def render(self) -> str:
        rows = []
        glyphs = {UNSEEN: " ", EMPTY: ".", WALL: "#", DOOR: "D", KEY: "K", GOAL: "G"}
        h, w = self.grid.shape[:2]
        for y in range(h):
            row = []
            for x in range(w):
                if (x, y) == self.agent_pos:
                    row.append(AGENT_GLYPH[self.agent_dir])
                    continue
                obj, _, state = self.grid[y, x]
                ch = glyphs[obj]
                if obj == DOOR and state == OPEN:
                    ch = "d"
                row.append(ch)
            rows.append("".join(row))
        return "\n".join(rows)

    # shared generation helpers

    def _blank(self, w, h):
        grid = np.zeros((h, w, 3), dtype=np.int16)
        grid[:, :, 0] = EMPTY
        grid[0, :, 0] = WALL
        grid[-1, :, 0] = WALL
        grid[:, 0, 0] = WALL
        grid[:, -1, 0] = WALL
        grid[grid[:, :, 0] == WALL, 1] = GREY
        return grid

    def _random_empty_cell(self, exclude=()):
        h, w = self.grid.shape[:2]
        while True:
            x = int(self._rng.integers(1, w - 1))
            y = int(self._rng.integers(1, h - 1))
            if self.grid[y, x, 0] == EMPTY and (x, y) not in exclude:
                return x, y


class EmptyRoomEnv(GridWorldBase):
    """6x6 room, goal in the far corner, random agent start pose."""

    max_steps = 100

    def _generate(self):
        self.grid = self._blank(6, 6)
        self.grid[4, 4] = (GOAL, GREEN, 0)
        self.agent_pos = self._random_empty_cell()
        self.agent_dir = int(self._rng.integers(4))


class MultiRoomEnv(GridWorldBase):
    """Two rooms joined by a closed door; goal in the far room.

    Room interiors are 2..4 cells per side and the arrangement (sizes, door
    position, horizontal or vertical) is resampled every reset.
    """

    max_steps = 160

    def _generate(self):
        rng = self._rng
        wa, ha = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        wb, hb = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        w = 3 + wa + wb
        h = 2 + max(ha, hb)
        grid = self._blank(w, h)
        grid[:, :, 0] = WALL
        grid[:, :, 1] = GREY
        grid[:, :, 2] = 0
        # carve room interiors; top-aligned
        grid[1 : 1 + ha, 1 : 1 + wa] = (EMPTY, NO_COLOR, 0)
        grid[1 : 1 + hb, 2 + wa : 2 + wa + wb] = (EMPTY, NO_COLOR, 0)
        door_y = int(rng.integers(1, 1 + min(ha, hb)))
        grid[door_y, 1 + wa] = (DOOR, GREEN, CLOSED)
        if rng.integers(2):
            grid = np.ascontiguousarray(np.swapaxes(grid, 0, 1))
        self.grid = grid

        h2, w2 = grid.shape[:2]
        goal_cells = [
            (x, y)
            for y in range(h2)
            for x in range(w2)
            if grid[y, x, 0] == EMPTY and self._in_second_room(x, y)
        ]
        gx, gy = goal_cells[int(rng.integers(len(goal_cells)))]
        grid[gy, gx] = (GOAL, GREEN, 0)

        start_cells = [
            (x, y)
            for y in range(h2)
            for x in range(w2)
            if grid[y, x, 0] == EMPTY and not self._in_second_room(x, y)
        ]
        self.agent_pos = start_cells[int(rng.integers(len(start_cells)))]
        self.agent_dir = int(rng.integers(4))

    def _in_second_room(self, x, y):
        # the second room lies past the dividing door along the long axis
        h, w = self.grid.shape[:2]
        door = np.argwhere(self.grid[:, :, 0] == DOOR)
        dy, dx = door[0]
        if w >= h:
            return x > dx
        return y > dy


class DoorKeyEnv(GridWorldBase):
    """6x6 room split by a wall with a locked door; key on the agent's side."""

    max_steps = 200

    def _generate(self):
        while True:
            self._try_generate()
            if self._solvable():
                return

    def _try_generate(self):
        rng = self._rng
        grid = self._blank(6, 6)
        split = int(rng.integers(2, 4))
        grid[1:5, split] = (WALL, GREY, 0)
        door_y = int(rng.integers(1, 5))
        grid[door_y, split] = (DOOR, YELLOW, LOCKED)
        grid[4, 4] = (GOAL, GREEN, 0)
        self.grid = grid
        self._split = split
        kx = int(rng.integers(1, split))
        ky = int(rng.integers(1, 5))
        grid[ky, kx] = (KEY, YELLOW, 0)
        left = [
            (x, y)
            for y in range(1, 5)
            for x in range(1, split)
            if grid[y, x, 0] == EMPTY
        ]
        self.agent_pos = left[int(rng.integers(len(left)))]
        self.agent_dir = int(rng.integers(4))

    def _solvable(self):
        """Breadth-first check that a key -> door -> goal solution exists."""
        grid = self.grid
        h, w = grid.shape[:2]
        door = tuple(np.argwhere(grid[:, :, 0] == DOOR)[0][::-1])
        key = tuple(np.argwhere(grid[:, :, 0] == KEY)[0][::-1])
        goal = tuple(np.argwhere(grid[:, :, 0] == GOAL)[0][::-1])

        def bfs(start, passable):
            seen = {start}
            q = deque([start])
            while q:
                cx, cy = q.popleft()
                for dx, dy in DIR_VEC:
                    nx, ny = cx + dx, cy + dy
                    if 0 <= nx < w and 0 <= ny < h and (nx, ny) not in seen:
                        if passable(nx, ny):
                            seen.add((nx, ny))
                            q.append((nx, ny))
            return seen

        def open_floor(x, y):
            return grid[y, x, 0] in (EMPTY, GOAL)

        reach = bfs(self.agent_pos, open_floor)
        adj = lambda cell: any(
            (cell[0] + dx, cell[1] + dy) in reach for dx, dy in DIR_VEC
        )
        if not (adj(key) and adj(door)):
            return False
        # once unlocked, walk from the door cell to the goal
        beyond = bfs(door, lambda x, y: (x, y) == door or open_floor(x, y))
        return goal in beyond
