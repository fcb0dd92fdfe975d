"""Continuous-state, continuous-action maze environments.

Mazes are described by ASCII grids of unit tiles ('#' wall, '.' free,
'G' goal; text row 0 is the top of the maze).  The agent occupies a
continuous position inside [0, W] x [0, H], moves by at most 1.0 per axis
per step, and is clamped at the outer border, which lets it slide along the
limits.  Moving strictly into a wall tile leaves the position unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

WALL = "#"
FREE = "."
GOAL = "G"

_TILE_CHARS = {WALL, FREE, GOAL}


class MazeParseError(ValueError):
    """Raised for malformed maze text; message names line and column."""


@dataclass(frozen=True)
class MazeSpec:
    """Immutable unit-tile maze description.

    ``tiles`` holds one string per row, row 0 at the top (y = height at the
    top edge).  The outer border is a clamping boundary, not a wall.
    """

    width: int
    height: int
    tiles: tuple[str, ...]
    name: str = "maze"

    def tile_at(self, x: float, y: float) -> str:
        """Tile character containing point (x, y), by floor convention.

        Points on the outer edges x == width or y == height belong to the
        last column / top row.
        """
        col = min(int(x), self.width - 1)
        row_up = min(int(y), self.height - 1)
        return self.tiles[self.height - 1 - row_up][col]

    def wall_interior(self, x: float, y: float) -> bool:
        """True when (x, y) lies strictly inside a wall tile.

        Points exactly on a tile gridline are never strictly inside.
        """
        fx = math.floor(x)
        fy = math.floor(y)
        if x == fx or y == fy:
            return False
        if fx < 0 or fy < 0 or fx >= self.width or fy >= self.height:
            return False
        return self.tiles[self.height - 1 - fy][fx] == WALL

    def free_area_exists(self) -> bool:
        return any(FREE in row for row in self.tiles)


def load_maze(text: str, name: str = "maze") -> MazeSpec:
    """Parse an ASCII maze block into a MazeSpec.

    Rejects ragged rows, unknown characters, mazes without a goal and mazes
    without free space; errors name the offending 1-based line and column.
    """
    rows = [line for line in text.splitlines() if line.strip() != ""]
    if not rows:
        raise MazeParseError(f"{name}: empty maze text")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise MazeParseError(
                f"{name}: line {lineno}: row length {len(row)} != {width}"
            )
        for colno, ch in enumerate(row, start=1):
            if ch not in _TILE_CHARS:
                raise MazeParseError(
                    f"{name}: line {lineno}, column {colno}: unknown tile {ch!r}"
                )
    if not any(GOAL in row for row in rows):
        raise MazeParseError(f"{name}: maze has no goal tile")
    if not any(FREE in row for row in rows):
        raise MazeParseError(f"{name}: maze has no free tile")
    return MazeSpec(width=width, height=len(rows), tiles=tuple(rows), name=name)


def load_maze_file(path: str | Path) -> MazeSpec:
    path = Path(path)
    return load_maze(path.read_text(), name=path.stem)


def builtin_maze_names() -> list[str]:
    """Names of the maze layouts shipped with the package."""
    root = resources.files("ssoc") / "mazes"
    return sorted(p.name[: -len(".txt")] for p in root.iterdir() if p.name.endswith(".txt"))


def load_builtin_maze(name: str) -> MazeSpec:
    res = resources.files("ssoc") / "mazes" / f"{name}.txt"
    return load_maze(res.read_text(), name=name)


def resolve_maze(path_or_name: str | Path) -> MazeSpec:
    """Load a maze from a file path, or fall back to a builtin layout name."""
    p = Path(path_or_name)
    if p.is_file():
        return load_maze_file(p)
    name = str(path_or_name)
    if name in builtin_maze_names():
        return load_builtin_maze(name)
    raise FileNotFoundError(f"no maze file or builtin layout named {path_or_name!r}")


@dataclass
class DynamicSchedule:
    """Ordered maze states cycled every ``period`` trials."""

    states: list[MazeSpec]
    period: int = 10_000

    def __post_init__(self) -> None:
        if not self.states:
            raise ValueError("schedule needs at least one maze state")
        if self.period <= 0:
            raise ValueError("schedule period must be positive")

    def state_for_trial(self, trial_index: int) -> int:
        return (trial_index // self.period) % len(self.states)


@dataclass
class EnvConfig:
    """Environment parameters: schedule, observation noise and rewards."""

    schedule: DynamicSchedule
    noise_fraction: float = 0.0
    reward_goal: float = 1000.0
    reward_collision: float = -20.0
    reward_step: float = -10.0
    max_displacement: float = 1.0
    max_steps_per_trial: int = 500

    def __post_init__(self) -> None:
        if not (0.0 <= self.noise_fraction < 0.5):
            raise ValueError("noise_fraction must lie in [0, 0.5)")


@dataclass
class Transition:
    position: tuple[float, float]
    reward: float
    done: bool


class MazeEnv:
    """One agent's episodic view of a (possibly changing) maze."""

    def __init__(self, config: EnvConfig, rng: np.random.Generator) -> None:
        self.config = config
        self.rng = rng
        self.trial_index = 0
        self.step_index = 0
        self.active_state_index = 0
        self.x = 0.0
        self.y = 0.0
        self._done = True  # requires reset() before stepping

    @property
    def active_spec(self) -> MazeSpec:
        return self.config.schedule.states[self.active_state_index]

    def reset(self) -> tuple[float, float]:
        """Start a trial at a uniform position over the free (non-wall,
        non-goal) area of the active maze."""
        spec = self.active_spec
        if not spec.free_area_exists():
            raise ValueError(f"maze {spec.name!r} has no free area to start in")
        while True:
            x = self.rng.uniform(0.0, spec.width)
            y = self.rng.uniform(0.0, spec.height)
            if spec.tile_at(x, y) == FREE:
                break
        self.x = x
        self.y = y
        self.step_index = 0
        self._done = False
        return x, y

    def step(self, action) -> Transition:
        """Apply one displacement; returns the resulting transition.

        The action is clamped to the per-axis displacement limit, then the
        target point is clamped into the maze box (which produces sliding
        along the border).  A target strictly inside a wall bounces back to
        the previous position with the collision reward.
        """
        if self._done:
            raise RuntimeError("step() called on a finished trial; reset() first")
        spec = self.active_spec
        lim = self.config.max_displacement
        dx = min(max(float(action[0]), -lim), lim)
        dy = min(max(float(action[1]), -lim), lim)
        tx = min(max(self.x + dx, 0.0), float(spec.width))
        ty = min(max(self.y + dy, 0.0), float(spec.height))

        done = False
        if spec.wall_interior(tx, ty):
            reward = self.config.reward_collision
        elif spec.tile_at(tx, ty) == GOAL:
            self.x = tx
            self.y = ty
            reward = self.config.reward_goal
            done = True
        else:
            self.x = tx
            self.y = ty
            reward = self.config.reward_step

        self.step_index += 1
        if self.step_index >= self.config.max_steps_per_trial:
            done = True
        self._done = done
        return Transition(position=(self.x, self.y), reward=reward, done=done)

    def observe(self) -> np.ndarray:
        """Position normalized to [0, 1]^2, with optional uniform noise of
        +-noise_fraction of each axis extent."""
        spec = self.active_spec
        ox = self.x / spec.width
        oy = self.y / spec.height
        nf = self.config.noise_fraction
        if nf > 0.0:
            ox += self.rng.uniform(-nf, nf)
            oy += self.rng.uniform(-nf, nf)
            ox = min(max(ox, 0.0), 1.0)
            oy = min(max(oy, 0.0), 1.0)
        return np.array((ox, oy))

    def advance_trial(self) -> None:
        """Account a finished trial and switch the active maze state when the
        schedule period rolls over."""
        self.trial_index += 1
        self.active_state_index = self.config.schedule.state_for_trial(self.trial_index)
