"""Post-hoc sampling of trained behavior and fitness over a maze.

The maze is divided into 1x1 blocks; inside each block, positions are drawn
uniformly and the trained system is queried in exploitation mode without any
learning (no weight update, no experience, no fitness change), so sampling
leaves the system bit-identical.  Wall blocks are marked empty, as are
blocks whose samples only ever hit cells the system never initialized.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .credit import max_cell_fitness
from .maze import WALL, MazeSpec
from .population import SocSystem


@dataclass
class BlockMap:
    """Per-block statistics over a maze; arrays are indexed [by, bx] with
    block (0, 0) at the bottom-left corner."""

    maze: MazeSpec
    values: np.ndarray  # behavior: (H, W, 2); fitness: (H, W)
    wall: np.ndarray  # (H, W) bool
    samples_per_block: int

    def is_empty(self, bx: int, by: int) -> bool:
        return bool(self.wall[by, bx]) or bool(np.any(np.isnan(self.values[by, bx])))


def _wall_mask(maze: MazeSpec) -> np.ndarray:
    mask = np.zeros((maze.height, maze.width), dtype=bool)
    for by in range(maze.height):
        row = maze.tiles[maze.height - 1 - by]
        for bx in range(maze.width):
            mask[by, bx] = row[bx] == WALL
    return mask


def _sample_blocks(
    system: SocSystem,
    maze: MazeSpec,
    rng: np.random.Generator,
    samples_per_block: int,
    record,
    value_shape: tuple[int, ...],
) -> BlockMap:
    wall = _wall_mask(maze)
    values = np.full((maze.height, maze.width) + value_shape, np.nan)
    for by in range(maze.height):
        for bx in range(maze.width):
            if wall[by, bx]:
                continue
            acc = np.zeros(value_shape if value_shape else (1,))
            hits = 0
            for _ in range(samples_per_block):
                x = bx + rng.random()
                y = by + rng.random()
                obs = np.array((x / maze.width, y / maze.height))
                winner = system.grid.find_winner(obs)
                if not system.cells[winner].initialized:
                    continue
                acc += record(winner)
                hits += 1
            if hits:
                values[by, bx] = (acc / hits) if value_shape else (acc[0] / hits)
    return BlockMap(maze=maze, values=values, wall=wall, samples_per_block=samples_per_block)


def sample_behavior_map(
    system: SocSystem,
    maze: MazeSpec,
    rng: np.random.Generator | None = None,
    samples_per_block: int = 100,
) -> BlockMap:
    """Mean exploitation action (dx, dy) per 1x1 block."""
    rng = rng if rng is not None else np.random.default_rng(0)

    def record(winner: int) -> np.ndarray:
        best = system.cells[winner].best
        slot = best[int(rng.integers(len(best)))]
        return system.store[slot.classifier_id].genes

    return _sample_blocks(system, maze, rng, samples_per_block, record, (2,))


def sample_fitness_map(
    system: SocSystem,
    maze: MazeSpec,
    rng: np.random.Generator | None = None,
    samples_per_block: int = 100,
) -> BlockMap:
    """Mean of the winning cell's maximum fitness per 1x1 block."""
    rng = rng if rng is not None else np.random.default_rng(0)

    def record(winner: int) -> float:
        return max_cell_fitness(system, winner)

    return _sample_blocks(system, maze, rng, samples_per_block, record, ())


def write_map_csv(block_map: BlockMap, path: str | Path) -> None:
    """Block values as CSV; wall and never-activated blocks have empty value
    fields and wall == 1 marks wall blocks."""
    behavior = block_map.values.ndim == 3
    header = ("block_x", "block_y", "wall", "mean_dx", "mean_dy") if behavior else (
        "block_x",
        "block_y",
        "wall",
        "mean_max_fitness",
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for by in range(block_map.maze.height):
            for bx in range(block_map.maze.width):
                wall = int(block_map.wall[by, bx])
                if block_map.is_empty(bx, by):
                    fields = ("", "") if behavior else ("",)
                else:
                    value = block_map.values[by, bx]
                    fields = (
                        (f"{value[0]:.6f}", f"{value[1]:.6f}")
                        if behavior
                        else (f"{value:.6f}",)
                    )
                writer.writerow((bx, by, wall) + fields)


def plot_map(block_map: BlockMap, path: str | Path) -> None:
    """Standalone SVG: quiver of mean actions, or a fitness heatmap."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    maze = block_map.maze
    fig, ax = plt.subplots(figsize=(max(4, maze.width * 0.35), max(4, maze.height * 0.35)))
    wall_img = np.where(block_map.wall, 1.0, np.nan)
    ax.imshow(
        wall_img,
        origin="lower",
        extent=(0, maze.width, 0, maze.height),
        cmap="gray_r",
        vmin=0,
        vmax=1,
        alpha=0.8,
    )
    if block_map.values.ndim == 3:
        xs, ys = np.meshgrid(
            np.arange(maze.width) + 0.5, np.arange(maze.height) + 0.5
        )
        ax.quiver(
            xs,
            ys,
            block_map.values[:, :, 0],
            block_map.values[:, :, 1],
            angles="xy",
            scale_units="xy",
            scale=1.0,
            width=0.004,
            color="tab:blue",
        )
    else:
        img = ax.imshow(
            block_map.values,
            origin="lower",
            extent=(0, maze.width, 0, maze.height),
            cmap="viridis",
        )
        fig.colorbar(img, ax=ax, shrink=0.8, label="mean max fitness")
    for by in range(maze.height):
        row = maze.tiles[maze.height - 1 - by]
        for bx in range(maze.width):
            if row[bx] == "G":
                ax.add_patch(
                    plt.Rectangle((bx, by), 1, 1, fill=False, edgecolor="red", lw=1.5)
                )
    ax.set_xlim(0, maze.width)
    ax.set_ylim(0, maze.height)
    ax.set_aspect("equal")
    ax.set_title(maze.name)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
