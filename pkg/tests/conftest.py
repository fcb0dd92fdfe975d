import numpy as np
import pytest

from ssoc.population import SocSystem

# Free cell enclosed by walls: the goal exists but is unreachable (too far
# for a single 1.0 displacement), so every trial runs to the 500-step cap.
BOXED_MAZE = "G###\n##.#\n####"

# Tiny open room with a fat goal: random behavior finishes trials quickly.
QUICK_MAZE = "GG.\nGG.\n..."


def initialize_all_cells(system: SocSystem) -> None:
    for i in range(len(system.cells)):
        system.ensure_cell_initialized(i)


def set_all_genes(system: SocSystem, genes) -> None:
    """Force every stored chromosome to a fixed action vector."""
    for c in system.store.values():
        c.genes = np.array(genes, dtype=float)


@pytest.fixture
def tmp_maze_file(tmp_path):
    def write(text, name="maze.txt"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return write
