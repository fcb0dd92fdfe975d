"""Behavior and fitness map sampling."""

import numpy as np
from conftest import initialize_all_cells, set_all_genes

from ssoc import snapshot
from ssoc.maps import plot_map, sample_behavior_map, sample_fitness_map, write_map_csv
from ssoc.maze import load_maze
from ssoc.population import SocSystem

WALLED = "G....\n.....\n..#..\n.....\n....."


def constant_system(genes=(0.5, 0.0)):
    system = SocSystem(3, 3, seed=2)
    initialize_all_cells(system)
    set_all_genes(system, genes)
    return system


class TestBehaviorMap:
    def test_constant_population_gives_constant_map(self):
        system = constant_system((0.5, 0.0))
        maze = load_maze(WALLED)
        bmap = sample_behavior_map(system, maze, np.random.default_rng(0), 50)
        for by in range(maze.height):
            for bx in range(maze.width):
                if bmap.wall[by, bx]:
                    assert bmap.is_empty(bx, by)
                else:
                    assert np.allclose(bmap.values[by, bx], (0.5, 0.0))

    def test_wall_blocks_marked_empty(self):
        system = constant_system()
        maze = load_maze(WALLED)
        bmap = sample_behavior_map(system, maze, np.random.default_rng(1), 20)
        assert bmap.is_empty(2, 2)
        assert bool(bmap.wall[2, 2])

    def test_single_winner_block_mean_equals_the_action(self):
        # one-cell grid: every sample hits the same winner and the best group
        # holds a single distinct classifier
        system = SocSystem(1, 1, seed=3)
        system.ensure_cell_initialized(0)
        set_all_genes(system, (0.3, -0.2))
        maze = load_maze("G.")
        bmap = sample_behavior_map(system, maze, np.random.default_rng(2), 100)
        assert np.allclose(bmap.values[0, 1], (0.3, -0.2), atol=1e-12)

    def test_sampling_is_a_pure_read(self):
        system = constant_system()
        maze = load_maze(WALLED)
        before = snapshot.to_state(system)
        sample_behavior_map(system, maze, np.random.default_rng(3), 30)
        sample_fitness_map(system, maze, np.random.default_rng(4), 30)
        assert snapshot.to_state(system) == before

    def test_uninitialized_winner_blocks_are_empty(self):
        system = SocSystem(2, 2, seed=4, observation_dim=2)
        system.grid.weights = np.array([[0.05, 0.05], [0.95, 0.05], [0.05, 0.95], [0.95, 0.95]])
        system.ensure_cell_initialized(0)  # only the bottom-left cell answers
        maze = load_maze("G...\n....\n....\n....")
        bmap = sample_behavior_map(system, maze, np.random.default_rng(5), 30)
        assert not bmap.is_empty(0, 0)
        assert bmap.is_empty(3, 3)


class TestFitnessMap:
    def test_all_zero_fitness_gives_zero_map(self):
        system = constant_system()
        maze = load_maze(WALLED)
        fmap = sample_fitness_map(system, maze, np.random.default_rng(6), 20)
        free = ~fmap.wall
        assert np.allclose(fmap.values[free], 0.0)

    def test_reports_max_fitness_of_winning_cell(self):
        system = SocSystem(1, 1, seed=7)
        system.ensure_cell_initialized(0)
        system.cells[0].best[0].fitness = 321.0
        maze = load_maze("G.")
        fmap = sample_fitness_map(system, maze, np.random.default_rng(8), 10)
        assert np.allclose(fmap.values[0, 1], 321.0)


class TestMapFiles:
    def test_csv_and_svg_outputs(self, tmp_path):
        system = constant_system()
        maze = load_maze(WALLED)
        bmap = sample_behavior_map(system, maze, np.random.default_rng(9), 10)
        fmap = sample_fitness_map(system, maze, np.random.default_rng(10), 10)
        write_map_csv(bmap, tmp_path / "b.csv")
        write_map_csv(fmap, tmp_path / "f.csv")
        b_lines = (tmp_path / "b.csv").read_text().splitlines()
        assert b_lines[0] == "block_x,block_y,wall,mean_dx,mean_dy"
        assert len(b_lines) == 1 + maze.width * maze.height
        f_lines = (tmp_path / "f.csv").read_text().splitlines()
        assert f_lines[0] == "block_x,block_y,wall,mean_max_fitness"
        wall_rows = [l for l in b_lines[1:] if l.split(",")[2] == "1"]
        assert all(l.endswith(",,") for l in wall_rows)
        plot_map(bmap, tmp_path / "b.svg")
        plot_map(fmap, tmp_path / "f.svg")
        assert (tmp_path / "b.svg").stat().st_size > 0
        assert (tmp_path / "f.svg").stat().st_size > 0
