"""Self-organizing classifiers: an evolutionary reinforcement learner whose
population lives in a self-organizing map, plus continuous maze benchmarks."""

from .credit import PendingUpdate, apply_update, max_cell_fitness
from .evolution import EvoParams, EvolutionReport, de_offspring, evolve_cell, should_evolve
from .harness import (
    Alternator,
    ExperimentConfig,
    PerformanceSeries,
    ReplicateResults,
    run_experiment,
    run_replicates,
    run_trial,
)
from .maps import sample_behavior_map, sample_fitness_map
from .maze import (
    DynamicSchedule,
    EnvConfig,
    MazeEnv,
    MazeParseError,
    MazeSpec,
    load_builtin_maze,
    load_maze,
    load_maze_file,
    resolve_maze,
)
from .population import Activation, CellState, Classifier, Slot, SocParams, SocSystem
from .som import SomGrid, SomMode, SomParams

__version__ = "0.1.0"
