"""Experiment runner: full decision cycle, metrics and replicate aggregation.

One cycle observes the environment, activates the population (alternating
exploration and exploitation), acts, resolves the previous cycle's fitness
update against the newly activated cell, and finally lets the acting cell
evolve if it has gathered enough experience.  Performance is the moving
average of steps-to-goal over the trailing 100 counted trials.
"""

from __future__ import annotations

import csv
import json
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import snapshot as snapshot_mod
from .credit import PendingUpdate, apply_update
from .evolution import GLOBAL, MIXED, EvoParams, evolve_cell, should_evolve
from .maze import DynamicSchedule, EnvConfig, MazeEnv, resolve_maze
from .population import EXPLOIT, EXPLORE, SocParams, SocSystem
from .som import SomMode, SomParams

PER_STEP = "per_step"
PER_TRIAL = "per_trial"

ALGORITHMS = {"ssoc2": SomMode.PARAMETERLESS, "ssoc": SomMode.CLASSIC}

EVENT_COLUMNS = ("trial", "step", "cell", "kept", "discarded", "created", "indexed")


@dataclass
class ExperimentConfig:
    """Everything one experiment needs; mirrors the flat JSON config file."""

    mazes: list[str]
    trials: int
    period: int = 10_000
    algorithm: str = "ssoc2"
    grid: tuple[int, int] = (10, 10)
    gamma: float = 0.90
    operator: str = GLOBAL
    replicates: int = 20
    seed: int = 0
    out: str | None = None
    alternation: str = PER_STEP
    diagnostics: bool = False
    noise: float = 0.0

    def __post_init__(self) -> None:
        if not self.mazes:
            raise ValueError("config needs at least one maze")
        if self.trials <= 100:
            raise ValueError("total trials must exceed 100")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.operator not in (GLOBAL, MIXED):
            raise ValueError(f"unknown operator {self.operator!r}")
        if self.alternation not in (PER_STEP, PER_TRIAL):
            raise ValueError(f"unknown alternation {self.alternation!r}")
        if isinstance(self.grid, str):
            self.grid = parse_grid(self.grid)
        else:
            self.grid = (int(self.grid[0]), int(self.grid[1]))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["grid"] = f"{self.grid[0]}x{self.grid[1]}"
        return data


def parse_grid(text: str) -> tuple[int, int]:
    """Parse a WxH grid size such as '10x10'."""
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise ValueError(f"grid must look like '10x10', got {text!r}") from None


class Alternator:
    """Explore/exploit scheduling state; exploration comes first.

    Per-step scheme: the mode flips every activation, continuing across
    trial boundaries.  Per-trial scheme: whole trials alternate, and only
    exploitation trials count toward the performance metric.
    """

    def __init__(self, scheme: str) -> None:
        if scheme not in (PER_STEP, PER_TRIAL):
            raise ValueError(f"unknown alternation {scheme!r}")
        self.scheme = scheme
        self._explore_next = True
        self._trial_mode = EXPLOIT  # begin_trial flips: the first trial explores

    def begin_trial(self) -> str:
        """Mode of the starting trial (meaningful under per-trial)."""
        if self.scheme == PER_TRIAL:
            self._trial_mode = EXPLORE if self._trial_mode == EXPLOIT else EXPLOIT
        return self._trial_mode

    def next_mode(self) -> str:
        if self.scheme == PER_TRIAL:
            return self._trial_mode
        mode = EXPLORE if self._explore_next else EXPLOIT
        self._explore_next = not self._explore_next
        return mode

    def trial_counted(self) -> bool:
        if self.scheme == PER_TRIAL:
            return self._trial_mode == EXPLOIT
        return True


def run_trial(
    system: SocSystem,
    env: MazeEnv,
    alternator: Alternator,
    on_evolution=None,
    trace: list | None = None,
) -> int:
    """Run one trial (episode) to the goal or the step cap; returns steps.

    Cycle order within a step: observe, activate, act, resolve the previous
    pending update against the newly active cell (terminally at the end of
    the trial), remember the new pending update, then give the acting cell
    its chance to evolve.
    """
    env.reset()
    pending: PendingUpdate | None = None
    pending_reward = 0.0
    steps = 0
    while True:
        obs = env.observe()
        act = system.activate(obs, alternator.next_mode())
        transition = env.step(act.action)
        steps += 1
        if pending is not None:
            apply_update(system, pending, pending_reward, act.cell, trace=trace)
        pending = PendingUpdate(
            cell=act.cell,
            group=act.group,
            slot_id=act.slot_id,
            action=act.action,
            observation=obs,
        )
        pending_reward = transition.reward
        if transition.done:
            apply_update(system, pending, pending_reward, None, trace=trace)
        if should_evolve(system, act.cell):
            report = evolve_cell(system, act.cell)
            if on_evolution is not None:
                on_evolution(report, steps)
        if transition.done:
            break
    env.advance_trial()
    return steps


@dataclass
class PerformanceSeries:
    """Per-trial step counts plus the trailing-window performance metric.

    ``counted`` marks the trials that enter the metric (all of them under
    per-step alternation, exploitation trials under per-trial).
    """

    steps: np.ndarray
    counted: np.ndarray
    maze_state: np.ndarray

    def moving_average(self, window: int = 100) -> np.ndarray:
        """Mean of the last ``window`` counted trials, evaluated at every
        trial; NaN until the first counted trial."""
        out = np.full(len(self.steps), np.nan)
        recent: deque[int] = deque(maxlen=window)
        total = 0
        for t, (steps, counted) in enumerate(zip(self.steps, self.counted)):
            if counted:
                if len(recent) == window:
                    total -= recent[0]
                recent.append(int(steps))
                total += int(steps)
            if recent:
                out[t] = total / len(recent)
        return out

    def final_performance(self, window: int = 100) -> float:
        return float(self.moving_average(window)[-1])


@dataclass
class ExperimentResult:
    series: PerformanceSeries
    system: SocSystem
    events: list[tuple] | None = None


def build_system(config: ExperimentConfig, seed_seq: np.random.SeedSequence) -> SocSystem:
    width, height = config.grid
    return SocSystem(
        width,
        height,
        som_params=SomParams(mode=ALGORITHMS[config.algorithm]),
        soc_params=SocParams(gamma=config.gamma),
        evo_params=EvoParams(operator_mode=config.operator),
        seed=seed_seq,
    )


def build_env(config: ExperimentConfig, seed_seq: np.random.SeedSequence) -> MazeEnv:
    states = [resolve_maze(m) for m in config.mazes]
    env_config = EnvConfig(
        schedule=DynamicSchedule(states=states, period=config.period),
        noise_fraction=config.noise,
    )
    return MazeEnv(env_config, rng=np.random.default_rng(seed_seq))


def run_experiment(config: ExperimentConfig, seed: int | None = None) -> ExperimentResult:
    """Run one replicate; deterministic for a fixed seed.

    The master seed feeds named substreams (system internals and the
    environment), so toggling diagnostics cannot perturb the run.
    """
    master = np.random.SeedSequence(config.seed if seed is None else seed)
    system_seq, env_seq = master.spawn(2)
    system = build_system(config, system_seq)
    env = build_env(config, env_seq)
    alternator = Alternator(config.alternation)

    steps = np.zeros(config.trials, dtype=np.int32)
    counted = np.zeros(config.trials, dtype=bool)
    maze_state = np.zeros(config.trials, dtype=np.int16)
    events: list[tuple] | None = [] if config.diagnostics else None

    for trial in range(config.trials):
        maze_state[trial] = env.active_state_index
        alternator.begin_trial()
        on_evolution = None
        if events is not None:
            on_evolution = lambda report, step, _trial=trial: events.append(
                (
                    _trial,
                    step,
                    report.cell,
                    ";".join(map(str, report.kept)),
                    ";".join(map(str, report.discarded)),
                    ";".join(map(str, report.created)),
                    ";".join(map(str, report.indexed)),
                )
            )
        steps[trial] = run_trial(system, env, alternator, on_evolution=on_evolution)
        counted[trial] = alternator.trial_counted()

    series = PerformanceSeries(steps=steps, counted=counted, maze_state=maze_state)
    return ExperimentResult(series=series, system=system, events=events)


@dataclass
class ReplicateResults:
    """Per-replicate series and snapshots plus the aggregated mean curve."""

    config: ExperimentConfig
    series: list[PerformanceSeries]
    snapshots: list[dict]
    events: list[list[tuple] | None]
    curves: np.ndarray = field(init=False)  # (replicates, trials) moving averages
    mean_curve: np.ndarray = field(init=False)
    std_curve: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.curves = np.vstack([s.moving_average() for s in self.series])
        self.mean_curve = self.curves.mean(axis=0)
        self.std_curve = self.curves.std(axis=0)

    def final_performances(self) -> np.ndarray:
        return self.curves[:, -1]

    def mean_final_performance(self) -> float:
        return float(self.final_performances().mean())


def _replicate_payload(args: tuple[ExperimentConfig, int]) -> tuple:
    config, index = args
    result = run_experiment(config, seed=config.seed + index)
    return (
        result.series.steps,
        result.series.counted,
        result.series.maze_state,
        snapshot_mod.to_state(result.system),
        result.events,
    )


def run_replicates(config: ExperimentConfig, workers: int = 1) -> ReplicateResults:
    """Run all replicates (replicate i uses seed = base seed + i).

    ``workers`` > 1 runs them in separate processes; results are identical
    to a sequential run because every replicate owns its seed substreams.
    """
    jobs = [(config, i) for i in range(config.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            payloads = list(pool.map(_replicate_payload, jobs))
    else:
        payloads = [_replicate_payload(job) for job in jobs]

    series = [
        PerformanceSeries(steps=p[0], counted=p[1], maze_state=p[2]) for p in payloads
    ]
    return ReplicateResults(
        config=config,
        series=series,
        snapshots=[p[3] for p in payloads],
        events=[p[4] for p in payloads],
    )


# -- file outputs -------------------------------------------------------------


def write_outputs(results: ReplicateResults, out_dir: str | Path) -> Path:
    """Write the run directory: resolved config, per-replicate raw trials,
    curves, snapshots, optional evolution events, aggregated curve CSV and a
    vector plot.  Returns the run directory path."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(results.config.to_dict(), indent=2))

        for i, series in enumerate(results.series):
            rep_dir = out / f"replicate_{i:02d}"
            rep_dir.mkdir(exist_ok=True)
            with open(rep_dir / "trials.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(("trial", "steps", "maze_state"))
                for t in range(len(series.steps)):
                    writer.writerow((t, int(series.steps[t]), int(series.maze_state[t])))
            with open(rep_dir / "curve.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(("trial", "moving_avg"))
                for t, value in enumerate(results.curves[i]):
                    writer.writerow((t, "" if np.isnan(value) else f"{value:.6f}"))
            (rep_dir / "snapshot.json").write_text(json.dumps(results.snapshots[i]))
            if results.events[i] is not None:
                with open(rep_dir / "events.csv", "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(EVENT_COLUMNS)
                    writer.writerows(results.events[i])

        with open(out / "curve.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("trial", "mean", "stddev"))
            for t in range(len(results.mean_curve)):
                mean, std = results.mean_curve[t], results.std_curve[t]
                writer.writerow(
                    (
                        t,
                        "" if np.isnan(mean) else f"{mean:.6f}",
                        "" if np.isnan(std) else f"{std:.6f}",
                    )
                )
        plot_curve(results, out / "curve.svg")
    except OSError as exc:
        raise OSError(f"failed writing run outputs under {out}: {exc}") from exc
    return out


def read_curve_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Load an aggregated curve CSV back as (trial, mean, stddev) arrays."""
    trials, means, stds = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            trials.append(int(row["trial"]))
            means.append(float(row["mean"]) if row["mean"] else np.nan)
            stds.append(float(row["stddev"]) if row["stddev"] else np.nan)
    return np.array(trials), np.array(means), np.array(stds)


def plot_curve(results: ReplicateResults, path: str | Path) -> None:
    """Mean performance curve with a one-stddev band, as a standalone SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    trials = np.arange(len(results.mean_curve))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(trials, results.mean_curve, lw=1.2, color="tab:red", label="mean")
    ax.fill_between(
        trials,
        results.mean_curve - results.std_curve,
        results.mean_curve + results.std_curve,
        alpha=0.25,
        color="tab:red",
        linewidth=0,
        label="+-1 stddev",
    )
    period = results.config.period
    if len(results.config.mazes) > 1:
        for change in range(period, len(trials), period):
            ax.axvline(change, color="red", ls="--", lw=0.8, alpha=0.6)
    ax.set_xlabel("trial")
    ax.set_ylabel("steps to goal (100-trial moving average)")
    ax.set_title(
        f"{results.config.algorithm} / {results.config.operator} operator, "
        f"{results.config.replicates} replicates"
    )
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
