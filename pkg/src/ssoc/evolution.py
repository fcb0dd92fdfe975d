"""Per-cell evolutionary step with a differential-evolution operator.

When a cell has gathered enough experience, its slots are ranked by fitness:
the top slots become the new best group, the rest are dropped (with their
numerosity bookkeeping), and a fresh novel group is built either by indexing
random classifiers from the whole store or by breeding new chromosomes with
rand/1/bin differential evolution.  The mixed operator draws DE parents from
lattice-adjacent cells half the time, exploiting the map's topology.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .population import BEST, NOVEL, SocSystem

GLOBAL = "global"
MIXED = "mixed"

#: Retries for distinct-parent sampling before falling back to a global draw.
_DISTINCT_DRAW_RETRIES = 32


@dataclass
class EvoParams:
    """Differential evolution and novel-group renewal parameters.

    The scale factor of the difference vector is drawn uniformly from (0, 1)
    once per offspring.  ``local_probability`` is the chance that one parent
    draw comes from an adjacent cell under the mixed operator; it exists as a
    diagnostic knob and stays at the even split by default.
    """

    cr: float = 0.2
    operator_mode: str = GLOBAL
    indexing_probability: float = 0.5
    local_probability: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.cr <= 1.0:
            raise ValueError("cr must lie in [0, 1]")
        if not 0.0 <= self.indexing_probability <= 1.0:
            raise ValueError("indexing_probability must lie in [0, 1]")
        if self.operator_mode not in (GLOBAL, MIXED):
            raise ValueError(f"unknown operator mode {self.operator_mode!r}")


@dataclass
class EvolutionReport:
    """Classifier ids touched by one evolution event in one cell."""

    cell: int
    kept: list[int] = field(default_factory=list)
    discarded: list[int] = field(default_factory=list)
    created: list[int] = field(default_factory=list)
    indexed: list[int] = field(default_factory=list)


def should_evolve(system: SocSystem, cell_index: int) -> bool:
    """True once the cell's experience exceeds iota * (beta + nu), strictly."""
    cell = system.cells[cell_index]
    if not cell.initialized:
        raise ValueError(f"cell {cell_index} is not initialized")
    subpop_size = system.soc.beta + system.soc.nu
    return cell.experience > system.soc.iota * subpop_size


def de_mutant(a: np.ndarray, b: np.ndarray, c: np.ndarray, f: float) -> np.ndarray:
    """rand/1 mutant vector: a + f * (b - c)."""
    return a + f * (b - c)


def binomial_crossover(
    mutant: np.ndarray, base: np.ndarray, cr: float, rng: np.random.Generator
) -> np.ndarray:
    """Binomial crossover: each gene comes from the mutant with probability
    ``cr``, from the base otherwise, with one uniformly chosen gene always
    taken from the mutant."""
    out = base.copy()
    forced = int(rng.integers(len(mutant)))
    for j in range(len(mutant)):
        if j == forced or rng.random() < cr:
            out[j] = mutant[j]
    return out


def _draw_parent_id(system: SocSystem, cell_index: int, global_ids: list[int]) -> int:
    """One parent draw: global, or (mixed mode, half the time) from the
    distinct classifiers indexed by a random initialized adjacent cell."""
    rng = system.rng_evo
    if system.evo.operator_mode == MIXED and rng.random() < system.evo.local_probability:
        neighbors = [
            int(i) for i in system.adjacent_cells(cell_index) if system.cells[i].initialized
        ]
        if neighbors:
            cell = system.cells[neighbors[int(rng.integers(len(neighbors)))]]
            local_ids = list(dict.fromkeys(s.classifier_id for s in cell.slots()))
            return local_ids[int(rng.integers(len(local_ids)))]
    return global_ids[int(rng.integers(len(global_ids)))]


def de_offspring(system: SocSystem, cell_index: int) -> np.ndarray:
    """Breed one chromosome for a cell via rand/1/bin differential evolution.

    Three distinct stored classifiers (identity-distinct, so numerosity does
    not weight the draw) form the mutant; the trial vector crosses it with a
    base parent from the cell's current best group and is clamped into the
    action box.  With fewer than three distinct classifiers anywhere, a fresh
    random chromosome is returned instead.
    """
    rng = system.rng_evo
    global_ids = list(system.store.keys())
    if len(global_ids) < 3:
        return system.rng_pop.uniform(-1.0, 1.0, system.action_dim)

    chosen: list[int] = []
    for _ in range(3):
        for _ in range(_DISTINCT_DRAW_RETRIES):
            cid = _draw_parent_id(system, cell_index, global_ids)
            if cid not in chosen:
                break
        else:
            remaining = [i for i in global_ids if i not in chosen]
            cid = remaining[int(rng.integers(len(remaining)))]
        chosen.append(cid)

    a, b, c = (system.store[cid].genes for cid in chosen)
    f = float(rng.random())
    mutant = de_mutant(a, b, c, f)

    best = system.cells[cell_index].best
    base = system.store[best[int(rng.integers(len(best)))].classifier_id].genes
    trial = binomial_crossover(mutant, base, system.evo.cr, rng)
    return np.clip(trial, -1.0, 1.0)


def evolve_cell(system: SocSystem, cell_index: int) -> EvolutionReport:
    """Run one local evolution event in a cell.

    All slots are ranked by fitness (older slot wins ties); the top beta keep
    their fitness values and become the best group, the rest are removed.
    The novel group is rebuilt with nu slots, each created by indexing a
    uniformly random stored classifier or by a DE offspring, with equal
    probability.  The cell's experience restarts at zero.
    """
    rng = system.rng_evo
    cell = system.cells[cell_index]
    ranked = sorted(cell.slots(), key=lambda s: (-s.fitness, s.birth))
    beta = system.soc.beta
    keep, drop = ranked[:beta], ranked[beta:]

    report = EvolutionReport(cell=cell_index)
    report.kept = [s.classifier_id for s in keep]
    report.discarded = [s.classifier_id for s in drop]

    for slot in drop:
        group = BEST if slot in cell.best else NOVEL
        system.remove_slot(cell_index, group, slot)
    cell.best = keep
    cell.novel = []

    for _ in range(system.soc.nu):
        if rng.random() < system.evo.indexing_probability:
            ids = list(system.store.keys())
            cid = ids[int(rng.integers(len(ids)))]
            system.add_index(cell_index, NOVEL, cid)
            report.indexed.append(cid)
        else:
            child = system.add_classifier(de_offspring(system, cell_index))
            system.add_index(cell_index, NOVEL, child.id)
            report.created.append(child.id)

    cell.experience = 0
    return report
