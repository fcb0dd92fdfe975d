"""Classifier population structured by a SOM lattice.

Classifiers are bare action chromosomes kept once in a central store; grid
cells index them through slots.  A classifier's numerosity is the number of
slots referencing it, and it is deleted from the store when that count
reaches zero.  Each slot carries its own fitness: the same classifier can be
good in one cell and poor in another.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .som import SomGrid, SomParams

BEST = "best"
NOVEL = "novel"

EXPLORE = "explore"
EXPLOIT = "exploit"

#: Cells this far (Chebyshev) from a fresh cell are searched for a best-group donor.
NEIGHBOR_COPY_RADIUS = 4


@dataclass(slots=True)
class Classifier:
    """An action chromosome plus its reference count."""

    id: int
    genes: np.ndarray  # shape (action_dim,), components in [-1, 1]
    numerosity: int = 0


@dataclass(slots=True)
class Slot:
    """One cell-local index of a classifier with its niched fitness.

    ``birth`` is a globally unique creation stamp; it identifies the slot and
    orders slots by age when ranking ties must be broken.
    """

    classifier_id: int
    fitness: float
    birth: int


class CellState:
    """One grid cell's subpopulation: best and novel slot groups."""

    __slots__ = ("best", "novel", "experience", "initialized")

    def __init__(self) -> None:
        self.best: list[Slot] = []
        self.novel: list[Slot] = []
        self.experience = 0
        self.initialized = False

    def slots(self) -> list[Slot]:
        return self.best + self.novel

    def group(self, name: str) -> list[Slot]:
        if name == BEST:
            return self.best
        if name == NOVEL:
            return self.novel
        raise ValueError(f"unknown group {name!r}")


@dataclass
class SocParams:
    """Population and credit parameters.

    ``iota`` scales the evolution trigger: a cell evolves once its experience
    exceeds iota * (beta + nu).  ``bootstrap_includes_novel`` widens the max
    used for fitness bootstrapping from the best group to the whole cell.
    """

    beta: int = 2
    nu: int = 5
    iota: float = 20.0
    eta: float = 0.2
    gamma: float = 0.90
    initial_fitness: float = 0.0
    bootstrap_includes_novel: bool = True


@dataclass
class Activation:
    """Outcome of presenting one observation to the system."""

    cell: int
    group: str
    slot_id: int
    action: np.ndarray


class SocSystem:
    """SOM grid plus per-cell subpopulations and the classifier store.

    Single-writer: one experiment loop owns and mutates a system; replicate
    runs each build their own.
    """

    def __init__(
        self,
        width: int,
        height: int,
        *,
        som_params: SomParams | None = None,
        soc_params: SocParams | None = None,
        evo_params=None,
        seed=None,
        action_dim: int = 2,
        observation_dim: int = 2,
    ) -> None:
        from .evolution import EvoParams  # local import to avoid a cycle

        seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        weights_seq, pop_seq, evo_seq = seq.spawn(3)

        self.soc = soc_params if soc_params is not None else SocParams()
        self.evo = evo_params if evo_params is not None else EvoParams()
        self.grid = SomGrid(
            width,
            height,
            dim=observation_dim,
            params=som_params,
            rng=np.random.default_rng(weights_seq),
        )
        self.cells = [CellState() for _ in range(width * height)]
        self.store: dict[int, Classifier] = {}
        self.action_dim = action_dim
        self.rng_pop = np.random.default_rng(pop_seq)
        self.rng_evo = np.random.default_rng(evo_seq)
        self._next_classifier_id = 0
        self._next_slot_birth = 0
        self.dropped_updates = 0
        self._adjacency: dict[int, np.ndarray] = {}

    # -- store bookkeeping ---------------------------------------------------

    def _random_genes(self) -> np.ndarray:
        return self.rng_pop.uniform(-1.0, 1.0, self.action_dim)

    def add_classifier(self, genes: np.ndarray) -> Classifier:
        """Put a new chromosome in the store; callers must index it."""
        genes = np.asarray(genes, dtype=float)
        if genes.shape != (self.action_dim,):
            raise ValueError(f"genes must have shape ({self.action_dim},)")
        c = Classifier(id=self._next_classifier_id, genes=genes)
        self._next_classifier_id += 1
        self.store[c.id] = c
        return c

    def add_index(self, cell_index: int, group: str, classifier_id: int) -> Slot:
        """Create a slot in the given cell group referencing a stored
        classifier; numerosity rises by one and the slot starts at the
        initial fitness."""
        c = self.store[classifier_id]
        slot = Slot(
            classifier_id=classifier_id,
            fitness=self.soc.initial_fitness,
            birth=self._next_slot_birth,
        )
        self._next_slot_birth += 1
        self.cells[cell_index].group(group).append(slot)
        c.numerosity += 1
        return slot

    def remove_slot(self, cell_index: int, group: str, slot: Slot) -> None:
        """Drop a slot; the classifier loses one numerosity and is deleted
        from the store when none remain."""
        lst = self.cells[cell_index].group(group)
        try:
            lst.remove(slot)
        except ValueError:
            raise ValueError(
                f"slot {slot.birth} not present in cell {cell_index} group {group}"
            ) from None
        c = self.store[slot.classifier_id]
        c.numerosity -= 1
        if c.numerosity == 0:
            del self.store[slot.classifier_id]

    def find_slot(self, cell_index: int, slot_id: int) -> Slot | None:
        """Look a slot up by its unique birth stamp, in either group."""
        cell = self.cells[cell_index]
        for slot in cell.best:
            if slot.birth == slot_id:
                return slot
        for slot in cell.novel:
            if slot.birth == slot_id:
                return slot
        return None

    def slot_reference_counts(self) -> dict[int, int]:
        """Full-scan count of slots per classifier id (audit helper)."""
        counts: dict[int, int] = {}
        for cell in self.cells:
            for slot in cell.best:
                counts[slot.classifier_id] = counts.get(slot.classifier_id, 0) + 1
            for slot in cell.novel:
                counts[slot.classifier_id] = counts.get(slot.classifier_id, 0) + 1
        return counts

    def adjacent_cells(self, cell_index: int) -> np.ndarray:
        """Indices of lattice neighbors at Chebyshev distance exactly 1."""
        cached = self._adjacency.get(cell_index)
        if cached is None:
            cached = np.nonzero(self.grid.cheb[cell_index] == 1)[0]
            self._adjacency[cell_index] = cached
        return cached

    # -- cell lifecycle --------------------------------------------------------

    def _best_donor(self, cell_index: int) -> int | None:
        """Initialized neighbor (Chebyshev <= NEIGHBOR_COPY_RADIUS) with
        experience > 0 maximizing experience / distance^2; ties go to the
        lowest row-major index."""
        dist_row = self.grid.cheb[cell_index]
        candidates = np.nonzero((dist_row > 0) & (dist_row <= NEIGHBOR_COPY_RADIUS))[0]
        best_index: int | None = None
        best_score = 0.0
        for idx in candidates:
            cell = self.cells[idx]
            if not cell.initialized or cell.experience <= 0:
                continue
            score = cell.experience / float(dist_row[idx]) ** 2
            if best_index is None or score > best_score:
                best_index = int(idx)
                best_score = score
        return best_index

    def ensure_cell_initialized(self, cell_index: int) -> None:
        """Populate a cell the first time it wins the competition.

        Novel slots always reference fresh random classifiers.  Best slots
        copy (re-index) the best group of the most experienced nearby cell
        when one exists, else they are fresh random classifiers too.  All new
        slots start at the initial fitness.
        """
        cell = self.cells[cell_index]
        if cell.initialized:
            return
        for _ in range(self.soc.nu):
            c = self.add_classifier(self._random_genes())
            self.add_index(cell_index, NOVEL, c.id)
        donor = self._best_donor(cell_index)
        if donor is None:
            for _ in range(self.soc.beta):
                c = self.add_classifier(self._random_genes())
                self.add_index(cell_index, BEST, c.id)
        else:
            for slot in self.cells[donor].best:
                self.add_index(cell_index, BEST, slot.classifier_id)
        cell.initialized = True

    # -- activation -----------------------------------------------------------

    def activate(self, observation: np.ndarray, mode: str) -> Activation:
        """Present an observation; the winning cell answers with an action.

        The winner is initialized on demand, a uniformly random slot is drawn
        from its novel group (explore) or best group (exploit), the grid
        weights adapt to the observation and the cell gains one experience.
        """
        winner = self.grid.update(observation)
        self.ensure_cell_initialized(winner)
        cell = self.cells[winner]
        if mode == EXPLORE:
            group_name, group = NOVEL, cell.novel
        elif mode == EXPLOIT:
            group_name, group = BEST, cell.best
        else:
            raise ValueError(f"unknown activation mode {mode!r}")
        slot = group[int(self.rng_pop.integers(len(group)))]
        cell.experience += 1
        action = self.store[slot.classifier_id].genes.copy()
        return Activation(cell=winner, group=group_name, slot_id=slot.birth, action=action)
