"""Niched fitness update: Q-learning-style bootstrapping per (cell, slot).

The slot acted at cycle t-1 is re-estimated from the reward it earned plus
the discounted maximum fitness of the cell activated at cycle t, and nudged
toward that estimate by the Widrow-Hoff rule.  Only the one slot named by
the pending record changes; the classifier's fitness in every other cell is
untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .population import SocSystem


@dataclass
class PendingUpdate:
    """What acted last cycle, kept until the next cycle resolves its value."""

    cell: int
    group: str
    slot_id: int
    action: np.ndarray
    observation: np.ndarray


def max_cell_fitness(system: SocSystem, cell_index: int) -> float:
    """Largest slot fitness inside an initialized cell.

    Scans the whole subpopulation (best and novel) by default; restricted to
    the best group when the system's ``bootstrap_includes_novel`` is off.
    """
    cell = system.cells[cell_index]
    if not cell.initialized:
        raise ValueError(f"cell {cell_index} is not initialized")
    slots = cell.slots() if system.soc.bootstrap_includes_novel else cell.best
    return max(slot.fitness for slot in slots)


def apply_update(
    system: SocSystem,
    pending: PendingUpdate,
    reward: float,
    next_cell: int | None,
    trace: list | None = None,
) -> float | None:
    """Resolve a pending fitness update.

    The target is ``reward + gamma * max_cell_fitness(next_cell)``, or bare
    ``reward`` on a terminal step (goal reached or trial cut off).  Returns
    the slot's new fitness, or None when the slot was consumed by an
    intervening evolution event (the update is dropped and counted in
    ``system.dropped_updates``).
    """
    slot = system.find_slot(pending.cell, pending.slot_id)
    if slot is None:
        system.dropped_updates += 1
        return None
    if next_cell is None:
        next_max = None
        target = reward
    else:
        next_max = max_cell_fitness(system, next_cell)
        target = reward + system.soc.gamma * next_max
    old = slot.fitness
    slot.fitness = old + system.soc.eta * (target - old)
    if trace is not None:
        trace.append((pending.cell, pending.slot_id, old, reward, next_max, slot.fitness))
    return slot.fitness
