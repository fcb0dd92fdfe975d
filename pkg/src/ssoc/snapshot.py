"""Versioned snapshot of a full system: grid weights, cells, store, rng.

Snapshots are plain JSON so they can be inspected, diffed and loaded across
platforms; they support checkpoint/resume and the post-hoc map sampling.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .evolution import EvoParams
from .population import CellState, Classifier, Slot, SocParams, SocSystem
from .som import SomGrid, SomMode, SomParams

FORMAT_VERSION = 1


def _slot_state(slot: Slot) -> dict:
    return {"classifier": slot.classifier_id, "fitness": slot.fitness, "birth": slot.birth}


def to_state(system: SocSystem) -> dict:
    """Full system state as a JSON-serializable dict."""
    grid = system.grid
    return {
        "format_version": FORMAT_VERSION,
        "grid": {
            "width": grid.width,
            "height": grid.height,
            "dim": grid.dim,
            "iteration": grid.iteration,
            "max_error": grid.max_error,
            "weights": grid.weights.tolist(),
            "params": {
                "mode": grid.params.mode.value,
                "theta_min": grid.params.theta_min,
                "theta_max": grid.params.theta_max,
                "cell_update_threshold": grid.params.cell_update_threshold,
                "classic_rate_scale": grid.params.classic_rate_scale,
                "classic_rate_decay": grid.params.classic_rate_decay,
            },
        },
        "soc_params": {
            "beta": system.soc.beta,
            "nu": system.soc.nu,
            "iota": system.soc.iota,
            "eta": system.soc.eta,
            "gamma": system.soc.gamma,
            "initial_fitness": system.soc.initial_fitness,
            "bootstrap_includes_novel": system.soc.bootstrap_includes_novel,
        },
        "evo_params": {
            "cr": system.evo.cr,
            "operator_mode": system.evo.operator_mode,
            "indexing_probability": system.evo.indexing_probability,
            "local_probability": system.evo.local_probability,
        },
        "action_dim": system.action_dim,
        "cells": [
            {
                "initialized": cell.initialized,
                "experience": cell.experience,
                "best": [_slot_state(s) for s in cell.best],
                "novel": [_slot_state(s) for s in cell.novel],
            }
            for cell in system.cells
        ],
        "store": [
            {"id": c.id, "genes": c.genes.tolist(), "numerosity": c.numerosity}
            for c in system.store.values()
        ],
        "counters": {
            "next_classifier_id": system._next_classifier_id,
            "next_slot_birth": system._next_slot_birth,
            "dropped_updates": system.dropped_updates,
        },
        "rng": {
            "pop": system.rng_pop.bit_generator.state,
            "evo": system.rng_evo.bit_generator.state,
        },
    }


def from_state(state: dict) -> SocSystem:
    """Rebuild a system from a snapshot dict."""
    version = state.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported snapshot format version {version!r}")

    g = state["grid"]
    params = SomParams(
        mode=SomMode(g["params"]["mode"]),
        theta_min=g["params"]["theta_min"],
        theta_max=g["params"]["theta_max"],
        cell_update_threshold=g["params"]["cell_update_threshold"],
        classic_rate_scale=g["params"]["classic_rate_scale"],
        classic_rate_decay=g["params"]["classic_rate_decay"],
    )
    sp = SocParams(**state["soc_params"])
    ep = EvoParams(**state["evo_params"])
    system = SocSystem(
        g["width"],
        g["height"],
        som_params=params,
        soc_params=sp,
        evo_params=ep,
        seed=0,
        action_dim=state["action_dim"],
        observation_dim=g["dim"],
    )
    system.grid = SomGrid(
        g["width"],
        g["height"],
        dim=g["dim"],
        params=params,
        weights=np.array(g["weights"], dtype=float),
    )
    system.grid.iteration = g["iteration"]
    system.grid.max_error = g["max_error"]

    system.store = {
        c["id"]: Classifier(
            id=c["id"], genes=np.array(c["genes"], dtype=float), numerosity=c["numerosity"]
        )
        for c in state["store"]
    }
    cells = []
    for cs in state["cells"]:
        cell = CellState()
        cell.initialized = cs["initialized"]
        cell.experience = cs["experience"]
        cell.best = [Slot(s["classifier"], s["fitness"], s["birth"]) for s in cs["best"]]
        cell.novel = [Slot(s["classifier"], s["fitness"], s["birth"]) for s in cs["novel"]]
        cells.append(cell)
    system.cells = cells

    counters = state["counters"]
    system._next_classifier_id = counters["next_classifier_id"]
    system._next_slot_birth = counters["next_slot_birth"]
    system.dropped_updates = counters["dropped_updates"]

    system.rng_pop.bit_generator.state = state["rng"]["pop"]
    system.rng_evo.bit_generator.state = state["rng"]["evo"]
    return system


def save(system: SocSystem, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_state(system)))


def load(path: str | Path) -> SocSystem:
    return from_state(json.loads(Path(path).read_text()))
