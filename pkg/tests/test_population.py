"""Population store, cell initialization and activation."""

import numpy as np
import pytest

from ssoc.population import BEST, EXPLOIT, EXPLORE, NOVEL, SocParams, SocSystem


def make_system(width=10, height=10, seed=0, **soc_kw):
    return SocSystem(width, height, soc_params=SocParams(**soc_kw), seed=seed)


def audit(system):
    counts = system.slot_reference_counts()
    numerosities = {cid: c.numerosity for cid, c in system.store.items()}
    return counts, numerosities


class TestCellInitialization:
    def test_first_cell_gets_fresh_classifiers_everywhere(self):
        system = make_system()
        system.ensure_cell_initialized(0)
        cell = system.cells[0]
        assert len(cell.best) == 2 and len(cell.novel) == 5
        assert len(system.store) == 7
        assert all(c.numerosity == 1 for c in system.store.values())
        ids = {s.classifier_id for s in cell.slots()}
        assert len(ids) == 7

    def test_idempotent(self):
        system = make_system()
        system.ensure_cell_initialized(3)
        before = len(system.store)
        system.ensure_cell_initialized(3)
        assert len(system.store) == before

    def test_copies_best_from_most_valuable_neighbor(self):
        system = make_system()
        target = 5 * 10 + 5
        a = 5 * 10 + 6  # Chebyshev 1 from target
        b = 5 * 10 + 7  # Chebyshev 2 from target
        system.ensure_cell_initialized(a)
        system.ensure_cell_initialized(b)
        # distinct best groups (b would otherwise have copied a's)
        system.cells[a].experience = 10  # score 10 / 1^2 = 10
        system.cells[b].experience = 30  # score 30 / 2^2 = 7.5
        a_best = [s.classifier_id for s in system.cells[a].best]
        b_best = [s.classifier_id for s in system.cells[b].best]
        assert set(a_best).isdisjoint(b_best)

        system.ensure_cell_initialized(target)
        got = [s.classifier_id for s in system.cells[target].best]
        assert got == a_best
        for cid in a_best:
            assert system.store[cid].numerosity == 2

    def test_donor_tie_breaks_to_lowest_row_major_index(self):
        system = make_system()
        target = 5 * 10 + 5
        left, right = target - 1, target + 1  # both Chebyshev 1
        system.ensure_cell_initialized(right)
        system.ensure_cell_initialized(left)
        system.cells[left].experience = 7
        system.cells[right].experience = 7
        system.ensure_cell_initialized(target)
        got = [s.classifier_id for s in system.cells[target].best]
        assert got == [s.classifier_id for s in system.cells[left].best]

    def test_copied_best_slots_start_at_initial_fitness(self):
        system = make_system()
        donor = 4
        system.ensure_cell_initialized(donor)
        for s in system.cells[donor].best:
            s.fitness = 123.0
        system.cells[donor].experience = 5
        system.ensure_cell_initialized(5)
        assert all(s.fitness == 0.0 for s in system.cells[5].best)

    def test_neighbors_beyond_radius_four_ignored(self):
        system = make_system(12, 1)
        system.ensure_cell_initialized(0)
        system.cells[0].experience = 50
        system.ensure_cell_initialized(11)  # Chebyshev 11 from cell 0
        best_ids = {s.classifier_id for s in system.cells[11].best}
        donor_ids = {s.classifier_id for s in system.cells[0].best}
        assert best_ids.isdisjoint(donor_ids)


class TestActivate:
    def test_exploit_returns_the_single_distinct_best_action(self):
        system = make_system(seed=1)
        obs = np.array([0.4, 0.6])
        winner = system.grid.find_winner(obs)
        system.ensure_cell_initialized(winner)
        cell = system.cells[winner]
        c = system.add_classifier(np.array([0.3, -0.2]))
        for slot in list(cell.best):
            system.remove_slot(winner, BEST, slot)
        system.add_index(winner, BEST, c.id)
        system.add_index(winner, BEST, c.id)
        act = system.activate(obs, EXPLOIT)
        assert act.cell == winner
        assert np.allclose(act.action, (0.3, -0.2))

    def test_experience_counts_activations(self):
        system = make_system(seed=2)
        obs = np.array([0.25, 0.75])
        first = system.activate(obs, EXPLORE)
        second = system.activate(obs, EXPLORE)
        assert first.cell == second.cell
        assert system.cells[first.cell].experience == 2

    def test_explore_choice_uniform_over_novel_slots(self):
        system = make_system(seed=3)
        obs = np.array([0.5, 0.5])
        n = 10_000
        hits = {}
        for _ in range(n):
            act = system.activate(obs, EXPLORE)
            hits[act.slot_id] = hits.get(act.slot_id, 0) + 1
        assert len(hits) == 5
        for count in hits.values():
            assert abs(count / n - 0.2) <= 0.02

    def test_activation_initializes_winner(self):
        system = make_system(seed=4)
        act = system.activate(np.array([0.9, 0.1]), EXPLOIT)
        assert system.cells[act.cell].initialized
        assert system.find_slot(act.cell, act.slot_id) is not None

    def test_action_is_a_copy(self):
        system = make_system(seed=5)
        act = system.activate(np.array([0.2, 0.2]), EXPLOIT)
        act.action[0] = 99.0
        assert all(abs(c.genes[0]) <= 1.0 for c in system.store.values())

    def test_unknown_mode_rejected(self):
        system = make_system(seed=6)
        with pytest.raises(ValueError):
            system.activate(np.array([0.5, 0.5]), "greedy")


class TestIndexBookkeeping:
    def test_remove_last_slot_deletes_classifier(self):
        system = make_system()
        system.ensure_cell_initialized(0)
        slot = system.cells[0].novel[0]
        cid = slot.classifier_id
        assert system.store[cid].numerosity == 1
        system.remove_slot(0, NOVEL, slot)
        assert cid not in system.store

    def test_add_then_remove_restores_counts(self):
        system = make_system()
        system.ensure_cell_initialized(0)
        cid = system.cells[0].best[0].classifier_id
        before_counts, before_num = audit(system)
        slot = system.add_index(0, NOVEL, cid)
        system.remove_slot(0, NOVEL, slot)
        assert audit(system) == (before_counts, before_num)

    def test_removing_nonexistent_slot_is_an_error(self):
        system = make_system()
        system.ensure_cell_initialized(0)
        slot = system.cells[0].novel[0]
        system.remove_slot(0, NOVEL, slot)
        with pytest.raises(ValueError):
            system.remove_slot(0, NOVEL, slot)

    def test_numerosity_matches_slot_count_after_random_churn(self):
        system = make_system(seed=7)
        rng = np.random.default_rng(7)
        for i in range(6):
            system.ensure_cell_initialized(i)
        for _ in range(10_000):
            cell_index = int(rng.integers(6))
            group = BEST if rng.random() < 0.5 else NOVEL
            slots = system.cells[cell_index].group(group)
            if rng.random() < 0.5 and len(slots) > 1:
                system.remove_slot(cell_index, group, slots[int(rng.integers(len(slots)))])
            else:
                cid = list(system.store.keys())[int(rng.integers(len(system.store)))]
                system.add_index(cell_index, group, cid)
        counts, numerosities = audit(system)
        assert counts == numerosities
        assert all(n >= 1 for n in numerosities.values())

    def test_niched_fitness_isolation(self):
        system = make_system()
        system.ensure_cell_initialized(0)
        cid = system.cells[0].best[0].classifier_id
        other = system.add_index(1, BEST, cid)
        other_bytes = other.fitness
        system.cells[0].best[0].fitness = 777.0
        assert other.fitness == other_bytes
        assert system.find_slot(1, other.birth).fitness == 0.0

    def test_group_sizes_exact_after_initialization(self):
        system = make_system(seed=8)
        rng = np.random.default_rng(9)
        for _ in range(200):
            system.activate(rng.random(2), EXPLORE if rng.random() < 0.5 else EXPLOIT)
        for cell in system.cells:
            if cell.initialized:
                assert len(cell.best) == 2
                assert len(cell.novel) == 5
