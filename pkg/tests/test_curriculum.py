"""Task enumeration, curriculum sampling and advancement."""

import itertools

import numpy as np
import pytest
from scipy import stats

from specrl import ltl
from specrl.curriculum import (CurriculumError, enumerate_sequences,
                               enumerate_tasks, make_curriculum,
                               record_eval_and_maybe_advance, sample_task)
from specrl.scenarios import make_scenario

SC1 = make_scenario("nav_scenario1")
SC2 = make_scenario("nav_scenario2")


def brute_force_sequences(multiset, k):
    """Independent enumeration: permute distinct items, dedup as sequences."""
    items = []
    for name, count in multiset:
        items.extend((name, i) for i in range(count))
    seqs = set()
    for perm in itertools.permutations(items, k):
        seqs.add(tuple(name for name, _i in perm))
    return seqs


class TestEnumeration:
    def test_scenario1_level1(self):
        tasks = enumerate_tasks(SC1, 1)
        rendered = [ltl.to_string(t, SC1.symbols) for t in tasks]
        assert rendered == ["F reach_bluebox", "F reach_redbox",
                            "F check_letter_left", "F check_letter_right"]

    def test_scenario1_level2_count(self):
        assert len(enumerate_tasks(SC1, 2)) == 12  # 4 * 3 ordered pairs

    def test_plain_set_counts_match_factorial_formula(self):
        import math
        for k in range(1, 5):
            expected = 24 // math.factorial(4 - k)  # n!/(n-k)!
            assert len(enumerate_tasks(SC1, k)) == expected

    def test_multiset_counts_match_brute_force(self):
        for k in range(1, 7):
            seqs = enumerate_sequences(SC2.multiset, k)
            assert len(seqs) == len(set(seqs))
            assert set(seqs) == brute_force_sequences(SC2.multiset, k)

    def test_occurrence_ids_by_position(self):
        by_text = {ltl.to_string(t, SC2.symbols): t for t in enumerate_tasks(SC2, 2)}
        assert ("F (check_letter_left#1 & F check_letter_left#2)" in by_text)
        assert ("F (check_letter_left#2 & F check_letter_left#1)" not in by_text)

    def test_every_level_k_task_has_k_occurrences(self):
        for k in range(1, 5):
            for task in enumerate_tasks(SC1, k):
                assert len(task.atoms()) == k

    def test_chain_progression_depth_is_k_plus_1(self):
        # longest progression chain (distinct formulas) from task to true
        def depth(phi, seen=None):
            if phi.kind == ltl.TRUE:
                return 1
            best = 0
            for sigma_size in range(1, len(phi.atoms()) + 1):
                for sigma in itertools.combinations(sorted(phi.atoms()), sigma_size):
                    nxt = ltl.progress(phi, frozenset(sigma))
                    if nxt != phi and nxt.kind != ltl.FALSE:
                        best = max(best, depth(nxt))
            return best + 1

        for k in range(1, 4):
            for task in enumerate_tasks(SC2, k)[:6]:
                assert depth(task) == k + 1

    def test_level_out_of_range(self):
        with pytest.raises(CurriculumError):
            enumerate_tasks(SC1, 0)
        with pytest.raises(CurriculumError):
            enumerate_tasks(SC1, 5)

    def test_inspect_has_two_levels(self):
        insp = make_scenario("inspect3d")
        assert insp.max_level == 2
        assert len(enumerate_tasks(insp, 1)) == 3
        assert len(enumerate_tasks(insp, 2)) == 6


class TestSampling:
    def test_level1_only_singletons(self):
        cs = make_curriculum(SC1, "normal")
        rng = np.random.default_rng(0)
        level1 = set(cs.levels[0])
        for _ in range(500):
            assert sample_task(cs, rng) in level1

    def test_level2_uniform_chi_square(self):
        cs = make_curriculum(SC1, "normal")
        cs = record_eval_and_maybe_advance(cs, {t: 1.0 for t in cs.available_tasks()})
        assert cs.level == 2
        available = cs.available_tasks()
        assert len(available) == 16
        rng = np.random.default_rng(1)
        index = {t: i for i, t in enumerate(available)}
        counts = np.zeros(len(available))
        for _ in range(10000):
            counts[index[sample_task(cs, rng)]] += 1
        assert stats.chisquare(counts).pvalue > 0.05
        assert np.all(np.abs(counts / 10000 - 1 / 16) < 0.01)

    def test_anti_mode_starts_with_hardest(self):
        cs = make_curriculum(SC1, "anti")
        level4 = set(cs.levels[3])
        rng = np.random.default_rng(2)
        for _ in range(300):
            assert sample_task(cs, rng) in level4

    def test_anti_mode_grows_downward(self):
        cs = make_curriculum(SC1, "anti")
        cs = record_eval_and_maybe_advance(cs, {t: 1.0 for t in cs.available_tasks()})
        assert cs.level == 2
        assert set(cs.available_tasks()) == set(cs.levels[2]) | set(cs.levels[3])

    def test_none_mode_samples_everything(self):
        cs = make_curriculum(SC1, "none")
        assert cs.level == cs.max_level == 4
        assert len(cs.available_tasks()) == 4 + 12 + 24 + 24
        rng = np.random.default_rng(3)
        drawn_levels = set()
        for _ in range(2000):
            drawn_levels.add(len(sample_task(cs, rng).atoms()))
        assert drawn_levels == {1, 2, 3, 4}


class TestAdvancement:
    def test_advance_above_threshold(self):
        cs = make_curriculum(SC1)
        cs2 = record_eval_and_maybe_advance(cs, {t: 0.95 for t in cs.available_tasks()})
        assert cs2.level == 2

    def test_exactly_090_does_not_advance(self):
        cs = make_curriculum(SC1)
        cs2 = record_eval_and_maybe_advance(cs, {t: 0.9 for t in cs.available_tasks()})
        assert cs2.level == 1

    def test_ceiling(self):
        cs = make_curriculum(SC1)
        for _ in range(10):
            cs = record_eval_and_maybe_advance(
                cs, {t: 1.0 for t in cs.available_tasks()})
        assert cs.level == 4

    def test_advance_is_single_step(self):
        cs = make_curriculum(SC1)
        cs2 = record_eval_and_maybe_advance(cs, {t: 1.0 for t in cs.available_tasks()})
        assert cs2.level == cs.level + 1

    def test_missing_task_rejected(self):
        cs = make_curriculum(SC1)
        summary = {t: 1.0 for t in cs.available_tasks()}
        summary.pop(next(iter(summary)))
        with pytest.raises(CurriculumError, match="missing"):
            record_eval_and_maybe_advance(cs, summary)

    def test_none_mode_pinned(self):
        cs = make_curriculum(SC1, "none")
        cs2 = record_eval_and_maybe_advance(cs, {t: 1.0 for t in cs.available_tasks()})
        assert cs2.level == 4

    def test_monotone_under_noise(self):
        cs = make_curriculum(SC1)
        rng = np.random.default_rng(4)
        history = [cs.level]
        for _ in range(30):
            rates = {t: float(rng.uniform(0.5, 1.0)) for t in cs.available_tasks()}
            cs = record_eval_and_maybe_advance(cs, rates)
            history.append(cs.level)
        assert all(b >= a for a, b in zip(history, history[1:]))
