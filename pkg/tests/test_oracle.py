import math

import numpy as np
import pytest

from hodep.model import DEP1, GCH2, Dep, Gch, PartScoreTable
from hodep.oracle import (
    brute_force,
    enumerate_projective,
    projective_tree_count,
)


class TestEnumeration:
    def test_single_word(self):
        assert enumerate_projective(1) == [(0,)]

    def test_two_words(self):
        assert enumerate_projective(2) == [(0, 0), (0, 1), (2, 0)]

    def test_counts_match_closed_form(self):
        for n in range(1, 7):
            assert len(enumerate_projective(n)) == projective_tree_count(n)

    def test_known_counts(self):
        assert [projective_tree_count(n) for n in range(1, 5)] == [1, 3, 12, 55]

    def test_guard(self):
        with pytest.raises(ValueError):
            enumerate_projective(9)
        with pytest.raises(ValueError):
            enumerate_projective(0)


class TestBruteForce:
    def test_uniform_two_words(self):
        result = brute_force(PartScoreTable.zeros(DEP1, 2))
        assert result.log_partition == pytest.approx(math.log(3), abs=1e-12)
        assert result.marginals[Dep(0, 1)] == pytest.approx(2 / 3, abs=1e-12)
        assert result.marginals[Dep(1, 2)] == pytest.approx(1 / 3, abs=1e-12)

    def test_single_tree(self, rng):
        scores = PartScoreTable.random(DEP1, 1, rng)
        result = brute_force(scores)
        assert result.log_partition == pytest.approx(scores.table[0, 1])
        assert result.marginals[Dep(0, 1)] == pytest.approx(1.0)

    def test_grandchild_worked_case(self):
        scores = PartScoreTable.zeros(GCH2, 2)
        scores.set_score(Gch(0, 1, 2), 1.0)
        result = brute_force(scores)
        assert result.log_partition == pytest.approx(math.log(2 + math.e), abs=1e-12)

    def test_probabilities_normalize(self, rng):
        for n in (2, 3, 4):
            scores = PartScoreTable.random(DEP1, n, rng)
            result = brute_force(scores)
            total = math.fsum(
                math.exp(
                    sum(scores.table[h, m] for m, h in enumerate(t, 1))
                    - result.log_partition
                )
                for t in result.trees
            )
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_head_marginals_sum_to_one(self, rng):
        scores = PartScoreTable.random(DEP1, 4, rng)
        result = brute_force(scores)
        for t in range(1, 5):
            mass = sum(
                result.marginals.get(Dep(s, t), 0.0) for s in range(5) if s != t
            )
            assert mass == pytest.approx(1.0, abs=1e-12)

    def test_best_score_below_partition(self, rng):
        for n in (2, 3, 4):
            scores = PartScoreTable.random(DEP1, n, rng)
            result = brute_force(scores)
            assert result.best_score <= result.log_partition

    def test_tie_break_lexicographic(self):
        result = brute_force(PartScoreTable.zeros(DEP1, 3))
        assert result.best_tree == (0, 0, 0)
