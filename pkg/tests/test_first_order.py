import math

import numpy as np
import pytest

from hodep.first_order import (
    decode_dep1,
    inside_dep1,
    marginal_table_dep1,
    marginals_dep1,
    outside_dep1,
)
from hodep.model import DEP1, Dep, PartScoreTable, is_projective, tree_score
from hodep.oracle import brute_force, oracle_marginal_table


def random_tables(n, count, seed=1):
    rng = np.random.default_rng(seed)
    return [PartScoreTable.random(DEP1, n, rng) for _ in range(count)]


class TestInside:
    def test_uniform_counts(self):
        for n, count in [(1, 1), (2, 3), (3, 12), (4, 55)]:
            _, log_z = inside_dep1(PartScoreTable.zeros(DEP1, n))
            assert log_z == pytest.approx(math.log(count), abs=1e-10)

    def test_single_word(self):
        scores = PartScoreTable.zeros(DEP1, 1)
        scores.set_score(Dep(0, 1), 1.7)
        _, log_z = inside_dep1(scores)
        assert log_z == pytest.approx(1.7)

    def test_matches_oracle(self):
        for n in range(1, 7):
            for scores in random_tables(n, 20, seed=n):
                _, log_z = inside_dep1(scores)
                expected = brute_force(scores).log_partition
                assert abs(log_z - expected) / max(1, abs(expected)) < 1e-9


class TestOutside:
    def test_root_span_boundary(self, rng):
        scores = PartScoreTable.random(DEP1, 3, rng)
        b, _ = inside_dep1(scores)
        a = outside_dep1(scores, b)
        assert a.cmp_r[0][3] == 0.0

    def test_two_word_marginal_identity(self):
        scores = PartScoreTable.zeros(DEP1, 2)
        b, log_z = inside_dep1(scores)
        a = outside_dep1(scores, b)
        assert b.inc_r[0][1] + a.inc_r[0][1] - log_z == pytest.approx(
            math.log(2 / 3), abs=1e-12
        )


class TestMarginals:
    def test_uniform_two_words(self):
        m = marginals_dep1(PartScoreTable.zeros(DEP1, 2))
        assert m[Dep(0, 1)] == pytest.approx(2 / 3, abs=1e-10)
        assert m[Dep(1, 2)] == pytest.approx(1 / 3, abs=1e-10)
        assert m[Dep(0, 2)] == pytest.approx(2 / 3, abs=1e-10)
        assert m[Dep(2, 1)] == pytest.approx(1 / 3, abs=1e-10)

    def test_single_word(self):
        m = marginals_dep1(PartScoreTable.zeros(DEP1, 1))
        assert m[Dep(0, 1)] == pytest.approx(1.0, abs=1e-12)

    def test_matches_oracle(self):
        for n in range(1, 7):
            for scores in random_tables(n, 10, seed=100 + n):
                got = marginal_table_dep1(scores)
                expected = oracle_marginal_table(scores)
                assert np.max(np.abs(got - expected)) < 1e-9

    def test_head_mass_sums_to_one(self):
        for scores in random_tables(5, 10, seed=7):
            table = marginal_table_dep1(scores)
            sums = table.sum(axis=0)[1:]
            assert np.allclose(sums, 1.0, atol=1e-9)


class TestDecode:
    def test_spec_two_word_case(self):
        scores = PartScoreTable.zeros(DEP1, 2)
        scores.set_score(Dep(1, 2), 2.0)
        scores.set_score(Dep(2, 1), -1.0)
        tree = decode_dep1(scores)
        assert tree.heads == (0, 1)
        assert tree_score(tree.heads, scores) == pytest.approx(2.0)

    def test_single_word(self):
        assert decode_dep1(PartScoreTable.zeros(DEP1, 1)).heads == (0,)

    def test_matches_oracle_best_score(self):
        for n in range(1, 7):
            for scores in random_tables(n, 20, seed=200 + n):
                tree = decode_dep1(scores)
                assert is_projective(tree.heads)
                got = tree_score(tree.heads, scores)
                assert got == pytest.approx(brute_force(scores).best_score, abs=1e-9)

    def test_score_dominated_by_partition(self, rng):
        scores = PartScoreTable.random(DEP1, 5, rng)
        tree = decode_dep1(scores)
        _, log_z = inside_dep1(scores)
        assert tree_score(tree.heads, scores) <= log_z

    def test_constant_shift_invariance(self, rng):
        scores = PartScoreTable.random(DEP1, 5, rng)
        shifted = PartScoreTable(DEP1, 5, np.where(scores.valid_mask,
                                                   scores.table + 3.0, -np.inf))
        t1, t2 = decode_dep1(scores), decode_dep1(shifted)
        assert t1.heads == t2.heads
        assert tree_score(t2.heads, shifted) == pytest.approx(
            tree_score(t1.heads, scores) + 5 * 3.0
        )
