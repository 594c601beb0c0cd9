import math

import numpy as np
import pytest

from hodep.model import (
    SIB2,
    PartScoreTable,
    Sib,
    is_projective,
    tree_score,
)
from hodep.oracle import brute_force, oracle_marginal_table
from hodep.sibling import (
    decode_sib2,
    inside_sib2,
    marginal_table_sib2,
    marginals_sib2,
    outside_sib2,
)


def random_tables(n, count, seed=1):
    rng = np.random.default_rng(seed)
    return [PartScoreTable.random(SIB2, n, rng) for _ in range(count)]


class TestInside:
    def test_uniform_counts(self):
        for n, count in [(1, 1), (2, 3), (3, 12), (4, 55)]:
            _, log_z = inside_sib2(PartScoreTable.zeros(SIB2, n))
            assert log_z == pytest.approx(math.log(count), abs=1e-10)

    def test_single_word(self):
        scores = PartScoreTable.zeros(SIB2, 1)
        scores.set_score(Sib(0, None, 1), 0.9)
        _, log_z = inside_sib2(scores)
        assert log_z == pytest.approx(0.9)

    def test_two_word_worked_case(self):
        scores = PartScoreTable.zeros(SIB2, 2)
        scores.set_score(Sib(0, 1, 2), 1.0)
        _, log_z = inside_sib2(scores)
        assert log_z == pytest.approx(math.log(2 + math.e), abs=1e-12)

    def test_matches_oracle(self):
        for n in range(1, 7):
            for scores in random_tables(n, 20, seed=n):
                _, log_z = inside_sib2(scores)
                expected = brute_force(scores).log_partition
                assert abs(log_z - expected) / max(1, abs(expected)) < 1e-9


class TestOutside:
    def test_root_span_boundary(self, rng):
        scores = PartScoreTable.random(SIB2, 3, rng)
        b, _ = inside_sib2(scores)
        a = outside_sib2(scores, b)
        assert a.cmp_r[0][3] == 0.0


class TestMarginals:
    def test_uniform_two_words(self):
        m = marginals_sib2(PartScoreTable.zeros(SIB2, 2))
        assert m[Sib(0, None, 1)] == pytest.approx(2 / 3, abs=1e-10)
        assert m[Sib(0, 1, 2)] == pytest.approx(1 / 3, abs=1e-10)
        assert m[Sib(0, None, 2)] == pytest.approx(1 / 3, abs=1e-10)
        assert m[Sib(1, None, 2)] == pytest.approx(1 / 3, abs=1e-10)
        assert m[Sib(2, None, 1)] == pytest.approx(1 / 3, abs=1e-10)

    def test_single_word(self):
        m = marginals_sib2(PartScoreTable.zeros(SIB2, 1))
        assert m[Sib(0, None, 1)] == pytest.approx(1.0, abs=1e-12)

    def test_matches_oracle(self):
        for n in range(1, 7):
            for scores in random_tables(n, 10, seed=100 + n):
                got = marginal_table_sib2(scores)
                expected = oracle_marginal_table(scores)
                assert np.max(np.abs(got - expected)) < 1e-9

    def test_outer_word_mass_sums_to_one(self):
        # each word is the outer modifier of exactly one sibling part
        for scores in random_tables(5, 10, seed=7):
            table = marginal_table_sib2(scores)
            sums = table.sum(axis=(0, 1))[1:]
            assert np.allclose(sums, 1.0, atol=1e-9)

    def test_sum_over_inner_gives_dependency_marginal(self):
        from hodep.first_order import marginal_table_dep1
        from hodep.model import DEP1

        rng = np.random.default_rng(31)
        n = 5
        dep_scores = PartScoreTable.random(DEP1, n, rng)
        sib_scores = PartScoreTable.zeros(SIB2, n)
        for part in sib_scores.parts():
            sib_scores.set_score(part, float(dep_scores.table[part.s, part.t]))
        got = marginal_table_sib2(sib_scores).sum(axis=1)
        expected = marginal_table_dep1(dep_scores)
        assert np.max(np.abs(got - expected)) < 1e-9


class TestDecode:
    def test_spec_two_word_case(self):
        scores = PartScoreTable.zeros(SIB2, 2)
        scores.set_score(Sib(0, 1, 2), 3.0)
        tree = decode_sib2(scores)
        assert tree.heads == (0, 0)
        assert tree_score(tree.heads, scores) == pytest.approx(3.0)

    def test_single_word(self):
        assert decode_sib2(PartScoreTable.zeros(SIB2, 1)).heads == (0,)

    def test_matches_oracle_best_score(self):
        for n in range(1, 7):
            for scores in random_tables(n, 20, seed=200 + n):
                tree = decode_sib2(scores)
                assert is_projective(tree.heads)
                got = tree_score(tree.heads, scores)
                assert got == pytest.approx(brute_force(scores).best_score, abs=1e-9)

    def test_score_dominated_by_partition(self, rng):
        scores = PartScoreTable.random(SIB2, 5, rng)
        tree = decode_sib2(scores)
        _, log_z = inside_sib2(scores)
        assert tree_score(tree.heads, scores) <= log_z
