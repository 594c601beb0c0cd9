import numpy as np
import pytest

from hodep.model import (
    DEP1,
    FACTORIZATIONS,
    GCH2,
    GSIB3,
    NEG_INF,
    SIB2,
    Dep,
    GSib,
    Gch,
    PartScoreTable,
    ProjectiveTree,
    Sib,
    decompose,
    is_projective,
    tree_score,
    valid_part_mask,
)
from hodep.oracle import enumerate_projective


class TestProjectivity:
    def test_chain_is_projective(self):
        assert is_projective([0, 1, 2])

    def test_crossing_edges_rejected(self):
        # edges (0,2) and (3,1) interleave
        assert not is_projective([3, 0, 0])

    def test_nested_root_edges(self):
        assert is_projective([0, 0, 0])

    def test_non_tree_raises(self):
        with pytest.raises(ValueError):
            is_projective([2, 1])  # cycle
        with pytest.raises(ValueError):
            is_projective([0, 5, 0])  # head out of range

    def test_projective_tree_validates(self):
        with pytest.raises(ValueError):
            ProjectiveTree((3, 0, 0))
        assert ProjectiveTree((0, 1)).n == 2


class TestDecompose:
    def test_dep1_chain(self):
        assert set(decompose([0, 1], DEP1)) == {Dep(0, 1), Dep(1, 2)}

    def test_sib2_two_root_children(self):
        assert set(decompose([0, 0], SIB2)) == {Sib(0, None, 1), Sib(0, 1, 2)}

    def test_gsib3_chain(self):
        assert set(decompose([0, 1], GSIB3)) == {
            GSib(0, 0, None, 1),
            GSib(0, 1, None, 2),
        }

    def test_gch2_counts_non_root_headed_words(self):
        for heads in enumerate_projective(4):
            parts = decompose(heads, GCH2)
            assert len(parts) == sum(1 for h in heads if h != 0)

    def test_sib2_one_part_per_word(self):
        for heads in enumerate_projective(4):
            parts = decompose(heads, SIB2)
            assert sorted(p.t for p in parts) == [1, 2, 3, 4]

    def test_dep1_one_part_per_word(self):
        for heads in enumerate_projective(4):
            assert len(decompose(heads, DEP1)) == 4

    def test_sib2_inside_out_order(self):
        # head 3 with left modifiers 2, 1: inner-most is 2
        parts = set(decompose([3, 3, 0], SIB2))
        assert Sib(3, None, 2) in parts and Sib(3, 2, 1) in parts


class TestScoreTable:
    def test_zero_scores_give_zero_tree_score(self):
        for fact in FACTORIZATIONS:
            scores = PartScoreTable.zeros(fact, 3)
            for heads in enumerate_projective(3):
                assert tree_score(heads, scores) == 0.0

    def test_single_part_score(self):
        scores = PartScoreTable.zeros(DEP1, 2)
        scores.set_score(Dep(1, 2), 2.0)
        assert tree_score([0, 1], scores) == 2.0

    def test_every_decomposed_part_is_valid(self):
        for fact in FACTORIZATIONS:
            scores = PartScoreTable.zeros(fact, 4)
            for heads in enumerate_projective(4):
                for part in decompose(heads, fact):
                    assert np.isfinite(scores.score_of(part)), (fact, heads, part)

    def test_invalid_entries_are_neg_inf(self):
        scores = PartScoreTable.zeros(GCH2, 3)
        assert scores.score_of(Gch(2, 1, 3)) == NEG_INF  # g inside [s, t]

    def test_parts_iterator_matches_mask(self):
        for fact in FACTORIZATIONS:
            scores = PartScoreTable.zeros(fact, 3)
            parts = list(scores.parts())
            assert len(parts) == int(valid_part_mask(fact, 3).sum())
            assert len(set(parts)) == len(parts)

    def test_tree_score_matches_manual_sum(self, rng):
        scores = PartScoreTable.random(DEP1, 3, rng)
        for heads in enumerate_projective(3):
            expected = sum(scores.table[h, m] for m, h in enumerate(heads, 1))
            assert tree_score(heads, scores) == pytest.approx(expected)

    def test_set_score_rejects_invalid_part(self):
        scores = PartScoreTable.zeros(GCH2, 3)
        with pytest.raises(ValueError):
            scores.set_score(Gch(2, 1, 3), 1.0)
