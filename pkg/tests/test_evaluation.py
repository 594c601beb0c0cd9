import pytest

from hodep.evaluation import (
    CHINESE_PUNCT,
    ENGLISH_PUNCT,
    PUNCT_PROFILES,
    evaluate,
)


class TestEvaluate:
    def test_identical_trees(self):
        m = evaluate([((2, 0), (2, 0), ("DT", "NN"))])
        assert (m.uas, m.root_accuracy, m.complete_match) == (1.0, 1.0, 1.0)

    def test_one_wrong_of_four(self):
        m = evaluate([((2, 0, 2, 2), (2, 0, 2, 3), ("A", "B", "C", "D"))])
        assert m.uas == pytest.approx(0.75)
        assert m.complete_match == 0.0

    def test_punctuation_excluded(self):
        gold = (2, 0, 2)
        pred = (2, 0, 1)  # wrong head only on the comma
        m = evaluate([(gold, pred, ("DT", "NN", ","))], ENGLISH_PUNCT)
        assert m.uas == 1.0
        assert m.complete_match == 1.0
        assert m.scoring_tokens == 2

    def test_root_accuracy_micro_average(self):
        pairs = [
            ((0, 1), (0, 1), ("X", "X")),  # root found
            ((0, 0), (0, 2), ("X", "X")),  # one of two roots found
        ]
        m = evaluate(pairs)
        assert m.root_accuracy == pytest.approx(2 / 3)

    def test_root_accuracy_ignores_punct_set(self):
        m = evaluate([((0,), (0,), (",",))], ENGLISH_PUNCT)
        assert m.root_accuracy == 1.0
        assert m.scoring_tokens == 0

    def test_empty_punct_is_raw_attachment(self):
        pairs = [((2, 0), (0, 0), (",", "."))]
        m = evaluate(pairs, PUNCT_PROFILES["none"])
        assert m.uas == pytest.approx(0.5)

    def test_cm_bounded_by_perfect_sentences(self):
        pairs = [
            ((2, 0), (2, 0), ("X", "X")),
            ((2, 0), (0, 0), ("X", "X")),
        ]
        m = evaluate(pairs)
        assert m.complete_match == pytest.approx(0.5)

    def test_order_invariance(self):
        pairs = [
            ((2, 0), (2, 0), ("X", "X")),
            ((0, 1, 1), (0, 1, 2), ("X", "X", "X")),
        ]
        assert evaluate(pairs) == evaluate(list(reversed(pairs)))

    def test_length_mismatch_reports_index(self):
        with pytest.raises(ValueError, match="sentence 1"):
            evaluate([((0,), (0,), ("X",)), ((2, 0), (0,), ("X", "X"))])

    def test_chinese_profile(self):
        m = evaluate([((2, 0), (1, 0), ("PU", "NN"))], CHINESE_PUNCT)
        assert m.uas == 1.0
