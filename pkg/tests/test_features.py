import io

import numpy as np
import pytest

from hodep.features import (
    CHANNELS,
    TEMPLATES,
    FeatureDictionary,
    FeatureExtractor,
    build_dictionary,
    coarsen_pos,
    score_parts,
)
from hodep.model import (
    DEP1,
    GSIB3,
    Dep,
    GSib,
    Gch,
    ProjectiveTree,
    Sentence,
    Sib,
    Token,
)

from helpers import random_corpus


def sentence_jj_nn_vbd():
    return Sentence(
        (
            Token("Economic", "JJ", "JJ"),
            Token("news", "NN", "NN"),
            Token("had", "VBD", "VBD"),
        )
    )


class TestCoarsen:
    def test_english_truncates_to_two(self):
        assert coarsen_pos("NNS", "english") == "NN"
        assert coarsen_pos("VBD", "english") == "VB"

    def test_english_pronoun_exceptions(self):
        assert coarsen_pos("PRP", "english") == "PRP"
        assert coarsen_pos("PRP$", "english") == "PRP$"

    def test_czech_first_character(self):
        assert coarsen_pos("Vf", "czech") == "V"

    def test_chinese_drops_last(self):
        assert coarsen_pos("VV", "chinese") == "V"
        assert coarsen_pos("PU", "chinese") == "PU"
        assert coarsen_pos("CD", "chinese") == "CD"

    def test_generic_identity(self):
        assert coarsen_pos("XYZ", "generic") == "XYZ"

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            coarsen_pos("", "english")


class TestCatalog:
    def test_pos_templates_have_coarse_twin(self):
        by_name = {t.name: t for t in TEMPLATES}
        for t in TEMPLATES:
            if not t.coarse and any(kind == "P" for kind, _, _ in t.slots):
                assert t.name + "/coarse" in by_name

    def test_lexical_only_templates_single(self):
        for t in TEMPLATES:
            if all(kind == "L" for kind, _, _ in t.slots):
                assert not t.coarse

    def test_ids_are_positions(self):
        assert [t.tid for t in TEMPLATES] == list(range(len(TEMPLATES)))


class TestExtraction:
    def test_dep_bigram_key(self):
        ex = FeatureExtractor("generic")
        feats = ex.extract_part_features(sentence_jj_nn_vbd(), Dep(3, 2))
        keys = {key for _, key in feats}
        assert "had\x1fVBD\x1fnews\x1fNN" in keys

    def test_no_in_between_for_adjacent(self):
        ex = FeatureExtractor("generic")
        feats = ex.extract_part_features(sentence_jj_nn_vbd(), Dep(3, 2))
        between = [t.tid for t in TEMPLATES if t.per_between_word]
        assert not any(tid in between for tid, _ in feats)

    def test_one_in_between_word(self):
        ex = FeatureExtractor("generic")
        feats = ex.extract_part_features(sentence_jj_nn_vbd(), Dep(3, 1))
        between_tids = {t.tid for t in TEMPLATES if t.per_between_word}
        fired = [(tid, key) for tid, key in feats if tid in between_tids]
        # one lexical row plus fine/coarse POS rows, each instantiated at b=2
        assert len(fired) == 3
        assert "had\x1fnews\x1fEconomic" in {k for _, k in fired}

    def test_sibling_none_sentinel(self):
        ex = FeatureExtractor("generic")
        feats = ex.extract_part_features(sentence_jj_nn_vbd(), Sib(3, None, 1))
        assert any("<none>" in key for _, key in feats)

    def test_boundary_sentinels(self):
        ex = FeatureExtractor("generic")
        feats = ex.extract_part_features(sentence_jj_nn_vbd(), Dep(0, 3))
        joined = "|".join(key for _, key in feats)
        assert "<bos>" in joined and "<eos>" in joined and "<root>" in joined

    def test_extraction_is_pure(self):
        ex = FeatureExtractor("english")
        sent = sentence_jj_nn_vbd()
        for part in (Dep(0, 1), Sib(3, 2, 1), Gch(0, 3, 2), GSib(0, 3, 2, 1)):
            assert ex.extract_part_features(sent, part) == ex.extract_part_features(
                sent, part
            )

    def test_coarse_variant_differs_under_english(self):
        ex = FeatureExtractor("english")
        feats = ex.extract_part_features(sentence_jj_nn_vbd(), Dep(3, 2))
        keys = [key for _, key in feats]
        assert "had\x1fVBD\x1fnews\x1fNN" in keys  # fine
        assert "had\x1fVB\x1fnews\x1fNN" in keys  # coarse


class TestDictionary:
    def test_single_word_dep1(self):
        sent = Sentence((Token("hello", "UH", "UH"),))
        d = build_dictionary([(sent, ProjectiveTree((0,)))], DEP1)
        ex = FeatureExtractor("generic")
        expected = {(tid, key) for tid, key in ex.extract_dep(sent, 0, 1)}
        assert set(d.index) == expected

    def test_duplicate_sentence_idempotent(self):
        sent = sentence_jj_nn_vbd()
        tree = ProjectiveTree((3, 3, 0))
        once = build_dictionary([(sent, tree)], DEP1)
        twice = build_dictionary([(sent, tree)] * 2, DEP1)
        assert once.index == twice.index

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_dictionary([], DEP1)

    def test_frozen_after_build(self):
        d = build_dictionary(
            [(sentence_jj_nn_vbd(), ProjectiveTree((3, 3, 0)))], DEP1
        )
        with pytest.raises(RuntimeError):
            d.add(0, "new-key")

    def test_save_load_round_trip(self):
        d = build_dictionary(
            [(sentence_jj_nn_vbd(), ProjectiveTree((3, 3, 0)))], GSIB3
        )
        buf = io.StringIO()
        d.save(buf)
        buf.seek(0)
        loaded = FeatureDictionary.load(buf)
        assert loaded.index == d.index


class TestScoring:
    def test_zero_weights_zero_scores(self):
        sent = sentence_jj_nn_vbd()
        for fact in CHANNELS:
            d = build_dictionary([(sent, ProjectiveTree((3, 3, 0)))], fact)
            table = score_parts(sent, fact, d, np.zeros(d.size))
            for part in table.parts():
                assert table.score_of(part) == 0.0

    def test_single_feature_targets_one_edge(self):
        sent = sentence_jj_nn_vbd()
        d = build_dictionary([(sent, ProjectiveTree((3, 3, 0)))], DEP1)
        ex = FeatureExtractor("generic")
        tid, key = next(
            (tid, key)
            for tid, key in ex.extract_dep(sent, 3, 2)
            if key == "had\x1fVBD\x1fnews\x1fNN"
        )
        weights = np.zeros(d.size)
        weights[d.lookup(tid, key)] = 2.0
        table = score_parts(sent, DEP1, d, weights)
        assert table.score_of(Dep(3, 2)) == pytest.approx(2.0)
        assert table.score_of(Dep(3, 1)) == pytest.approx(0.0)

    def test_matches_naive_extraction_dep1(self, rng):
        corpus = random_corpus(rng, 3, 2, 4)
        d = build_dictionary(corpus, DEP1)
        weights = rng.normal(size=d.size)
        ex = FeatureExtractor("generic")
        for sent, _ in corpus:
            table = score_parts(sent, DEP1, d, weights)
            for part in table.parts():
                naive = sum(
                    weights[d.lookup(tid, key)]
                    for tid, key in ex.extract_dep(sent, part.s, part.t)
                    if d.lookup(tid, key) is not None
                )
                assert table.score_of(part) == pytest.approx(naive, abs=1e-9)

    def test_matches_naive_composed_gsib3(self, rng):
        corpus = random_corpus(rng, 2, 2, 3)
        d = build_dictionary(corpus, GSIB3)
        weights = rng.normal(size=d.size)
        ex = FeatureExtractor("generic")

        def naive_sum(feats):
            return sum(
                weights[d.lookup(tid, key)]
                for tid, key in feats
                if d.lookup(tid, key) is not None
            )

        for sent, _ in corpus:
            table = score_parts(sent, GSIB3, d, weights)
            for part in table.parts():
                expected = naive_sum(ex.extract_gsib(sent, part.g, part.s, part.r, part.t))
                expected += naive_sum(ex.extract_sib(sent, part.s, part.r, part.t))
                if part.s >= 1:
                    expected += naive_sum(ex.extract_gch(sent, part.g, part.s, part.t))
                expected += naive_sum(ex.extract_dep(sent, part.s, part.t))
                assert table.score_of(part) == pytest.approx(expected, abs=1e-9)

    def test_dimension_mismatch_rejected(self):
        sent = sentence_jj_nn_vbd()
        d = build_dictionary([(sent, ProjectiveTree((3, 3, 0)))], DEP1)
        with pytest.raises(ValueError):
            score_parts(sent, DEP1, d, np.zeros(d.size + 1))
