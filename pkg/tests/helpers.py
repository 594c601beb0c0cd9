"""Shared fixtures helpers: synthetic sentences and gold corpora."""
import numpy as np

from hodep.model import ProjectiveTree, Sentence, Token
from hodep.oracle import enumerate_projective

_POS = ["NN", "VB", "JJ", "RB", "DT", "IN"]


def random_sentence(rng: np.random.Generator, n: int) -> Sentence:
    tokens = []
    for _ in range(n):
        form = f"w{rng.integers(0, 40)}"
        pos = _POS[rng.integers(0, len(_POS))]
        tokens.append(Token(form=form, pos=pos, cpos=pos))
    return Sentence(tuple(tokens))


def random_tree(rng: np.random.Generator, n: int) -> ProjectiveTree:
    trees = enumerate_projective(n)
    return ProjectiveTree(trees[rng.integers(0, len(trees))])


def random_corpus(rng: np.random.Generator, count: int, n_lo=2, n_hi=4):
    corpus = []
    for _ in range(count):
        n = int(rng.integers(n_lo, n_hi + 1))
        corpus.append((random_sentence(rng, n), random_tree(rng, n)))
    return corpus
