"""Brute-force reference for decoding, partition functions, and marginals.

Enumerates every multi-root projective tree and computes all three inference
quantities by definition.  Simplicity beats speed here: this module is the
ground truth the chart algorithms are checked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .model import Part, PartScoreTable, decompose, is_projective, tree_score

MAX_ORACLE_N = 8


@dataclass
class EnumerationResult:
    trees: list[tuple[int, ...]]
    log_partition: float
    marginals: dict[Part, float]
    best_tree: tuple[int, ...]
    best_score: float


def enumerate_projective(n: int) -> list[tuple[int, ...]]:
    """All multi-root projective head arrays over n words, lexicographic."""
    if not 1 <= n <= MAX_ORACLE_N:
        raise ValueError(f"n={n} outside oracle guard 1..{MAX_ORACLE_N}")
    return list(_enumerate_cached(n))


@lru_cache(maxsize=None)
def _enumerate_cached(n: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for heads in product(range(n + 1), repeat=n):
        if any(h == m for m, h in enumerate(heads, start=1)):
            continue
        try:
            if is_projective(heads):
                out.append(heads)
        except ValueError:
            continue
    return tuple(out)


def projective_tree_count(n: int) -> int:
    """Closed-form count of multi-root projective trees (1, 3, 12, 55, ...)."""
    return math.comb(3 * n, n) // (2 * n + 1)


def brute_force(scores: PartScoreTable) -> EnumerationResult:
    """Problems 1-3 by exhaustive enumeration over the projective trees."""
    trees = enumerate_projective(scores.n)
    tree_scores = [tree_score(t, scores) for t in trees]

    best_score = max(tree_scores)
    best_tree = next(t for t, s in zip(trees, tree_scores) if s == best_score)

    shift = best_score
    weights = [math.exp(s - shift) for s in tree_scores]
    total = math.fsum(weights)
    log_partition = shift + math.log(total)

    marginals: dict[Part, list[float]] = {}
    for heads, w in zip(trees, weights):
        pr = w / total
        for part in decompose(heads, scores.factorization):
            marginals.setdefault(part, []).append(pr)
    return EnumerationResult(
        trees=list(trees),
        log_partition=log_partition,
        marginals={p: math.fsum(v) for p, v in marginals.items()},
        best_tree=best_tree,
        best_score=best_score,
    )


def oracle_marginal_table(scores: PartScoreTable) -> np.ndarray:
    """Marginals as a dense array aligned with the score table (0 elsewhere)."""
    from .model import part_index

    result = brute_force(scores)
    out = np.zeros_like(scores.table)
    for part, m in result.marginals.items():
        out[part_index(part)] = m
    return out
