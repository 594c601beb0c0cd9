"""First-order (edge-factored) projective inference: decode, inside, outside,
marginals.

The inside pass is the standard complete/incomplete span recursion; the
outside pass mirrors the inside statements in exact reverse order, pushing
each cell's contribution back into its two sources.  Multi-root trees are
handled naturally by the root's complete span.
"""
from __future__ import annotations

import math

import numpy as np

from .chart import NEG_INF, SpanChart, logsumexp_accumulate
from .model import DEP1, Dep, Part, PartScoreTable, ProjectiveTree


def _check(scores: PartScoreTable) -> None:
    if scores.factorization != DEP1:
        raise ValueError(f"expected dep1 scores, got {scores.factorization}")


def inside_dep1(scores: PartScoreTable) -> tuple[SpanChart, float]:
    _check(scores)
    n = scores.n
    dep = scores.table.tolist()
    ch = SpanChart(n)
    cmp_r, cmp_l, inc_r, inc_l = ch.cmp_r, ch.cmp_l, ch.inc_r, ch.inc_l
    for s in range(n + 1):
        cmp_r[s][s] = 0.0
        cmp_l[s][s] = 0.0
    for k in range(1, n + 1):
        for s in range(0, n - k + 1):
            t = s + k
            seed = NEG_INF
            for r in range(s, t):
                seed = logsumexp_accumulate(seed, cmp_r[s][r] + cmp_l[r + 1][t])
            inc_r[s][t] = seed + dep[s][t]
            inc_l[s][t] = seed + dep[t][s]
            acc = NEG_INF
            for r in range(s + 1, t + 1):
                acc = logsumexp_accumulate(acc, inc_r[s][r] + cmp_r[r][t])
            cmp_r[s][t] = acc
            acc = NEG_INF
            for r in range(s, t):
                acc = logsumexp_accumulate(acc, cmp_l[s][r] + inc_l[r][t])
            cmp_l[s][t] = acc
    return ch, cmp_r[0][n]


def outside_dep1(scores: PartScoreTable, inside_chart: SpanChart) -> SpanChart:
    _check(scores)
    n = scores.n
    dep = scores.table.tolist()
    b = inside_chart
    a = SpanChart(n)
    a.cmp_r[0][n] = 0.0
    for k in range(n, 0, -1):
        for s in range(n - k, -1, -1):
            t = s + k
            # mirror of: cmp_l[s][t] = sum_r cmp_l[s][r] * inc_l[r][t]
            at = a.cmp_l[s][t]
            for r in range(s, t):
                a.cmp_l[s][r] = logsumexp_accumulate(
                    a.cmp_l[s][r], at + b.inc_l[r][t]
                )
                a.inc_l[r][t] = logsumexp_accumulate(
                    a.inc_l[r][t], at + b.cmp_l[s][r]
                )
            # mirror of: cmp_r[s][t] = sum_r inc_r[s][r] * cmp_r[r][t]
            at = a.cmp_r[s][t]
            for r in range(s + 1, t + 1):
                a.inc_r[s][r] = logsumexp_accumulate(
                    a.inc_r[s][r], at + b.cmp_r[r][t]
                )
                a.cmp_r[r][t] = logsumexp_accumulate(
                    a.cmp_r[r][t], at + b.inc_r[s][r]
                )
            # mirror of the shared seed feeding inc_r[s][t] and inc_l[s][t]
            air = a.inc_r[s][t] + dep[s][t]
            ail = a.inc_l[s][t] + dep[t][s]
            for r in range(s, t):
                push = logsumexp_accumulate(air, ail)
                a.cmp_r[s][r] = logsumexp_accumulate(
                    a.cmp_r[s][r], push + b.cmp_l[r + 1][t]
                )
                a.cmp_l[r + 1][t] = logsumexp_accumulate(
                    a.cmp_l[r + 1][t], push + b.cmp_r[s][r]
                )
    return a


def partition_and_marginals_dep1(
    scores: PartScoreTable,
) -> tuple[float, np.ndarray]:
    """(log Z, marginal table) from a single inside/outside pass."""
    _check(scores)
    n = scores.n
    b, log_z = inside_dep1(scores)
    a = outside_dep1(scores, b)
    out = np.zeros_like(scores.table)
    for s in range(n + 1):
        for t in range(s + 1, n + 1):
            out[s, t] = math.exp(b.inc_r[s][t] + a.inc_r[s][t] - log_z)
            if s >= 1:
                out[t, s] = math.exp(b.inc_l[s][t] + a.inc_l[s][t] - log_z)
    return log_z, out


def marginal_table_dep1(scores: PartScoreTable) -> np.ndarray:
    """m(Dep(s, t)) as an array aligned with the score table."""
    return partition_and_marginals_dep1(scores)[1]


def marginals_dep1(scores: PartScoreTable) -> dict[Part, float]:
    table = marginal_table_dep1(scores)
    return {
        Dep(h, m): float(table[h, m])
        for h in range(scores.n + 1)
        for m in range(1, scores.n + 1)
        if h != m
    }


def decode_dep1(scores: PartScoreTable) -> ProjectiveTree:
    """Highest-scoring multi-root projective tree; smallest split wins ties."""
    _check(scores)
    n = scores.n
    dep = scores.table.tolist()
    ch = SpanChart(n)
    cmp_r, cmp_l, inc_r, inc_l = ch.cmp_r, ch.cmp_l, ch.inc_r, ch.inc_l
    bp = {name: [[-1] * (n + 1) for _ in range(n + 1)]
          for name in ("cmp_r", "cmp_l", "inc", )}
    for s in range(n + 1):
        cmp_r[s][s] = 0.0
        cmp_l[s][s] = 0.0
    for k in range(1, n + 1):
        for s in range(0, n - k + 1):
            t = s + k
            best, arg = NEG_INF, -1
            for r in range(s, t):
                v = cmp_r[s][r] + cmp_l[r + 1][t]
                if v > best:
                    best, arg = v, r
            inc_r[s][t] = best + dep[s][t]
            inc_l[s][t] = best + dep[t][s]
            bp["inc"][s][t] = arg
            best, arg = NEG_INF, -1
            for r in range(s + 1, t + 1):
                v = inc_r[s][r] + cmp_r[r][t]
                if v > best:
                    best, arg = v, r
            cmp_r[s][t] = best
            bp["cmp_r"][s][t] = arg
            best, arg = NEG_INF, -1
            for r in range(s, t):
                v = cmp_l[s][r] + inc_l[r][t]
                if v > best:
                    best, arg = v, r
            cmp_l[s][t] = best
            bp["cmp_l"][s][t] = arg
    heads = [0] * n

    def walk(kind: str, s: int, t: int) -> None:
        if s == t and kind in ("cmp_r", "cmp_l"):
            return
        if kind == "cmp_r":
            r = bp["cmp_r"][s][t]
            walk("inc_r", s, r)
            walk("cmp_r", r, t)
        elif kind == "cmp_l":
            r = bp["cmp_l"][s][t]
            walk("cmp_l", s, r)
            walk("inc_l", r, t)
        else:
            r = bp["inc"][s][t]
            if kind == "inc_r":
                heads[t - 1] = s
            else:
                heads[s - 1] = t
            walk("cmp_r", s, r)
            walk("cmp_l", r + 1, t)

    walk("cmp_r", 0, n)
    return ProjectiveTree(tuple(heads))
