"""Second-order sibling inference: decode, inside, outside, marginals.

An incomplete span chains a smaller incomplete span with a sibling span that
covers the region between two successive modifiers; the inner-most modifier
attaches through a dedicated derivation carrying the (head, NONE, modifier)
part.  The outside pass mirrors the inside statements in exact reverse
order.  Root-headed sibling parts are scored like any others.
"""
from __future__ import annotations

import math

import numpy as np

from .chart import NEG_INF, SpanChart, logsumexp_accumulate
from .model import SIB2, Part, PartScoreTable, ProjectiveTree, Sib


def _check(scores: PartScoreTable) -> None:
    if scores.factorization != SIB2:
        raise ValueError(f"expected sib2 scores, got {scores.factorization}")


def inside_sib2(scores: PartScoreTable) -> tuple[SpanChart, float]:
    _check(scores)
    n = scores.n
    sc = scores.table.tolist()  # sc[head][inner][outer]; inner == head -> NONE
    ch = SpanChart.with_sibling_spans(n)
    cmp_r, cmp_l, inc_r, inc_l, sib = ch.cmp_r, ch.cmp_l, ch.inc_r, ch.inc_l, ch.sib
    for s in range(n + 1):
        cmp_r[s][s] = 0.0
        cmp_l[s][s] = 0.0
    for k in range(1, n + 1):
        for s in range(0, n - k + 1):
            t = s + k
            if s >= 1:
                acc = NEG_INF
                for q in range(s, t):
                    acc = logsumexp_accumulate(acc, cmp_r[s][q] + cmp_l[q + 1][t])
                sib[s][t] = acc
            acc = cmp_l[s + 1][t] + sc[s][s][t]
            for r in range(s + 1, t):
                acc = logsumexp_accumulate(
                    acc, inc_r[s][r] + sib[r][t] + sc[s][r][t]
                )
            inc_r[s][t] = acc
            acc = cmp_r[s][t - 1] + sc[t][t][s]
            for r in range(s + 1, t):
                acc = logsumexp_accumulate(
                    acc, sib[s][r] + inc_l[r][t] + sc[t][r][s]
                )
            inc_l[s][t] = acc
            acc = NEG_INF
            for r in range(s + 1, t + 1):
                acc = logsumexp_accumulate(acc, inc_r[s][r] + cmp_r[r][t])
            cmp_r[s][t] = acc
            acc = NEG_INF
            for r in range(s, t):
                acc = logsumexp_accumulate(acc, cmp_l[s][r] + inc_l[r][t])
            cmp_l[s][t] = acc
    return ch, cmp_r[0][n]


def outside_sib2(scores: PartScoreTable, inside_chart: SpanChart) -> SpanChart:
    _check(scores)
    n = scores.n
    sc = scores.table.tolist()
    b = inside_chart
    a = SpanChart.with_sibling_spans(n)
    a.cmp_r[0][n] = 0.0
    lse = logsumexp_accumulate
    for k in range(n, 0, -1):
        for s in range(n - k, -1, -1):
            t = s + k
            # mirror of: cmp_l[s][t] = sum_r cmp_l[s][r] * inc_l[r][t]
            at = a.cmp_l[s][t]
            for r in range(s, t):
                a.cmp_l[s][r] = lse(a.cmp_l[s][r], at + b.inc_l[r][t])
                a.inc_l[r][t] = lse(a.inc_l[r][t], at + b.cmp_l[s][r])
            # mirror of: cmp_r[s][t] = sum_r inc_r[s][r] * cmp_r[r][t]
            at = a.cmp_r[s][t]
            for r in range(s + 1, t + 1):
                a.inc_r[s][r] = lse(a.inc_r[s][r], at + b.cmp_r[r][t])
                a.cmp_r[r][t] = lse(a.cmp_r[r][t], at + b.inc_r[s][r])
            # mirror of inc_l[s][t]: inner-most case, then sibling chain
            at = a.inc_l[s][t]
            a.cmp_r[s][t - 1] = lse(a.cmp_r[s][t - 1], at + sc[t][t][s])
            for r in range(s + 1, t):
                a.sib[s][r] = lse(a.sib[s][r], at + b.inc_l[r][t] + sc[t][r][s])
                a.inc_l[r][t] = lse(a.inc_l[r][t], at + b.sib[s][r] + sc[t][r][s])
            # mirror of inc_r[s][t]
            at = a.inc_r[s][t]
            a.cmp_l[s + 1][t] = lse(a.cmp_l[s + 1][t], at + sc[s][s][t])
            for r in range(s + 1, t):
                a.inc_r[s][r] = lse(a.inc_r[s][r], at + b.sib[r][t] + sc[s][r][t])
                a.sib[r][t] = lse(a.sib[r][t], at + b.inc_r[s][r] + sc[s][r][t])
            # mirror of: sib[s][t] = sum_q cmp_r[s][q] * cmp_l[q+1][t]
            if s >= 1:
                at = a.sib[s][t]
                for q in range(s, t):
                    a.cmp_r[s][q] = lse(a.cmp_r[s][q], at + b.cmp_l[q + 1][t])
                    a.cmp_l[q + 1][t] = lse(a.cmp_l[q + 1][t], at + b.cmp_r[s][q])
    return a


def partition_and_marginals_sib2(
    scores: PartScoreTable,
) -> tuple[float, np.ndarray]:
    """(log Z, marginal table) from a single inside/outside pass."""
    _check(scores)
    n = scores.n
    b, log_z = inside_sib2(scores)
    a = outside_sib2(scores, b)
    sc = scores.table
    out = np.zeros_like(sc)
    for s in range(n + 1):
        for t in range(s + 1, n + 1):
            # head s, outer modifier t on the right
            out[s, s, t] = math.exp(
                b.cmp_l[s + 1][t] + a.inc_r[s][t] + sc[s, s, t] - log_z
            )
            for r in range(s + 1, t):
                out[s, r, t] = math.exp(
                    b.inc_r[s][r] + b.sib[r][t] + a.inc_r[s][t] + sc[s, r, t] - log_z
                )
            # head t, outer modifier s on the left
            if s >= 1:
                out[t, t, s] = math.exp(
                    b.cmp_r[s][t - 1] + a.inc_l[s][t] + sc[t, t, s] - log_z
                )
                for r in range(s + 1, t):
                    out[t, r, s] = math.exp(
                        b.sib[s][r] + b.inc_l[r][t] + a.inc_l[s][t]
                        + sc[t, r, s] - log_z
                    )
    return log_z, out


def marginal_table_sib2(scores: PartScoreTable) -> np.ndarray:
    """m(Sib(head, inner, outer)) aligned with the score table (NONE at r==s)."""
    return partition_and_marginals_sib2(scores)[1]


def marginals_sib2(scores: PartScoreTable) -> dict[Part, float]:
    table = marginal_table_sib2(scores)
    out: dict[Part, float] = {}
    for part in scores.parts():
        out[part] = float(table[part.s, part.s if part.r is None else part.r, part.t])
    return out


def decode_sib2(scores: PartScoreTable) -> ProjectiveTree:
    """Highest-scoring tree under the sibling decomposition."""
    _check(scores)
    n = scores.n
    sc = scores.table.tolist()
    ch = SpanChart.with_sibling_spans(n)
    cmp_r, cmp_l, inc_r, inc_l, sib = ch.cmp_r, ch.cmp_l, ch.inc_r, ch.inc_l, ch.sib
    bp = {name: [[None] * (n + 1) for _ in range(n + 1)]
          for name in ("cmp_r", "cmp_l", "inc_r", "inc_l", "sib")}
    for s in range(n + 1):
        cmp_r[s][s] = 0.0
        cmp_l[s][s] = 0.0
    for k in range(1, n + 1):
        for s in range(0, n - k + 1):
            t = s + k
            if s >= 1:
                best, arg = NEG_INF, None
                for q in range(s, t):
                    v = cmp_r[s][q] + cmp_l[q + 1][t]
                    if v > best:
                        best, arg = v, q
                sib[s][t] = best
                bp["sib"][s][t] = arg
            best, arg = cmp_l[s + 1][t] + sc[s][s][t], None
            for r in range(s + 1, t):
                v = inc_r[s][r] + sib[r][t] + sc[s][r][t]
                if v > best:
                    best, arg = v, r
            inc_r[s][t] = best
            bp["inc_r"][s][t] = arg
            best, arg = cmp_r[s][t - 1] + sc[t][t][s], None
            for r in range(s + 1, t):
                v = sib[s][r] + inc_l[r][t] + sc[t][r][s]
                if v > best:
                    best, arg = v, r
            inc_l[s][t] = best
            bp["inc_l"][s][t] = arg
            best, arg = NEG_INF, None
            for r in range(s + 1, t + 1):
                v = inc_r[s][r] + cmp_r[r][t]
                if v > best:
                    best, arg = v, r
            cmp_r[s][t] = best
            bp["cmp_r"][s][t] = arg
            best, arg = NEG_INF, None
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
        r = bp[kind][s][t]
        if kind == "cmp_r":
            walk("inc_r", s, r)
            walk("cmp_r", r, t)
        elif kind == "cmp_l":
            walk("cmp_l", s, r)
            walk("inc_l", r, t)
        elif kind == "sib":
            walk("cmp_r", s, r)
            walk("cmp_l", r + 1, t)
        elif kind == "inc_r":
            heads[t - 1] = s
            if r is None:
                walk("cmp_l", s + 1, t)
            else:
                walk("inc_r", s, r)
                walk("sib", r, t)
        else:
            heads[s - 1] = t
            if r is None:
                walk("cmp_r", s, t - 1)
            else:
                walk("sib", s, r)
                walk("inc_l", r, t)

    walk("cmp_r", 0, n)
    return ProjectiveTree(tuple(heads))
