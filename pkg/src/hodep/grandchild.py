"""Second-order grandchild inference over grandparent-annotated spans.

Every span between two words carries a grandparent index g lying outside the
span, so charts are O(n^3) cells and inference is O(n^4) time.  Spans hanging
off the root are kept in separate one-dimensional tables and root-emitted
dependencies carry no part score (a word's part records its head and its
head's head, which root children do not have).  All per-span statements are
vectorized over the grandparent axis; the outside pass mirrors the inside
statements in exact reverse order.
"""
from __future__ import annotations

import math

import numpy as np

from .chart import NEG_INF, GrandChart, logsumexp_reduce, strided_window
from .model import GCH2, Gch, Part, PartScoreTable, ProjectiveTree, valid_part_mask

_lse = np.logaddexp
_lse_reduce = logsumexp_reduce
# The inside pass reduces with the logaddexp ufunc rather than the max-trick
# helper: its per-element cost is independent of slice length, so measured
# runtimes track the nominal O(n^4) growth instead of being dominated by
# fixed per-call overhead at short sentence lengths.
_inside_reduce = np.logaddexp.reduce


def _check(scores: PartScoreTable) -> None:
    if scores.factorization != GCH2:
        raise ValueError(f"expected gch2 scores, got {scores.factorization}")


def _seed_bases(ch: GrandChart) -> None:
    n = ch.n
    for s in range(n + 1):
        ch.cmp_r[:, s, s] = 0.0
        ch.cmp_l[:, s, s] = 0.0
        ch.cmp_r[s, s, s] = NEG_INF
        ch.cmp_l[s, s, s] = NEG_INF
    ch.root_cmp[0] = 0.0


def inside_gch2(scores: PartScoreTable) -> tuple[GrandChart, float]:
    _check(scores)
    n = scores.n
    sc = scores.table  # sc[g, head, modifier]; -inf where g lies inside the span
    ch = GrandChart(n)
    cmp_r, cmp_l, inc_r, inc_l = ch.cmp_r, ch.cmp_l, ch.inc_r, ch.inc_l
    _seed_bases(ch)
    # Each width-k diagonal is processed in one batch of strided windows
    # indexed [s - 1, grandparent, split offset j], with s = 1..n-k and
    # t = s + k; all reads are cells of width < k plus same-width cells
    # written earlier in the statement order, so the batch is well-defined.
    N = n + 1
    big = N * N
    dg = N + 1  # per-s step of a cell whose left and right indices both advance
    dh = big + N + 1  # per-s step when the grandparent index advances as well
    for k in range(1, n):
        m = n - k
        diag = (N + 1 + k, (m, N), (dg, big))  # X[g, s, s + k] viewed as [s-1, g]

        # inc_r[g, s, t] = lse_j cmp_r[g, s, s+j] * cmp_l[s, s+1+j, t] * sc[g, s, t]
        a = strided_window(cmp_r, N + 1, (m, N, k), (dg, big, 1))
        b = strided_window(cmp_l, big + 2 * N + 1 + k, (m, k), (dh, N))
        w = strided_window(sc, *diag)
        out = strided_window(inc_r, *diag, writeable=True)
        out[:] = _inside_reduce(a + b[:, None, :], axis=2) + w

        # inc_l[g, s, t] = lse_j cmp_r[t, s, s+j] * cmp_l[g, s+1+j, t] * sc[g, t, s]
        c = strided_window(cmp_r, big * (1 + k) + N + 1, (m, k), (dh, 1))
        e = strided_window(cmp_l, 2 * N + 1 + k, (m, N, k), (dg, big, N))
        w = strided_window(sc, N * (1 + k) + 1, (m, N), (dg, big))
        out = strided_window(inc_l, *diag, writeable=True)
        out[:] = _inside_reduce(c[:, None, :] + e, axis=2) + w

        # cmp_r[g, s, t] = lse_j inc_r[g, s, s+1+j] * cmp_r[s, s+1+j, t]
        f = strided_window(inc_r, N + 2, (m, N, k), (dg, big, 1))
        h = strided_window(cmp_r, big + 2 * N + 1 + k, (m, k), (dh, N))
        out = strided_window(cmp_r, *diag, writeable=True)
        out[:] = _inside_reduce(f + h[:, None, :], axis=2)
        mask = strided_window(cmp_r, big + N + 1 + k, (m, k + 1), (dh, big), writeable=True)
        mask[:] = NEG_INF

        # cmp_l[g, s, t] = lse_j cmp_l[t, s, s+j] * inc_l[g, s+j, t]
        p = strided_window(cmp_l, big * (1 + k) + N + 1, (m, k), (dh, 1))
        q = strided_window(inc_l, N + 1 + k, (m, N, k), (dg, big, N))
        out = strided_window(cmp_l, *diag, writeable=True)
        out[:] = _inside_reduce(p[:, None, :] + q, axis=2)
        mask = strided_window(cmp_l, big + N + 1 + k, (m, k + 1), (dh, big), writeable=True)
        mask[:] = NEG_INF
    for t in range(1, n + 1):
        ch.root_inc[t] = _inside_reduce(
            ch.root_cmp[:t] + cmp_l[0, 1 : t + 1, t]
        )
        ch.root_cmp[t] = _inside_reduce(ch.root_inc[1 : t + 1] + cmp_r[0, 1 : t + 1, t])
    return ch, float(ch.root_cmp[n])


def outside_gch2(scores: PartScoreTable, inside_chart: GrandChart) -> GrandChart:
    _check(scores)
    n = scores.n
    sc = scores.table
    b = inside_chart
    a = GrandChart(n)
    a.root_cmp[n] = 0.0
    for t in range(n, 0, -1):
        # mirror of: root_cmp[t] = sum_r root_inc[r] * cmp_r[0, r, t]
        at = a.root_cmp[t]
        a.root_inc[1 : t + 1] = _lse(
            a.root_inc[1 : t + 1], at + b.cmp_r[0, 1 : t + 1, t]
        )
        a.cmp_r[0, 1 : t + 1, t] = _lse(
            a.cmp_r[0, 1 : t + 1, t], at + b.root_inc[1 : t + 1]
        )
        # mirror of: root_inc[t] = sum_r root_cmp[r] * cmp_l[0, r+1, t]
        at = a.root_inc[t]
        a.root_cmp[:t] = _lse(a.root_cmp[:t], at + b.cmp_l[0, 1 : t + 1, t])
        a.cmp_l[0, 1 : t + 1, t] = _lse(
            a.cmp_l[0, 1 : t + 1, t], at + b.root_cmp[:t]
        )
    for k in range(n - 1, 0, -1):
        for s in range(n - k, 0, -1):
            t = s + k
            # mirror of cmp_l; adjoints of masked (invalid grandparent) cells
            # are dropped before propagating
            a.cmp_l[s : t + 1, s, t] = NEG_INF
            at = a.cmp_l[:, s, t]
            a.cmp_l[t, s, s:t] = _lse(
                a.cmp_l[t, s, s:t],
                _lse_reduce(at[:, None] + b.inc_l[:, s:t, t], axis=0),
            )
            a.inc_l[:, s:t, t] = _lse(
                a.inc_l[:, s:t, t], at[:, None] + b.cmp_l[t, s, s:t]
            )
            # mirror of cmp_r
            a.cmp_r[s : t + 1, s, t] = NEG_INF
            at = a.cmp_r[:, s, t]
            a.inc_r[:, s, s + 1 : t + 1] = _lse(
                a.inc_r[:, s, s + 1 : t + 1], at[:, None] + b.cmp_r[s, s + 1 : t + 1, t]
            )
            a.cmp_r[s, s + 1 : t + 1, t] = _lse(
                a.cmp_r[s, s + 1 : t + 1, t],
                _lse_reduce(at[:, None] + b.inc_r[:, s, s + 1 : t + 1], axis=0),
            )
            # mirror of inc_l; folding the part score in keeps adjoints of
            # structurally impossible grandparents at -inf
            atw = a.inc_l[:, s, t] + sc[:, t, s]
            a.cmp_r[t, s, s:t] = _lse(
                a.cmp_r[t, s, s:t],
                _lse_reduce(atw[:, None] + b.cmp_l[:, s + 1 : t + 1, t], axis=0),
            )
            a.cmp_l[:, s + 1 : t + 1, t] = _lse(
                a.cmp_l[:, s + 1 : t + 1, t], atw[:, None] + b.cmp_r[t, s, s:t]
            )
            # mirror of inc_r
            atw = a.inc_r[:, s, t] + sc[:, s, t]
            a.cmp_r[:, s, s:t] = _lse(
                a.cmp_r[:, s, s:t], atw[:, None] + b.cmp_l[s, s + 1 : t + 1, t]
            )
            a.cmp_l[s, s + 1 : t + 1, t] = _lse(
                a.cmp_l[s, s + 1 : t + 1, t],
                _lse_reduce(atw[:, None] + b.cmp_r[:, s, s:t], axis=0),
            )
    return a


def partition_and_marginals_gch2(
    scores: PartScoreTable,
) -> tuple[float, np.ndarray]:
    """(log Z, marginal table) from a single inside/outside pass."""
    _check(scores)
    n = scores.n
    b, log_z = inside_gch2(scores)
    a = outside_gch2(scores, b)
    logm = np.full((n + 1,) * 3, NEG_INF)
    for s in range(1, n + 1):
        for t in range(s + 1, n + 1):
            logm[:, s, t] = b.inc_r[:, s, t] + a.inc_r[:, s, t]
            logm[:, t, s] = b.inc_l[:, s, t] + a.inc_l[:, s, t]
    out = np.exp(logm - log_z)
    out[~valid_part_mask(GCH2, n)] = 0.0
    return log_z, out


def marginal_table_gch2(scores: PartScoreTable) -> np.ndarray:
    """m(Gch(grandparent, head, modifier)) aligned with the score table."""
    return partition_and_marginals_gch2(scores)[1]


def marginals_gch2(scores: PartScoreTable) -> dict[Part, float]:
    table = marginal_table_gch2(scores)
    return {part: float(table[part.g, part.s, part.t]) for part in scores.parts()}


def decode_gch2(scores: PartScoreTable) -> ProjectiveTree:
    """Highest-scoring tree under the grandchild decomposition."""
    _check(scores)
    n = scores.n
    sc = scores.table
    ch = GrandChart(n)
    cmp_r, cmp_l, inc_r, inc_l = ch.cmp_r, ch.cmp_l, ch.inc_r, ch.inc_l
    _seed_bases(ch)
    shape = (n + 1,) * 3
    bp = {
        name: np.zeros(shape, dtype=np.int64)
        for name in ("cmp_r", "cmp_l", "inc_r", "inc_l")
    }
    bp_root_inc = np.zeros(n + 1, dtype=np.int64)
    bp_root_cmp = np.zeros(n + 1, dtype=np.int64)
    g_idx = np.arange(n + 1)
    for k in range(1, n):
        for s in range(1, n - k + 1):
            t = s + k
            cand = cmp_r[:, s, s:t] + cmp_l[s, s + 1 : t + 1, t]
            arg = np.argmax(cand, axis=1)
            bp["inc_r"][:, s, t] = s + arg
            inc_r[:, s, t] = cand[g_idx, arg] + sc[:, s, t]
            cand = cmp_r[t, s, s:t] + cmp_l[:, s + 1 : t + 1, t]
            arg = np.argmax(cand, axis=1)
            bp["inc_l"][:, s, t] = s + arg
            inc_l[:, s, t] = cand[g_idx, arg] + sc[:, t, s]
            cand = inc_r[:, s, s + 1 : t + 1] + cmp_r[s, s + 1 : t + 1, t]
            arg = np.argmax(cand, axis=1)
            bp["cmp_r"][:, s, t] = s + 1 + arg
            cmp_r[:, s, t] = cand[g_idx, arg]
            cmp_r[s : t + 1, s, t] = NEG_INF
            cand = cmp_l[t, s, s:t] + inc_l[:, s:t, t]
            arg = np.argmax(cand, axis=1)
            bp["cmp_l"][:, s, t] = s + arg
            cmp_l[:, s, t] = cand[g_idx, arg]
            cmp_l[s : t + 1, s, t] = NEG_INF
    for t in range(1, n + 1):
        cand = ch.root_cmp[:t] + cmp_l[0, 1 : t + 1, t]
        bp_root_inc[t] = int(np.argmax(cand))
        ch.root_inc[t] = cand[bp_root_inc[t]]
        cand = ch.root_inc[1 : t + 1] + cmp_r[0, 1 : t + 1, t]
        bp_root_cmp[t] = 1 + int(np.argmax(cand))
        ch.root_cmp[t] = cand[bp_root_cmp[t] - 1]
    heads = [0] * n

    def walk(kind: str, g: int, s: int, t: int) -> None:
        if s == t:
            return
        r = int(bp[kind][g, s, t])
        if kind == "cmp_r":
            walk("inc_r", g, s, r)
            walk("cmp_r", s, r, t)
        elif kind == "cmp_l":
            walk("cmp_l", t, s, r)
            walk("inc_l", g, r, t)
        elif kind == "inc_r":
            heads[t - 1] = s
            walk("cmp_r", g, s, r)
            walk("cmp_l", s, r + 1, t)
        else:
            heads[s - 1] = t
            walk("cmp_r", t, s, r)
            walk("cmp_l", g, r + 1, t)

    def walk_root_cmp(t: int) -> None:
        if t == 0:
            return
        r = int(bp_root_cmp[t])
        walk_root_inc(r)
        walk("cmp_r", 0, r, t)

    def walk_root_inc(t: int) -> None:
        heads[t - 1] = 0
        r = int(bp_root_inc[t])
        walk_root_cmp(r)
        walk("cmp_l", 0, r + 1, t)

    walk_root_cmp(n)
    return ProjectiveTree(tuple(heads))
