"""Third-order grand-sibling inference: grandparent-annotated sibling chains.

Charts hold grandparent-annotated complete/incomplete spans plus sibling
spans whose annotation slot carries the shared head of the two modifiers.
A part records (grandparent, head, inner sibling, outer modifier); chains
hanging off the root use the sentinel grandparent/head pair (0, 0).  All
statements are vectorized over the annotation axis and the outside pass
mirrors the inside statements in exact reverse order.  O(n^4) time.
"""
from __future__ import annotations

import math

import numpy as np

from .chart import NEG_INF, GrandChart, logsumexp_reduce, strided_window
from .model import GSIB3, GSib, Part, PartScoreTable, ProjectiveTree, valid_part_mask

_lse = np.logaddexp
_lse_reduce = logsumexp_reduce
# The inside pass reduces with the logaddexp ufunc rather than the max-trick
# helper: its per-element cost is independent of slice length, so measured
# runtimes track the nominal O(n^4) growth instead of being dominated by
# fixed per-call overhead at short sentence lengths.
_inside_reduce = np.logaddexp.reduce


def _check(scores: PartScoreTable) -> None:
    if scores.factorization != GSIB3:
        raise ValueError(f"expected gsib3 scores, got {scores.factorization}")


def _seed_bases(ch: GrandChart) -> None:
    n = ch.n
    for s in range(n + 1):
        ch.cmp_r[:, s, s] = 0.0
        ch.cmp_l[:, s, s] = 0.0
        ch.cmp_r[s, s, s] = NEG_INF
        ch.cmp_l[s, s, s] = NEG_INF
    ch.root_cmp[0] = 0.0


def inside_gsib3(scores: PartScoreTable) -> tuple[GrandChart, float]:
    _check(scores)
    n = scores.n
    # sc[g, head, inner, outer] with inner == head marking NONE; re-laid out as
    # [head, outer, g, inner] so each span's slice is one contiguous block
    sc = np.ascontiguousarray(scores.table.transpose(1, 3, 0, 2))
    ch = GrandChart.with_sibling_spans(n)
    cmp_r, cmp_l, inc_r, inc_l, sib = ch.cmp_r, ch.cmp_l, ch.inc_r, ch.inc_l, ch.sib
    _seed_bases(ch)
    # Each width-k diagonal is processed in one batch of strided windows
    # indexed [s - 1, grandparent, split offset j], with s = 1..n-k and
    # t = s + k; every read is a cell of width < k or a same-width cell
    # written by an earlier statement, so the batch is well-defined.
    N = n + 1
    big = N * N
    cube = N * big
    dg = N + 1  # per-s step of a cell whose left and right indices both advance
    dh = big + N + 1  # per-s step when the grandparent index advances as well
    d4 = cube + big + 1  # per-s step of sc[s.., s+k.., g, s..]
    for k in range(1, n):
        m = n - k
        diag = (N + 1 + k, (m, N), (dg, big))  # X[g, s, s + k] viewed as [s-1, g]

        # sib[g, s, t] = lse_j cmp_r[g, s, s+j] * cmp_l[g, s+1+j, t]
        a = strided_window(cmp_r, N + 1, (m, N, k), (dg, big, 1))
        b = strided_window(cmp_l, 2 * N + 1 + k, (m, N, k), (dg, big, N))
        out = strided_window(sib, *diag, writeable=True)
        out[:] = _inside_reduce(a + b, axis=2)
        mask = strided_window(sib, big + N + 1 + k, (m, k + 1), (dh, big), writeable=True)
        mask[:] = NEG_INF

        # inc_r[g, s, t] = lse over the first modifier of t's chain (r = s,
        # meaning t is the innermost modifier) and chain steps r = s+1..t-1:
        #   cmp_l[s, s+1, t] * sc[g, s, s, t]
        #   inc_r[g, s, r] * sib[s, r, t] * sc[g, s, r, t]
        inner0 = strided_window(cmp_l, big + 2 * N + 1 + k, (m,), (dh,))
        w = strided_window(sc, d4 + big * k, (m, N), (d4, N))
        val = inner0[:, None] + w
        if k >= 2:
            f = strided_window(inc_r, N + 2, (m, N, k - 1), (dg, big, 1))
            sw = strided_window(sib, big + 2 * N + 1 + k, (m, k - 1), (dh, N))
            w = strided_window(sc, d4 + big * k + 1, (m, N, k - 1), (d4, N, 1))
            val = _lse(val, _inside_reduce(f + sw[:, None, :] + w, axis=2))
        out = strided_window(inc_r, *diag, writeable=True)
        out[:] = val

        # inc_l mirror, headed at t:
        #   cmp_r[t, s, t-1] * sc[g, t, t, s]
        #   sib[t, s, r] * inc_l[g, r, t] * sc[g, t, r, s]  for r = s+1..t-1
        inner0 = strided_window(cmp_r, big * (1 + k) + N + k, (m,), (dh,))
        w = strided_window(sc, cube * (1 + k) + big + 1 + k, (m, N), (d4, N))
        val = inner0[:, None] + w
        if k >= 2:
            sw = strided_window(sib, big * (1 + k) + N + 2, (m, k - 1), (dh, 1))
            f = strided_window(inc_l, 2 * N + 1 + k, (m, N, k - 1), (dg, big, N))
            w = strided_window(sc, cube * (1 + k) + big + 2, (m, N, k - 1), (d4, N, 1))
            val = _lse(val, _inside_reduce(sw[:, None, :] + f + w, axis=2))
        out = strided_window(inc_l, *diag, writeable=True)
        out[:] = val

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
        ch.root_inc[t] = np.logaddexp.reduce(
            ch.root_inc[1:t] + sib[0, 1:t, t] + sc[0, t, 0, 1:t],
            initial=cmp_l[0, 1, t] + sc[0, t, 0, 0],
        )
        ch.root_cmp[t] = _inside_reduce(ch.root_inc[1 : t + 1] + cmp_r[0, 1 : t + 1, t])
    return ch, float(ch.root_cmp[n])


def outside_gsib3(scores: PartScoreTable, inside_chart: GrandChart) -> GrandChart:
    _check(scores)
    n = scores.n
    sc = scores.table
    b = inside_chart
    a = GrandChart.with_sibling_spans(n)
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
        # mirror of root_inc[t]: inner-most case, then sibling chain
        at = a.root_inc[t]
        a.cmp_l[0, 1, t] = _lse(a.cmp_l[0, 1, t], at + sc[0, 0, 0, t])
        a.root_inc[1:t] = _lse(
            a.root_inc[1:t], at + b.sib[0, 1:t, t] + sc[0, 0, 1:t, t]
        )
        a.sib[0, 1:t, t] = _lse(
            a.sib[0, 1:t, t], at + b.root_inc[1:t] + sc[0, 0, 1:t, t]
        )
    for k in range(n - 1, 0, -1):
        for s in range(n - k, 0, -1):
            t = s + k
            # mirror of cmp_l; adjoints of masked (invalid annotation) cells
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
                a.inc_r[:, s, s + 1 : t + 1],
                at[:, None] + b.cmp_r[s, s + 1 : t + 1, t],
            )
            a.cmp_r[s, s + 1 : t + 1, t] = _lse(
                a.cmp_r[s, s + 1 : t + 1, t],
                _lse_reduce(at[:, None] + b.inc_r[:, s, s + 1 : t + 1], axis=0),
            )
            # mirror of inc_l
            at = a.inc_l[:, s, t]
            a.cmp_r[t, s, t - 1] = _lse(
                a.cmp_r[t, s, t - 1], _lse_reduce(at + sc[:, t, t, s])
            )
            a.sib[t, s, s + 1 : t] = _lse(
                a.sib[t, s, s + 1 : t],
                _lse_reduce(
                    at[:, None] + b.inc_l[:, s + 1 : t, t] + sc[:, t, s + 1 : t, s],
                    axis=0,
                ),
            )
            a.inc_l[:, s + 1 : t, t] = _lse(
                a.inc_l[:, s + 1 : t, t],
                at[:, None] + b.sib[t, s, s + 1 : t] + sc[:, t, s + 1 : t, s],
            )
            # mirror of inc_r
            at = a.inc_r[:, s, t]
            a.cmp_l[s, s + 1, t] = _lse(
                a.cmp_l[s, s + 1, t], _lse_reduce(at + sc[:, s, s, t])
            )
            a.inc_r[:, s, s + 1 : t] = _lse(
                a.inc_r[:, s, s + 1 : t],
                at[:, None] + b.sib[s, s + 1 : t, t] + sc[:, s, s + 1 : t, t],
            )
            a.sib[s, s + 1 : t, t] = _lse(
                a.sib[s, s + 1 : t, t],
                _lse_reduce(
                    at[:, None] + b.inc_r[:, s, s + 1 : t] + sc[:, s, s + 1 : t, t],
                    axis=0,
                ),
            )
            # mirror of: sib[:, s, t] = sum_q cmp_r[:, s, q] * cmp_l[:, q+1, t]
            a.sib[s : t + 1, s, t] = NEG_INF
            at = a.sib[:, s, t]
            a.cmp_r[:, s, s:t] = _lse(
                a.cmp_r[:, s, s:t], at[:, None] + b.cmp_l[:, s + 1 : t + 1, t]
            )
            a.cmp_l[:, s + 1 : t + 1, t] = _lse(
                a.cmp_l[:, s + 1 : t + 1, t], at[:, None] + b.cmp_r[:, s, s:t]
            )
    return a


def partition_and_marginals_gsib3(
    scores: PartScoreTable,
) -> tuple[float, np.ndarray]:
    """(log Z, marginal table) from a single inside/outside pass."""
    _check(scores)
    n = scores.n
    b, log_z = inside_gsib3(scores)
    a = outside_gsib3(scores, b)
    logm = np.full((n + 1,) * 4, NEG_INF)
    for s in range(1, n + 1):
        for t in range(s + 1, n + 1):
            # head s, outer modifier t on the right
            logm[:, s, s, t] = (
                b.cmp_l[s, s + 1, t] + a.inc_r[:, s, t] + scores.table[:, s, s, t]
            )
            logm[:, s, s + 1 : t, t] = (
                b.inc_r[:, s, s + 1 : t]
                + b.sib[s, s + 1 : t, t]
                + a.inc_r[:, s, t][:, None]
                + scores.table[:, s, s + 1 : t, t]
            )
            # head t, outer modifier s on the left
            logm[:, t, t, s] = (
                b.cmp_r[t, s, t - 1] + a.inc_l[:, s, t] + scores.table[:, t, t, s]
            )
            logm[:, t, s + 1 : t, s] = (
                b.sib[t, s, s + 1 : t]
                + b.inc_l[:, s + 1 : t, t]
                + a.inc_l[:, s, t][:, None]
                + scores.table[:, t, s + 1 : t, s]
            )
    for t in range(1, n + 1):
        logm[0, 0, 0, t] = b.cmp_l[0, 1, t] + a.root_inc[t] + scores.table[0, 0, 0, t]
        logm[0, 0, 1:t, t] = (
            b.root_inc[1:t]
            + b.sib[0, 1:t, t]
            + a.root_inc[t]
            + scores.table[0, 0, 1:t, t]
        )
    out = np.exp(logm - log_z)
    out[~valid_part_mask(GSIB3, n)] = 0.0
    return log_z, out


def marginal_table_gsib3(scores: PartScoreTable) -> np.ndarray:
    """m(GSib(g, head, inner, outer)) aligned with the score table."""
    return partition_and_marginals_gsib3(scores)[1]


def marginals_gsib3(scores: PartScoreTable) -> dict[Part, float]:
    table = marginal_table_gsib3(scores)
    out: dict[Part, float] = {}
    for part in scores.parts():
        r = part.s if part.r is None else part.r
        out[part] = float(table[part.g, part.s, r, part.t])
    return out


def decode_gsib3(scores: PartScoreTable) -> ProjectiveTree:
    """Highest-scoring tree under the grand-sibling decomposition."""
    _check(scores)
    n = scores.n
    sc = scores.table
    ch = GrandChart.with_sibling_spans(n)
    cmp_r, cmp_l, inc_r, inc_l, sib = ch.cmp_r, ch.cmp_l, ch.inc_r, ch.inc_l, ch.sib
    _seed_bases(ch)
    shape = (n + 1,) * 3
    bp = {
        name: np.zeros(shape, dtype=np.int64)
        for name in ("cmp_r", "cmp_l", "inc_r", "inc_l", "sib")
    }
    bp_root_inc = np.zeros(n + 1, dtype=np.int64)
    bp_root_cmp = np.zeros(n + 1, dtype=np.int64)
    g_idx = np.arange(n + 1)
    for k in range(1, n):
        for s in range(1, n - k + 1):
            t = s + k
            cand = cmp_r[:, s, s:t] + cmp_l[:, s + 1 : t + 1, t]
            arg = np.argmax(cand, axis=1)
            bp["sib"][:, s, t] = s + arg
            sib[:, s, t] = cand[g_idx, arg]
            sib[s : t + 1, s, t] = NEG_INF
            cand = np.concatenate(
                [
                    (cmp_l[s, s + 1, t] + sc[:, s, s, t])[:, None],
                    inc_r[:, s, s + 1 : t] + sib[s, s + 1 : t, t]
                    + sc[:, s, s + 1 : t, t],
                ],
                axis=1,
            )
            arg = np.argmax(cand, axis=1)
            bp["inc_r"][:, s, t] = s + arg  # r == s marks the inner-most case
            inc_r[:, s, t] = cand[g_idx, arg]
            cand = np.concatenate(
                [
                    (cmp_r[t, s, t - 1] + sc[:, t, t, s])[:, None],
                    sib[t, s, s + 1 : t] + inc_l[:, s + 1 : t, t]
                    + sc[:, t, s + 1 : t, s],
                ],
                axis=1,
            )
            arg = np.argmax(cand, axis=1)
            bp["inc_l"][:, s, t] = s + arg
            inc_l[:, s, t] = cand[g_idx, arg]
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
        cand = np.concatenate(
            [
                [cmp_l[0, 1, t] + sc[0, 0, 0, t]],
                ch.root_inc[1:t] + sib[0, 1:t, t] + sc[0, 0, 1:t, t],
            ]
        )
        arg = int(np.argmax(cand))
        bp_root_inc[t] = arg  # 0 marks the inner-most (first) root child
        ch.root_inc[t] = cand[arg]
        cand = ch.root_inc[1 : t + 1] + cmp_r[0, 1 : t + 1, t]
        bp_root_cmp[t] = 1 + int(np.argmax(cand))
        ch.root_cmp[t] = cand[bp_root_cmp[t] - 1]
    heads = [0] * n

    def walk(kind: str, g: int, s: int, t: int) -> None:
        if s == t and kind != "sib":
            return
        r = int(bp[kind][g, s, t])
        if kind == "cmp_r":
            walk("inc_r", g, s, r)
            walk("cmp_r", s, r, t)
        elif kind == "cmp_l":
            walk("cmp_l", t, s, r)
            walk("inc_l", g, r, t)
        elif kind == "sib":
            walk("cmp_r", g, s, r)
            walk("cmp_l", g, r + 1, t)
        elif kind == "inc_r":
            heads[t - 1] = s
            if r == s:
                walk("cmp_l", s, s + 1, t)
            else:
                walk("inc_r", g, s, r)
                walk("sib", s, r, t)
        else:
            heads[s - 1] = t
            if r == s:
                walk("cmp_r", t, s, t - 1)
            else:
                walk("sib", t, s, r)
                walk("inc_l", g, r, t)

    def walk_root_cmp(t: int) -> None:
        if t == 0:
            return
        r = int(bp_root_cmp[t])
        walk_root_inc(r)
        walk("cmp_r", 0, r, t)

    def walk_root_inc(t: int) -> None:
        heads[t - 1] = 0
        r = int(bp_root_inc[t])
        if r == 0:
            walk("cmp_l", 0, 1, t)
        else:
            walk_root_inc(r)
            walk("sib", 0, r, t)

    walk_root_cmp(n)
    return ProjectiveTree(tuple(heads))
