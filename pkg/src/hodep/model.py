"""Core domain types: sentences, trees, factorization parts, and score tables.

Positions are 0..n where 0 is the artificial root and 1..n are the words.
A tree is a head array of length n: heads[m-1] is the head of word m.
All part scores live in the log domain; structurally invalid entries of a
score table hold -inf.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np

NEG_INF = float("-inf")

ROOT_FORM = "<root>"
ROOT_POS = "<root>"

DEP1 = "dep1"
SIB2 = "sib2"
GCH2 = "gch2"
GSIB3 = "gsib3"
FACTORIZATIONS = (DEP1, SIB2, GCH2, GSIB3)


class Token(NamedTuple):
    form: str
    pos: str
    cpos: str
    lemma: str = "_"
    feats: str = "_"


@dataclass(frozen=True)
class Sentence:
    """Words 1..n; position 0 is the implicit root pseudo-token."""

    tokens: tuple[Token, ...]

    def __post_init__(self):
        if len(self.tokens) < 1:
            raise ValueError("sentence must contain at least one word")
        for tok in self.tokens:
            if not tok.form:
                raise ValueError("token forms must be non-empty")

    @property
    def n(self) -> int:
        return len(self.tokens)

    def form(self, i: int) -> str:
        return ROOT_FORM if i == 0 else self.tokens[i - 1].form

    def pos(self, i: int) -> str:
        return ROOT_POS if i == 0 else self.tokens[i - 1].pos

    def cpos(self, i: int) -> str:
        return ROOT_POS if i == 0 else self.tokens[i - 1].cpos


class Dep(NamedTuple):
    s: int
    t: int


class Sib(NamedTuple):
    s: int
    r: Optional[int]
    t: int


class Gch(NamedTuple):
    g: int
    s: int
    t: int


class GSib(NamedTuple):
    g: int
    s: int
    r: Optional[int]
    t: int


Part = Union[Dep, Sib, Gch, GSib]


def validate_tree(heads: Sequence[int]) -> None:
    """Raise ValueError unless heads encodes a tree rooted at 0."""
    n = len(heads)
    if n < 1:
        raise ValueError("empty head array")
    for m, h in enumerate(heads, start=1):
        if not 0 <= h <= n:
            raise ValueError(f"head {h} of word {m} out of range 0..{n}")
        if h == m:
            raise ValueError(f"word {m} is its own head")
    for m in range(1, n + 1):
        seen = set()
        cur = m
        while cur != 0:
            if cur in seen:
                raise ValueError(f"cycle through word {m}")
            seen.add(cur)
            cur = heads[cur - 1]


def _is_ancestor(heads: Sequence[int], anc: int, node: int) -> bool:
    cur = node
    while cur != 0:
        cur = heads[cur - 1]
        if cur == anc:
            return True
    return False


def is_projective(heads: Sequence[int]) -> bool:
    """True iff every dependency (h, m) covers only descendants of h.

    Raises ValueError on non-tree input.
    """
    validate_tree(heads)
    for m, h in enumerate(heads, start=1):
        lo, hi = (h, m) if h < m else (m, h)
        for w in range(lo + 1, hi):
            if not _is_ancestor(heads, h, w):
                return False
    return True


@dataclass(frozen=True)
class ProjectiveTree:
    heads: tuple[int, ...]

    def __post_init__(self):
        if not is_projective(self.heads):
            raise ValueError(f"head array {list(self.heads)} is not projective")

    @property
    def n(self) -> int:
        return len(self.heads)

    def head_of(self, m: int) -> int:
        return self.heads[m - 1]


def _sided_modifiers(heads: Sequence[int]) -> dict[int, tuple[list[int], list[int]]]:
    """Per head: (left modifiers inside-out, right modifiers inside-out)."""
    n = len(heads)
    out = {h: ([], []) for h in range(n + 1)}
    for m in range(1, n + 1):
        h = heads[m - 1]
        if m < h:
            out[h][0].append(m)
        else:
            out[h][1].append(m)
    for h in range(n + 1):
        out[h][0].sort(reverse=True)  # inside-out: closest to the head first
        out[h][1].sort()
    return out


def _sibling_chains(heads: Sequence[int]) -> list[Sib]:
    parts = []
    sided = _sided_modifiers(heads)
    for h in range(len(heads) + 1):
        for mods in sided[h]:
            prev: Optional[int] = None
            for m in mods:
                parts.append(Sib(h, prev, m))
                prev = m
    return parts


def decompose(heads: Sequence[int], factorization: str) -> list[Part]:
    """Normative part multiset of a projective tree under a factorization."""
    n = len(heads)
    if factorization == DEP1:
        return [Dep(heads[m - 1], m) for m in range(1, n + 1)]
    if factorization == SIB2:
        return list(_sibling_chains(heads))
    if factorization == GCH2:
        return [
            Gch(heads[heads[t - 1] - 1], heads[t - 1], t)
            for t in range(1, n + 1)
            if heads[t - 1] >= 1
        ]
    if factorization == GSIB3:
        out = []
        for sib in _sibling_chains(heads):
            g = heads[sib.s - 1] if sib.s >= 1 else 0
            out.append(GSib(g, sib.s, sib.r, sib.t))
        return out
    raise ValueError(f"unknown factorization {factorization!r}")


def _axes(n: int, k: int):
    idx = np.arange(n + 1)
    return [idx.reshape([-1 if i == a else 1 for i in range(k)]) for a in range(k)]


def _sib_ok(s, r, t):
    between = ((s < r) & (r < t)) | ((t < r) & (r < s))
    return (t >= 1) & (s != t) & ((r == s) | between)


def valid_part_mask(factorization: str, n: int) -> np.ndarray:
    """Boolean mask of structurally valid score-table entries."""
    if factorization == DEP1:
        h, m = _axes(n, 2)
        return (m >= 1) & (h != m)
    if factorization == SIB2:
        s, r, t = _axes(n, 3)
        return _sib_ok(s, r, t)
    if factorization == GCH2:
        g, s, t = _axes(n, 3)
        outside = (g < np.minimum(s, t)) | (g > np.maximum(s, t))
        return (s >= 1) & (t >= 1) & (s != t) & outside
    if factorization == GSIB3:
        g, s, r, t = _axes(n, 4)
        outside = (g < np.minimum(s, t)) | (g > np.maximum(s, t))
        return _sib_ok(s, r, t) & (((s >= 1) & outside) | ((s == 0) & (g == 0)))
    raise ValueError(f"unknown factorization {factorization!r}")


def part_index(part: Part) -> tuple[int, ...]:
    """Index of a part in its factorization's score array (NONE -> r == s)."""
    if isinstance(part, Dep):
        return (part.s, part.t)
    if isinstance(part, Sib):
        return (part.s, part.s if part.r is None else part.r, part.t)
    if isinstance(part, Gch):
        return (part.g, part.s, part.t)
    if isinstance(part, GSib):
        return (part.g, part.s, part.s if part.r is None else part.r, part.t)
    raise TypeError(f"not a part: {part!r}")


def _part_from_index(factorization: str, idx: tuple[int, ...]) -> Part:
    if factorization == DEP1:
        return Dep(*idx)
    if factorization == SIB2:
        s, r, t = idx
        return Sib(s, None if r == s else r, t)
    if factorization == GCH2:
        return Gch(*idx)
    g, s, r, t = idx
    return GSib(g, s, None if r == s else r, t)


@dataclass
class PartScoreTable:
    """Dense log w(p, x) per candidate part of one factorization.

    Under composed scoring the stored value of a higher-order part already
    includes the scores of its enclosed lower-order parts, so a tree's score
    is the sum over its highest-order parts alone.
    """

    factorization: str
    n: int
    table: np.ndarray

    def __post_init__(self):
        expected = (self.n + 1,) * self.table.ndim
        if self.table.shape != expected:
            raise ValueError(f"table shape {self.table.shape} != {expected}")

    @classmethod
    def zeros(cls, factorization: str, n: int) -> "PartScoreTable":
        mask = valid_part_mask(factorization, n)
        table = np.where(mask, 0.0, NEG_INF)
        return cls(factorization, n, table)

    @classmethod
    def random(
        cls,
        factorization: str,
        n: int,
        rng: np.random.Generator,
        low: float = -2.0,
        high: float = 2.0,
    ) -> "PartScoreTable":
        mask = valid_part_mask(factorization, n)
        table = rng.uniform(low, high, size=mask.shape)
        table[~mask] = NEG_INF
        return cls(factorization, n, table)

    @property
    def valid_mask(self) -> np.ndarray:
        return valid_part_mask(self.factorization, self.n)

    def score_of(self, part: Part) -> float:
        return float(self.table[part_index(part)])

    def set_score(self, part: Part, value: float) -> None:
        idx = part_index(part)
        if not self.valid_mask[idx]:
            raise ValueError(f"structurally invalid part {part!r}")
        self.table[idx] = value

    def parts(self) -> Iterator[Part]:
        for idx in zip(*np.nonzero(self.valid_mask)):
            yield _part_from_index(self.factorization, tuple(int(i) for i in idx))


def tree_score(heads: Sequence[int], scores: PartScoreTable) -> float:
    """Sum of part scores over the tree's decomposition."""
    return float(
        sum(scores.score_of(p) for p in decompose(heads, scores.factorization))
    )
