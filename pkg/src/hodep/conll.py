"""CoNLL-X corpus reading/writing and projectivization of gold trees.

Blocks are blank-line separated; each token line has 10 tab-separated
columns (ID, FORM, LEMMA, CPOSTAG, POSTAG, FEATS, HEAD, DEPREL, PHEAD,
PDEPREL).  POSTAG is the working tag; CPOSTAG is ignored because the coarse
tag is recomputed by rule.  Gold trees may be non-projective on input; they
are replaced by the projective tree agreeing with them on the most edges.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .first_order import decode_dep1
from .model import (
    DEP1,
    NEG_INF,
    PartScoreTable,
    ProjectiveTree,
    Sentence,
    Token,
    is_projective,
    validate_tree,
)


@dataclass(frozen=True)
class RawTree:
    """A valid but possibly non-projective head array."""

    heads: tuple[int, ...]

    def __post_init__(self):
        validate_tree(self.heads)

    @property
    def n(self) -> int:
        return len(self.heads)


class ConllFormatError(ValueError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def read_conll(stream: TextIO) -> list[tuple[Sentence, RawTree]]:
    corpus = []
    tokens: list[Token] = []
    heads: list[int] = []
    seen_ids: set[int] = set()
    block_start = 1

    def flush(line_number: int) -> None:
        nonlocal tokens, heads, seen_ids
        if not tokens:
            return
        n = len(tokens)
        for i, h in enumerate(heads):
            if not 0 <= h <= n:
                raise ConllFormatError(
                    block_start + i, f"HEAD {h} out of range 0..{n}"
                )
        try:
            tree = RawTree(tuple(heads))
        except ValueError as exc:
            raise ConllFormatError(block_start, str(exc)) from exc
        corpus.append((Sentence(tuple(tokens)), tree))
        tokens, heads, seen_ids = [], [], set()

    line_number = 0
    for line_number, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            flush(line_number)
            block_start = line_number + 1
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConllFormatError(line_number, f"expected 10 columns, got {len(cols)}")
        if not tokens:
            block_start = line_number
        if "-" in cols[0] or "." in cols[0]:
            raise ConllFormatError(line_number, f"unsupported token ID {cols[0]!r}")
        try:
            token_id = int(cols[0])
        except ValueError:
            raise ConllFormatError(line_number, f"non-integer ID {cols[0]!r}") from None
        if token_id != len(tokens) + 1:
            if token_id in seen_ids:
                raise ConllFormatError(line_number, f"duplicate ID {token_id}")
            raise ConllFormatError(
                line_number, f"ID {token_id} out of sequence (expected {len(tokens) + 1})"
            )
        seen_ids.add(token_id)
        try:
            head = int(cols[6])
        except ValueError:
            raise ConllFormatError(
                line_number, f"non-integer HEAD {cols[6]!r}"
            ) from None
        tokens.append(
            Token(form=cols[1], pos=cols[4], cpos=cols[3], lemma=cols[2], feats=cols[5])
        )
        heads.append(head)
    flush(line_number + 1)
    return corpus


def write_conll(
    stream: TextIO,
    parses: Iterable[tuple[Sentence, Sequence[int]]],
) -> None:
    for sentence, heads in parses:
        if len(heads) != sentence.n:
            raise ValueError(
                f"head array length {len(heads)} != sentence length {sentence.n}"
            )
        for i, tok in enumerate(sentence.tokens, start=1):
            stream.write(
                "\t".join(
                    (
                        str(i),
                        tok.form,
                        tok.lemma,
                        tok.cpos,
                        tok.pos,
                        tok.feats,
                        str(heads[i - 1]),
                        "_",
                        "_",
                        "_",
                    )
                )
                + "\n"
            )
        stream.write("\n")


def projectivize(gold: RawTree) -> ProjectiveTree:
    """Projective tree agreeing with the gold tree on the most edges.

    Decoding with +1 for gold edges and -1 otherwise maximizes the agreement
    count; an already-projective gold tree strictly dominates and is returned
    unchanged.
    """
    if is_projective(gold.heads):
        return ProjectiveTree(gold.heads)
    n = gold.n
    table = np.full((n + 1, n + 1), -1.0)
    for m, h in enumerate(gold.heads, start=1):
        table[h, m] = 1.0
    mask = PartScoreTable.zeros(DEP1, n).valid_mask
    table[~mask] = NEG_INF
    return decode_dep1(PartScoreTable(DEP1, n, table))
