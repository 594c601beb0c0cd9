"""Attachment metrics: UAS, root accuracy, complete-match rate.

Tokens whose gold POS belongs to the active punctuation set are excluded
from UAS and complete-match counting; root accuracy is micro-averaged over
gold root tokens and never excludes punctuation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

ENGLISH_PUNCT = frozenset({"''", "``", ":", ",", "."})
CHINESE_PUNCT = frozenset({"PU"})
PUNCT_PROFILES = {
    "english": ENGLISH_PUNCT,
    "chinese": CHINESE_PUNCT,
    "none": frozenset(),
}


@dataclass(frozen=True)
class Metrics:
    uas: float
    root_accuracy: float
    complete_match: float
    scoring_tokens: int
    sentences: int

    def as_key_values(self) -> str:
        return (
            f"uas={self.uas:.6f}\n"
            f"ra={self.root_accuracy:.6f}\n"
            f"cm={self.complete_match:.6f}\n"
            f"tokens={self.scoring_tokens}\n"
            f"sentences={self.sentences}\n"
        )

    def as_table(self) -> str:
        return (
            f"sentences        {self.sentences}\n"
            f"scoring tokens   {self.scoring_tokens}\n"
            f"UAS              {100 * self.uas:.2f}%\n"
            f"root accuracy    {100 * self.root_accuracy:.2f}%\n"
            f"complete match   {100 * self.complete_match:.2f}%\n"
        )


def evaluate(
    pairs: Iterable[tuple[Sequence[int], Sequence[int], Sequence[str]]],
    punct_tags: frozenset[str] = frozenset(),
) -> Metrics:
    """Score (gold heads, predicted heads, gold POS) triples."""
    correct = scoring = 0
    root_correct = root_total = 0
    complete = sentences = 0
    for index, (gold, pred, pos) in enumerate(pairs):
        if not len(gold) == len(pred) == len(pos):
            raise ValueError(
                f"sentence {index}: length mismatch "
                f"(gold {len(gold)}, predicted {len(pred)}, POS {len(pos)})"
            )
        sentences += 1
        all_correct = True
        for g, p, tag in zip(gold, pred, pos):
            if g == 0:
                root_total += 1
                if p == 0:
                    root_correct += 1
            if tag in punct_tags:
                continue
            scoring += 1
            if g == p:
                correct += 1
            else:
                all_correct = False
        if all_correct:
            complete += 1
    if sentences == 0:
        raise ValueError("no sentences to evaluate")
    return Metrics(
        uas=correct / scoring if scoring else 1.0,
        root_accuracy=root_correct / root_total if root_total else 1.0,
        complete_match=complete / sentences,
        scoring_tokens=scoring,
        sentences=sentences,
    )
