"""Feature extraction, the feature dictionary, and part scoring.

Templates are instantiated from lexical (L) and POS (P) slots of the part
positions and their neighbors.  Every template involving a POS slot exists in
two variants with distinct template ids: one over the fine tags and one over
tags coarsened by a per-language rule.  Scoring is composed: a higher-order
part's score adds the feature scores of the lower-order parts it encloses,
so each factorization draws on a fixed set of feature channels.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

import numpy as np

from .model import (
    DEP1,
    GCH2,
    GSIB3,
    NEG_INF,
    SIB2,
    Dep,
    GSib,
    Gch,
    Part,
    PartScoreTable,
    Sentence,
    Sib,
    valid_part_mask,
)

ENGLISH = "english"
CHINESE = "chinese"
CZECH = "czech"
GENERIC = "generic"
PROFILES = (ENGLISH, CHINESE, CZECH, GENERIC)

_NONE = "<none>"
_BOS = "<bos>"
_EOS = "<eos>"
_SEP = "\x1f"

# channels of part features combined into each factorization's composed score
CHANNELS = {
    DEP1: ("dep",),
    SIB2: ("dep", "sib"),
    GCH2: ("dep", "gch"),
    GSIB3: ("dep", "sib", "gch", "gsib"),
}


def coarsen_pos(pos: str, language_profile: str) -> str:
    """Language-specific coarse version of a POS tag."""
    if not pos:
        raise ValueError("empty POS tag")
    if language_profile == ENGLISH:
        if pos in ("PRP", "PRP$"):
            return pos
        return pos[:2]
    if language_profile == CZECH:
        return pos[0]
    if language_profile == CHINESE:
        if pos in ("PU", "CD"):
            return pos
        return pos[:-1] if len(pos) > 1 else pos
    if language_profile == GENERIC:
        return pos
    raise ValueError(f"unknown language profile {language_profile!r}")


@dataclass(frozen=True)
class Template:
    tid: int
    part_kind: str  # dep | sib | gch | gsib
    slots: tuple[tuple[str, str, int], ...]  # (L|P, position letter, offset)
    coarse: bool
    name: str

    @property
    def per_between_word(self) -> bool:
        return any(base == "b" for _, base, _ in self.slots)


def _parse_slots(spec: str) -> tuple[tuple[str, str, int], ...]:
    slots = []
    for token in spec.split():
        kind, base, rest = token[0], token[1], token[2:]
        slots.append((kind, base, int(rest) if rest else 0))
    return tuple(slots)


_DEP_SPECS = [
    # uni-gram
    "Ls Ps", "Ls", "Ps", "Lt Pt", "Lt", "Pt",
    # bi-gram
    "Ls Ps Lt Pt", "Ls Ps Pt", "Ps Lt Pt", "Ls Ps Lt", "Ls Lt Pt",
    "Ls Lt", "Ps Pt",
    # per in-between word
    "Ls Lb Lt", "Ps Pb Pt",
    # surrounding context (the fourth combination completes the set of
    # neighbor-side pairings)
    "Ps Pt Ps+1 Pt-1", "Ps Pt Ps-1 Pt-1", "Ps Pt Ps+1 Pt+1", "Ps Pt Ps-1 Pt+1",
]

_SIB_SPECS = [
    "Ls Lr Lt", "Ps Pr Pt", "Ls Ps Pr Pt", "Ps Lr Pr Pt", "Ps Pr Lt Pt",
    "Lr Lt", "Pr Pt", "Lr Pt", "Pr Lt",
]

_GCH_SPECS = [
    "Lg Ls Lt", "Pg Ps Pt", "Lg Pg Ps Pt", "Pg Ls Ps Pt", "Pg Ps Lt Pt",
    "Lg Lt", "Pg Pt", "Lg Pt", "Pg Lt",
]

_GSIB_SPECS = [
    # 4-gram
    "Lg Ps Pr Pt", "Pg Ls Pr Pt", "Pg Ps Lr Pt", "Pg Ps Pr Lt",
    "Lg Ls Pr Pt", "Lg Ps Lr Pt", "Lg Ps Pr Lt", "Pg Ls Lr Pt",
    "Lg Ls Pr Lt", "Pg Ps Lr Lt", "Pg Ps Pr Pt",
    # surrounding context
    "Pg Ps Pr Pt Pg+1 Ps+1 Pt+1", "Pg Ps Pr Pt Pg-1 Ps-1 Pt-1",
    "Pg Ps Pr Pt Pg+1 Ps+1", "Pg Ps Pr Pt Pg-1 Ps-1",
    "Pg Pr Pt Pg+1 Pr+1 Pt+1", "Pg Pr Pt Pg+1 Pr-1 Pt-1",
    "Pg Pr Pg+1 Pr+1", "Pg Pr Pg-1 Pr-1",
    "Pg Pt Pg+1 Pt+1", "Pg Pt Pg-1 Pt-1",
    "Pr Pt Pr+1 Pt+1", "Pr Pt Pr-1 Pt-1",
    # backed-off
    "Lg Pr Pt", "Pg Lr Pt", "Pg Pr Lt", "Lg Lr Pt", "Lg Pr Lt",
    "Pg Lr Lt", "Pg Pr Pt",
]

# head-of-head coordination patterns over (g, s, t); fired by both the
# grandchild and grand-sibling channels under their own template ids
_COORD_SPECS = [
    "Lg Ps", "Pg Ps", "Lg Pt", "Pg Pt", "Ps Pt",
    "Lg Ls Lt", "Lg Ps Pt", "Pg Ls Pt", "Pg Ps Lt",
    "Lg Ls Pt", "Lg Ps Lt", "Pg Ls Lt", "Pg Ps Pt",
    "Pg Ls", "Pg Lt", "Ls Pt", "Ps Lt",
]


def _build_catalog() -> tuple[Template, ...]:
    templates: list[Template] = []

    def add(part_kind: str, spec: str, label: str) -> None:
        slots = _parse_slots(spec)
        has_pos = any(kind == "P" for kind, _, _ in slots)
        variants = (False, True) if has_pos else (False,)
        for coarse in variants:
            name = f"{label}:{spec}" + ("/coarse" if coarse else "")
            templates.append(Template(len(templates), part_kind, slots, coarse, name))

    for spec in _DEP_SPECS:
        add("dep", spec, "dep")
    for spec in _SIB_SPECS:
        add("sib", spec, "sib")
    for spec in _GCH_SPECS:
        add("gch", spec, "gch")
    for spec in _COORD_SPECS:
        add("gch", spec, "gch-coord")
    for spec in _GSIB_SPECS:
        add("gsib", spec, "gsib")
    for spec in _COORD_SPECS:
        add("gsib", spec, "gsib-coord")
    return tuple(templates)


TEMPLATES: tuple[Template, ...] = _build_catalog()
_BY_KIND = {
    kind: tuple(t for t in TEMPLATES if t.part_kind == kind)
    for kind in ("dep", "sib", "gch", "gsib")
}


@functools.lru_cache(maxsize=512)
def _views(sentence: Sentence, profile: str):
    """(lex, fine POS, coarse POS) arrays over positions 0..n."""
    lex = [sentence.form(i) for i in range(sentence.n + 1)]
    fine = [sentence.pos(i) for i in range(sentence.n + 1)]
    coarse = [fine[0]] + [coarsen_pos(p, profile) for p in fine[1:]]
    return lex, fine, coarse


class FeatureExtractor:
    """Stateless template instantiation bound to one language profile."""

    def __init__(self, profile: str = GENERIC):
        if profile not in PROFILES:
            raise ValueError(f"unknown language profile {profile!r}")
        self.profile = profile

    def _fire(
        self,
        sentence: Sentence,
        templates: Iterable[Template],
        positions: dict[str, Optional[int]],
    ) -> list[tuple[int, str]]:
        n = sentence.n
        lex, fine, coarse = _views(sentence, self.profile)
        out = []
        for tpl in templates:
            pos_table = coarse if tpl.coarse else fine
            if tpl.per_between_word:
                s, t = positions["s"], positions["t"]
                lo, hi = (s, t) if s < t else (t, s)
                for b in range(lo + 1, hi):
                    local = dict(positions, b=b)
                    out.append((tpl.tid, self._key(tpl, local, lex, pos_table, n)))
            else:
                out.append((tpl.tid, self._key(tpl, positions, lex, pos_table, n)))
        return out

    @staticmethod
    def _key(tpl, positions, lex, pos_table, n) -> str:
        values = []
        for kind, base, off in tpl.slots:
            i = positions[base]
            if i is None:
                values.append(_NONE)
                continue
            i += off
            if i < 0:
                values.append(_BOS)
            elif i > n:
                values.append(_EOS)
            else:
                values.append(lex[i] if kind == "L" else pos_table[i])
        return _SEP.join(values)

    def extract_dep(self, sentence: Sentence, s: int, t: int):
        return self._fire(sentence, _BY_KIND["dep"], {"s": s, "t": t})

    def extract_sib(self, sentence: Sentence, s: int, r: Optional[int], t: int):
        return self._fire(sentence, _BY_KIND["sib"], {"s": s, "r": r, "t": t})

    def extract_gch(self, sentence: Sentence, g: int, s: int, t: int):
        return self._fire(sentence, _BY_KIND["gch"], {"g": g, "s": s, "t": t})

    def extract_gsib(
        self, sentence: Sentence, g: int, s: int, r: Optional[int], t: int
    ):
        return self._fire(
            sentence, _BY_KIND["gsib"], {"g": g, "s": s, "r": r, "t": t}
        )

    def extract_part_features(self, sentence: Sentence, part: Part):
        """Features of the part's own templates (enclosed parts excluded)."""
        if isinstance(part, Dep):
            return self.extract_dep(sentence, part.s, part.t)
        if isinstance(part, Sib):
            return self.extract_sib(sentence, part.s, part.r, part.t)
        if isinstance(part, Gch):
            return self.extract_gch(sentence, part.g, part.s, part.t)
        if isinstance(part, GSib):
            return self.extract_gsib(sentence, part.g, part.s, part.r, part.t)
        raise TypeError(f"not a part: {part!r}")


DICTIONARY_FORMAT = "hodep-dict 1"


@dataclass
class FeatureDictionary:
    """Injective map (template id, instantiated key) -> feature index."""

    index: dict[tuple[int, str], int] = field(default_factory=dict)
    frozen: bool = False

    @property
    def size(self) -> int:
        return len(self.index)

    def add(self, tid: int, key: str) -> int:
        entry = (tid, key)
        j = self.index.get(entry)
        if j is None:
            if self.frozen:
                raise RuntimeError("dictionary is frozen")
            j = len(self.index)
            self.index[entry] = j
        return j

    def lookup(self, tid: int, key: str) -> Optional[int]:
        return self.index.get((tid, key))

    def save(self, fp: TextIO) -> None:
        fp.write(DICTIONARY_FORMAT + "\n")
        fp.write(f"{self.size}\n")
        for (tid, key), j in sorted(self.index.items(), key=lambda kv: kv[1]):
            fp.write(f"{tid}\t{key}\t{j}\n")

    @classmethod
    def load(cls, fp: TextIO) -> "FeatureDictionary":
        header = fp.readline().rstrip("\n")
        if header != DICTIONARY_FORMAT:
            raise ValueError(f"unsupported dictionary format {header!r}")
        count = int(fp.readline())
        index = {}
        for _ in range(count):
            line = fp.readline().rstrip("\n")
            tid_s, rest = line.split("\t", 1)
            key, j_s = rest.rsplit("\t", 1)
            index[(int(tid_s), key)] = int(j_s)
        if len(index) != count:
            raise ValueError("duplicate dictionary entries")
        return cls(index=index, frozen=True)


def _channel_entries(factorization: str, component: str, n: int):
    """Candidate index tuples of one feature channel, in deterministic order.

    Only entries reachable through some composed part are produced: under the
    grandchild factorization root-emitted dependencies never contribute.
    """
    if component == "dep":
        lo = 1 if factorization == GCH2 else 0
        return [
            (s, t)
            for s in range(lo, n + 1)
            for t in range(1, n + 1)
            if s != t
        ]
    fact = {"sib": SIB2, "gch": GCH2, "gsib": GSIB3}[component]
    return [tuple(int(i) for i in idx) for idx in np.argwhere(valid_part_mask(fact, n))]


def _extract_channel(extractor, sentence, component, entry):
    if component == "dep":
        return extractor.extract_dep(sentence, *entry)
    if component == "sib":
        s, r, t = entry
        return extractor.extract_sib(sentence, s, None if r == s else r, t)
    if component == "gch":
        return extractor.extract_gch(sentence, *entry)
    g, s, r, t = entry
    return extractor.extract_gsib(sentence, g, s, None if r == s else r, t)


def build_dictionary(
    corpus, factorization: str, profile: str = GENERIC
) -> FeatureDictionary:
    """First-occurrence scan over all candidate parts of the training corpus."""
    if not corpus:
        raise ValueError("empty corpus")
    extractor = FeatureExtractor(profile)
    dictionary = FeatureDictionary()
    for sentence, _tree in corpus:
        for component in CHANNELS[factorization]:
            for entry in _channel_entries(factorization, component, sentence.n):
                for tid, key in _extract_channel(
                    extractor, sentence, component, entry
                ):
                    dictionary.add(tid, key)
    dictionary.frozen = True
    return dictionary


@dataclass
class _Channel:
    """Feature indices of one component's candidate entries, CSR-style."""

    entries: list[tuple[int, ...]]
    index_arrays: tuple[np.ndarray, ...]  # entries transposed, for fancy indexing
    flat: np.ndarray  # concatenated feature indices
    offsets: np.ndarray  # len(entries) + 1
    slot_of: dict[tuple[int, ...], int]

    def segment_scores(self, weights: np.ndarray) -> np.ndarray:
        csum = np.concatenate([[0.0], np.cumsum(weights[self.flat])])
        return csum[self.offsets[1:]] - csum[self.offsets[:-1]]

    def accumulate_expectations(
        self, grad: np.ndarray, entry_weights: np.ndarray
    ) -> None:
        counts = np.diff(self.offsets)
        np.add.at(grad, self.flat, np.repeat(entry_weights, counts))

    def feature_indices_of(self, entry: tuple[int, ...]) -> np.ndarray:
        i = self.slot_of[entry]
        return self.flat[self.offsets[i] : self.offsets[i + 1]]


@dataclass
class SentenceFeatures:
    """All candidate-part feature indices of one sentence, ready for scoring."""

    sentence: Sentence
    factorization: str
    channels: dict[str, _Channel]

    @property
    def n(self) -> int:
        return self.sentence.n

    def score_table(self, weights: np.ndarray) -> PartScoreTable:
        n = self.n
        tables = {}
        for component, channel in self.channels.items():
            ndim = 2 if component == "dep" else 4 if component == "gsib" else 3
            table = np.zeros((n + 1,) * ndim)
            table[channel.index_arrays] = channel.segment_scores(weights)
            tables[component] = table
        fact = self.factorization
        if fact == DEP1:
            composed = tables["dep"]
        elif fact == SIB2:
            composed = tables["sib"] + tables["dep"][:, None, :]
        elif fact == GCH2:
            composed = tables["gch"] + tables["dep"][None, :, :]
        else:
            composed = (
                tables["gsib"]
                + tables["sib"][None, :, :, :]
                + tables["gch"][:, :, None, :]
                + tables["dep"][None, :, None, :]
            )
        table = np.where(valid_part_mask(fact, n), composed, NEG_INF)
        return PartScoreTable(fact, n, table)

    def channel_marginals(self, marginal_table: np.ndarray) -> dict[str, np.ndarray]:
        """Per-channel total marginal mass, aggregated from the part marginals."""
        fact = self.factorization
        m = marginal_table
        if fact == DEP1:
            agg = {"dep": m}
        elif fact == SIB2:
            agg = {"sib": m, "dep": m.sum(axis=1)}
        elif fact == GCH2:
            agg = {"gch": m, "dep": m.sum(axis=0)}
        else:
            agg = {
                "gsib": m,
                "sib": m.sum(axis=0),
                "gch": m.sum(axis=2),
                "dep": m.sum(axis=(0, 2)),
            }
        return agg

    def accumulate_expected_counts(
        self, grad: np.ndarray, marginal_table: np.ndarray
    ) -> None:
        agg = self.channel_marginals(marginal_table)
        for component, channel in self.channels.items():
            weights = agg[component][channel.index_arrays]
            channel.accumulate_expectations(grad, weights)

    def gold_feature_indices(self, heads) -> np.ndarray:
        """Concatenated feature indices of the gold tree's composed parts."""
        from .model import decompose

        fact = self.factorization
        pieces: list[np.ndarray] = []

        def grab(component: str, entry: tuple[int, ...]) -> None:
            pieces.append(self.channels[component].feature_indices_of(entry))

        for part in decompose(heads, fact):
            if isinstance(part, Dep):
                grab("dep", (part.s, part.t))
            elif isinstance(part, Sib):
                r = part.s if part.r is None else part.r
                grab("sib", (part.s, r, part.t))
                grab("dep", (part.s, part.t))
            elif isinstance(part, Gch):
                grab("gch", (part.g, part.s, part.t))
                grab("dep", (part.s, part.t))
            else:
                r = part.s if part.r is None else part.r
                grab("gsib", (part.g, part.s, r, part.t))
                grab("sib", (part.s, r, part.t))
                if part.s >= 1:
                    grab("gch", (part.g, part.s, part.t))
                grab("dep", (part.s, part.t))
        if not pieces:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(pieces)


def compile_sentence(
    sentence: Sentence,
    factorization: str,
    dictionary: FeatureDictionary,
    profile: str = GENERIC,
) -> SentenceFeatures:
    """Resolve every candidate part's features against a frozen dictionary."""
    extractor = FeatureExtractor(profile)
    channels = {}
    for component in CHANNELS[factorization]:
        entries = _channel_entries(factorization, component, sentence.n)
        flat: list[int] = []
        offsets = [0]
        for entry in entries:
            for tid, key in _extract_channel(extractor, sentence, component, entry):
                j = dictionary.lookup(tid, key)
                if j is not None:
                    flat.append(j)
            offsets.append(len(flat))
        ndim = 2 if component == "dep" else 4 if component == "gsib" else 3
        index_arrays = tuple(
            np.array([e[d] for e in entries], dtype=np.int64) for d in range(ndim)
        )
        channels[component] = _Channel(
            entries=entries,
            index_arrays=index_arrays,
            flat=np.array(flat, dtype=np.int64),
            offsets=np.array(offsets, dtype=np.int64),
            slot_of={entry: i for i, entry in enumerate(entries)},
        )
    return SentenceFeatures(sentence, factorization, channels)


def score_parts(
    sentence: Sentence,
    factorization: str,
    dictionary: FeatureDictionary,
    weights: np.ndarray,
    profile: str = GENERIC,
) -> PartScoreTable:
    """Composed log part scores under a weight vector."""
    if weights.shape != (dictionary.size,):
        raise ValueError(
            f"weight vector length {weights.shape} != dictionary size {dictionary.size}"
        )
    return compile_sentence(sentence, factorization, dictionary, profile).score_table(
        weights
    )
