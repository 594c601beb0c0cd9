"""Shared chart infrastructure: log-domain accumulation and span tables.

All inference works in the log domain, so the inside/outside products of the
probability formulation become sums and the sums become log-sum-exp.
Uninitialized chart cells read as -inf, the additive identity of both
semirings used here (max-tropical for decoding, log-sum for partition
functions).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

NEG_INF = float("-inf")


def logsumexp_accumulate(cell: float, increment: float) -> float:
    """log(exp(cell) + exp(increment)) by max-shift; -inf is absorbing identity."""
    if math.isnan(cell) or math.isnan(increment):
        raise ValueError("NaN in log-sum-exp accumulation")
    if cell < increment:
        cell, increment = increment, cell
    if increment == NEG_INF:
        return cell
    return cell + math.log1p(math.exp(increment - cell))


def logsumexp_reduce(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Stable log-sum-exp along one axis; all -inf slices reduce to -inf.

    Equivalent to np.logaddexp.reduce but several times faster on the
    wide-but-short slices the higher-order charts produce.
    """
    peak = values.max(axis=axis)
    # clamping to the finite floor keeps all -inf slices at -inf without a
    # separate mask: exp still underflows to 0 and the final sum stays -inf
    shift = np.maximum(peak, np.finfo(np.float64).min)
    if axis == values.ndim - 1 or axis == -1:
        shifted = values - shift[..., None]
    else:
        shifted = values - np.expand_dims(shift, axis)
    with np.errstate(divide="ignore"):
        return shift + np.log(np.exp(shifted).sum(axis=axis))


def strided_window(
    arr: np.ndarray, offset: int, shape, strides, writeable: bool = True
) -> np.ndarray:
    """View into `arr`'s memory starting `offset` elements in, with element
    strides `strides`.

    Lets one statement cover a whole chart diagonal (all spans of one width)
    without copying, which removes the per-span Python overhead from the
    inner inference loops.  The raw ndarray constructor is used because it is
    several times cheaper than np.lib.stride_tricks.as_strided, and these
    views are built O(n) times per sentence.
    """
    item = arr.itemsize
    return np.ndarray(
        shape,
        dtype=arr.dtype,
        buffer=arr,
        offset=offset * item,
        strides=tuple(s * item for s in strides),
    )


def max_accumulate(
    cell: float, increment: float, backpointer, current_backpointer
):
    """max(cell, increment); pointer replaced only on strict improvement."""
    if math.isnan(cell) or math.isnan(increment):
        raise ValueError("NaN in max accumulation")
    if increment > cell:
        return increment, backpointer
    return cell, current_backpointer


def _grid(n: int) -> list[list[float]]:
    return [[NEG_INF] * (n + 1) for _ in range(n + 1)]


@dataclass
class SpanChart:
    """O(n^2) chart for the first-order and sibling models.

    Cells are indexed [left][right] with left <= right.  cmp_r / inc_r hold
    spans headed at the left endpoint, cmp_l / inc_l at the right endpoint.
    `sib` (sibling model only) covers the region between successive modifiers.
    """

    n: int
    cmp_r: list[list[float]] = field(default=None)
    cmp_l: list[list[float]] = field(default=None)
    inc_r: list[list[float]] = field(default=None)
    inc_l: list[list[float]] = field(default=None)
    sib: Optional[list[list[float]]] = None

    def __post_init__(self):
        for name in ("cmp_r", "cmp_l", "inc_r", "inc_l"):
            if getattr(self, name) is None:
                setattr(self, name, _grid(self.n))

    @classmethod
    def with_sibling_spans(cls, n: int) -> "SpanChart":
        return cls(n, sib=_grid(n))

    @property
    def cell_count(self) -> int:
        per = (self.n + 1) ** 2
        return per * (5 if self.sib is not None else 4)


@dataclass
class GrandChart:
    """O(n^3) chart of g-spans for the grandchild and grand-sibling models.

    g-span arrays are indexed [g][left][right]; `root_inc` / `root_cmp` are
    the root-headed spans [0, t], which carry no grandparent index.
    """

    n: int
    cmp_r: np.ndarray = None
    cmp_l: np.ndarray = None
    inc_r: np.ndarray = None
    inc_l: np.ndarray = None
    root_inc: np.ndarray = None
    root_cmp: np.ndarray = None
    sib: Optional[np.ndarray] = None

    def __post_init__(self):
        shape = (self.n + 1,) * 3
        for name in ("cmp_r", "cmp_l", "inc_r", "inc_l"):
            if getattr(self, name) is None:
                setattr(self, name, np.full(shape, NEG_INF))
        if self.root_inc is None:
            self.root_inc = np.full(self.n + 1, NEG_INF)
        if self.root_cmp is None:
            self.root_cmp = np.full(self.n + 1, NEG_INF)

    @classmethod
    def with_sibling_spans(cls, n: int) -> "GrandChart":
        return cls(n, sib=np.full((n + 1,) * 3, NEG_INF))

    @property
    def cell_count(self) -> int:
        per = (self.n + 1) ** 3
        return per * (5 if self.sib is not None else 4) + 2 * (self.n + 1)
