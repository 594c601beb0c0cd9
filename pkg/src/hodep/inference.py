"""Uniform dispatch over the four factorization inference engines."""
from __future__ import annotations

from typing import Callable, NamedTuple

from . import first_order, grandchild, grandsibling, sibling
from .model import DEP1, GCH2, GSIB3, SIB2


class Engine(NamedTuple):
    inside: Callable
    outside: Callable
    partition_and_marginals: Callable
    marginal_table: Callable
    marginals: Callable
    decode: Callable


ENGINES: dict[str, Engine] = {
    DEP1: Engine(
        first_order.inside_dep1,
        first_order.outside_dep1,
        first_order.partition_and_marginals_dep1,
        first_order.marginal_table_dep1,
        first_order.marginals_dep1,
        first_order.decode_dep1,
    ),
    SIB2: Engine(
        sibling.inside_sib2,
        sibling.outside_sib2,
        sibling.partition_and_marginals_sib2,
        sibling.marginal_table_sib2,
        sibling.marginals_sib2,
        sibling.decode_sib2,
    ),
    GCH2: Engine(
        grandchild.inside_gch2,
        grandchild.outside_gch2,
        grandchild.partition_and_marginals_gch2,
        grandchild.marginal_table_gch2,
        grandchild.marginals_gch2,
        grandchild.decode_gch2,
    ),
    GSIB3: Engine(
        grandsibling.inside_gsib3,
        grandsibling.outside_gsib3,
        grandsibling.partition_and_marginals_gsib3,
        grandsibling.marginal_table_gsib3,
        grandsibling.marginals_gsib3,
        grandsibling.decode_gsib3,
    ),
}


def engine_for(factorization: str) -> Engine:
    try:
        return ENGINES[factorization]
    except KeyError:
        raise ValueError(f"unknown factorization {factorization!r}") from None
