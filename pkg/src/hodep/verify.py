"""On-demand equivalence checks of chart inference against enumeration.

For random score tables at oracle-tractable lengths, every factorization's
partition function, marginals, and decode are compared with brute-force
enumeration over all projective trees.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .inference import engine_for
from .model import FACTORIZATIONS, PartScoreTable, tree_score
from .oracle import brute_force, oracle_marginal_table

PARTITION_TOL = 1e-9
MARGINAL_TOL = 1e-9
DECODE_TOL = 1e-9


@dataclass(frozen=True)
class VerificationResult:
    factorization: str
    n: int
    trials: int
    max_partition_dev: float
    max_marginal_dev: float
    max_decode_dev: float

    @property
    def ok(self) -> bool:
        return (
            self.max_partition_dev < PARTITION_TOL
            and self.max_marginal_dev < MARGINAL_TOL
            and self.max_decode_dev < DECODE_TOL
        )


def run_verification(
    max_n: int, trials: int, seed: int
) -> tuple[list[VerificationResult], bool]:
    if not 1 <= max_n <= 6:
        raise ValueError("max_n must be between 1 and 6")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    results = []
    for factorization in FACTORIZATIONS:
        engine = engine_for(factorization)
        for n in range(1, max_n + 1):
            part_dev = marg_dev = dec_dev = 0.0
            for _ in range(trials):
                scores = PartScoreTable.random(factorization, n, rng)
                oracle = brute_force(scores)
                log_z, marginals = engine.partition_and_marginals(scores)
                part_dev = max(
                    part_dev,
                    abs(log_z - oracle.log_partition)
                    / max(1.0, abs(oracle.log_partition)),
                )
                marg_dev = max(
                    marg_dev,
                    float(
                        np.max(np.abs(marginals - oracle_marginal_table(scores)))
                    ),
                )
                tree = engine.decode(scores)
                dec_dev = max(
                    dec_dev,
                    abs(tree_score(tree.heads, scores) - oracle.best_score),
                )
            results.append(
                VerificationResult(factorization, n, trials, part_dev, marg_dev, dec_dev)
            )
    return results, all(r.ok for r in results)


def format_report(results: list[VerificationResult]) -> str:
    lines = [
        f"{'factorization':<14}{'n':>3}{'trials':>8}"
        f"{'max |d logZ|':>16}{'max |d marg|':>16}{'max |d decode|':>16}  status"
    ]
    for r in results:
        lines.append(
            f"{r.factorization:<14}{r.n:>3}{r.trials:>8}"
            f"{r.max_partition_dev:>16.3e}{r.max_marginal_dev:>16.3e}"
            f"{r.max_decode_dev:>16.3e}  {'ok' if r.ok else 'FAIL'}"
        )
    return "\n".join(lines) + "\n"
