"""Maximum conditional likelihood training with L2 regularization.

The objective sums, per sentence, the gold tree's weighted feature count
minus the log partition function, minus (C/2)||lambda||^2; its gradient is
gold feature counts minus marginal-weighted expected counts minus C*lambda.
Per-sentence terms are computed independently (optionally across worker
processes) but always reduced in sentence order, so results are bit-identical
for any worker count.  Optimization uses L-BFGS with a strong-Wolfe line
search, minimizing the negated objective from lambda = 0.
"""
from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np
from scipy.optimize import minimize

from .features import (
    GENERIC,
    FeatureDictionary,
    PROFILES,
    SentenceFeatures,
    build_dictionary,
    compile_sentence,
)
from .inference import engine_for
from .model import FACTORIZATIONS, ProjectiveTree, Sentence

MODEL_FORMAT = "hodep-model 1"


@dataclass
class TrainConfig:
    regularizer_c: float = 0.01
    max_iterations: int = 200
    lbfgs_history: int = 10
    convergence_rel_tol: float = 1e-6
    worker_count: int = 1
    max_sentence_length: int = 100

    def __post_init__(self):
        if self.regularizer_c < 0:
            raise ValueError("regularizer_c must be non-negative")
        if self.lbfgs_history < 1:
            raise ValueError("lbfgs_history must be at least 1")
        if self.worker_count < 1:
            raise ValueError("worker_count must be at least 1")


@dataclass
class ObjectiveReport:
    log_likelihood: float
    regularized_objective: float
    gradient_norm: float
    history: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    message: str = ""
    excluded_sentences: int = 0


def _sentence_terms(
    sf: SentenceFeatures, gold_idx: np.ndarray, weights: np.ndarray
) -> tuple[float, np.ndarray]:
    """(log-likelihood term, gradient term) of one sentence."""
    scores = sf.score_table(weights)
    engine = engine_for(sf.factorization)
    log_z, marginal_table = engine.partition_and_marginals(scores)
    ll = float(weights[gold_idx].sum()) - log_z
    expected = np.zeros_like(weights)
    sf.accumulate_expected_counts(expected, marginal_table)
    grad = -expected
    np.add.at(grad, gold_idx, 1.0)
    return ll, grad


_WORKER_PAYLOADS: Optional[list] = None


def _init_worker(payloads) -> None:
    global _WORKER_PAYLOADS
    _WORKER_PAYLOADS = payloads


def _eval_chunk(args):
    weights, indices = args
    return [
        _sentence_terms(_WORKER_PAYLOADS[k][0], _WORKER_PAYLOADS[k][1], weights)
        for k in indices
    ]


def _chunk_indices(count: int, workers: int) -> list[list[int]]:
    bounds = np.linspace(0, count, workers + 1).astype(int)
    return [list(range(bounds[i], bounds[i + 1])) for i in range(workers)]


def _compile_corpus(corpus, factorization, dictionary, profile):
    payloads = []
    for sentence, tree in corpus:
        sf = compile_sentence(sentence, factorization, dictionary, profile)
        payloads.append((sf, sf.gold_feature_indices(tree.heads)))
    return payloads


def _evaluate(payloads, weights, regularizer_c, pool, chunks):
    if pool is None:
        results = [_sentence_terms(sf, gi, weights) for sf, gi in payloads]
    else:
        parts = pool.map(_eval_chunk, [(weights, chunk) for chunk in chunks])
        results = [term for chunk_terms in parts for term in chunk_terms]
    # fixed sentence-order reduction keeps results identical for any worker count
    log_likelihood = 0.0
    grad = np.zeros_like(weights)
    for ll_k, grad_k in results:
        log_likelihood += ll_k
        grad += grad_k
    objective = log_likelihood - 0.5 * regularizer_c * float(weights @ weights)
    grad = grad - regularizer_c * weights
    return objective, grad, log_likelihood


def objective_and_gradient(
    corpus,
    dictionary: FeatureDictionary,
    weights: np.ndarray,
    factorization: str,
    config: TrainConfig,
    profile: str = GENERIC,
) -> tuple[float, np.ndarray]:
    """Regularized log-likelihood objective and its analytic gradient."""
    if weights.shape != (dictionary.size,):
        raise ValueError("weight vector length does not match dictionary size")
    payloads = _compile_corpus(corpus, factorization, dictionary, profile)
    if config.worker_count > 1 and len(payloads) > 1:
        chunks = _chunk_indices(len(payloads), config.worker_count)
        with multiprocessing.Pool(
            config.worker_count, initializer=_init_worker, initargs=(payloads,)
        ) as pool:
            objective, grad, _ = _evaluate(
                payloads, weights, config.regularizer_c, pool, chunks
            )
    else:
        objective, grad, _ = _evaluate(
            payloads, weights, config.regularizer_c, None, None
        )
    return objective, grad


def train(
    corpus,
    factorization: str,
    config: TrainConfig,
    profile: str = GENERIC,
) -> tuple[np.ndarray, FeatureDictionary, ObjectiveReport]:
    """Fit weights by L-BFGS from lambda = 0; deterministic for fixed inputs."""
    if factorization not in FACTORIZATIONS:
        raise ValueError(f"unknown factorization {factorization!r}")
    kept = [(s, t) for s, t in corpus if s.n <= config.max_sentence_length]
    excluded = len(corpus) - len(kept)
    if not kept:
        raise ValueError("no trainable sentences (all empty or over length cap)")
    dictionary = build_dictionary(kept, factorization, profile)
    payloads = _compile_corpus(kept, factorization, dictionary, profile)
    report = ObjectiveReport(0.0, 0.0, 0.0, excluded_sentences=excluded)
    recent_objectives: dict[int, float] = {}

    pool = None
    chunks = None
    if config.worker_count > 1 and len(payloads) > 1:
        chunks = _chunk_indices(len(payloads), config.worker_count)
        pool = multiprocessing.Pool(
            config.worker_count, initializer=_init_worker, initargs=(payloads,)
        )
    try:

        def negated(w):
            objective, grad, _ = _evaluate(
                payloads, w, config.regularizer_c, pool, chunks
            )
            if math.isnan(objective):
                raise FloatingPointError("objective became NaN during training")
            if len(recent_objectives) > 64:
                recent_objectives.clear()
            recent_objectives[hash(w.tobytes())] = objective
            return -objective, -grad

        def record(wk):
            objective = recent_objectives.get(hash(wk.tobytes()))
            if objective is None:
                objective, _, _ = _evaluate(
                    payloads, wk, config.regularizer_c, pool, chunks
                )
            report.history.append(objective)

        result = minimize(
            negated,
            np.zeros(dictionary.size),
            jac=True,
            method="L-BFGS-B",
            callback=record,
            options={
                "maxiter": config.max_iterations,
                "maxcor": config.lbfgs_history,
                "ftol": config.convergence_rel_tol,
                "gtol": 0.0,
            },
        )
        weights = result.x
        objective, grad, log_likelihood = _evaluate(
            payloads, weights, config.regularizer_c, pool, chunks
        )
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    report.log_likelihood = log_likelihood
    report.regularized_objective = objective
    report.gradient_norm = float(np.linalg.norm(grad))
    report.iterations = int(result.nit)
    report.converged = bool(result.success)
    report.message = str(result.message)
    return weights, dictionary, report


def save_model(
    fp: TextIO,
    weights: np.ndarray,
    dictionary: FeatureDictionary,
    factorization: str,
    profile: str,
    regularizer_c: float,
) -> None:
    fp.write(f"{MODEL_FORMAT}\t{factorization}\t{profile}\t{regularizer_c:.17g}\n")
    dictionary.save(fp)
    for w in weights:
        fp.write(f"{w:.17g}\n")


def load_model(fp: TextIO):
    """-> (weights, dictionary, factorization, profile, regularizer_c)."""
    header = fp.readline().rstrip("\n").split("\t")
    if len(header) != 4 or header[0] != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {header[0]!r}")
    factorization, profile = header[1], header[2]
    if factorization not in FACTORIZATIONS:
        raise ValueError(f"model names unknown factorization {factorization!r}")
    if profile not in PROFILES:
        raise ValueError(f"model names unknown language profile {profile!r}")
    regularizer_c = float(header[3])
    dictionary = FeatureDictionary.load(fp)
    weights = np.array([float(fp.readline()) for _ in range(dictionary.size)])
    if not np.all(np.isfinite(weights)):
        raise ValueError("model contains non-finite weights")
    return weights, dictionary, factorization, profile, regularizer_c
