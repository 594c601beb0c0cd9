"""Command-line entry point: train, parse, eval, and verify subcommands.

Data flows to standard output, logs to standard error.  Exit codes:
0 success, 1 usage error, 2 data error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import contextlib
import os
import sys

from .conll import ConllFormatError, projectivize, read_conll, write_conll
from .evaluation import PUNCT_PROFILES, evaluate
from .features import PROFILES, score_parts
from .inference import engine_for
from .model import FACTORIZATIONS
from .training import TrainConfig, load_model, save_model, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class DataError(Exception):
    pass


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _default_threads() -> int:
    env = os.environ.get("HODEP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


@contextlib.contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
    else:
        try:
            fp = open(path, "r", encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc}") from exc
        with fp:
            yield fp


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        try:
            fp = open(path, "w", encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot write {path}: {exc}") from exc
        with fp:
            yield fp


def _read_corpus(path: str):
    with _open_in(path) as fp:
        try:
            return read_conll(fp)
        except ConllFormatError as exc:
            raise DataError(f"{path}: {exc}") from exc


def _parse_corpus(corpus, weights, dictionary, factorization, profile):
    engine = engine_for(factorization)
    out = []
    for sentence, _ in corpus:
        scores = score_parts(sentence, factorization, dictionary, weights, profile)
        out.append((sentence, engine.decode(scores).heads))
    return out


def cmd_train(args) -> int:
    corpus = _read_corpus(args.train)
    if not corpus:
        raise DataError(f"{args.train}: empty corpus")
    gold = [(sentence, projectivize(tree)) for sentence, tree in corpus]
    changed = sum(
        1 for (s, raw), (_, proj) in zip(corpus, gold) if raw.heads != proj.heads
    )
    if changed:
        _log(f"projectivized {changed} non-projective gold tree(s)")
    config = TrainConfig(
        regularizer_c=args.c,
        max_iterations=args.iters,
        worker_count=args.threads,
        max_sentence_length=args.max_len,
    )
    for sentence, _ in gold:
        if sentence.n > config.max_sentence_length:
            _log(
                f"excluding {sentence.n}-word sentence over length cap "
                f"{config.max_sentence_length}"
            )
    weights, dictionary, report = train(
        gold, args.factorization, config, args.lang_profile
    )
    with _open_out(args.model_out) as fp:
        save_model(fp, weights, dictionary, args.factorization, args.lang_profile, args.c)
    _log(
        f"trained {args.factorization} model: {dictionary.size} features, "
        f"{report.iterations} iterations, objective {report.regularized_objective:.6f}"
    )
    if args.dev:
        dev = _read_corpus(args.dev)
        parsed = _parse_corpus(
            dev, weights, dictionary, args.factorization, args.lang_profile
        )
        metrics = evaluate(
            [
                (tree.heads, heads, tuple(t.pos for t in sentence.tokens))
                for (sentence, tree), (_, heads) in zip(dev, parsed)
            ]
        )
        _log(f"dev UAS {100 * metrics.uas:.2f}%")
    return EXIT_OK


def cmd_parse(args) -> int:
    with _open_in(args.model) as fp:
        try:
            weights, dictionary, factorization, profile, _ = load_model(fp)
        except ValueError as exc:
            raise DataError(f"{args.model}: {exc}") from exc
    corpus = _read_corpus(args.input)
    parsed = _parse_corpus(corpus, weights, dictionary, factorization, profile)
    with _open_out(args.output) as fp:
        write_conll(fp, parsed)
    return EXIT_OK


def cmd_eval(args) -> int:
    gold = _read_corpus(args.gold)
    pred = _read_corpus(args.pred)
    if len(gold) != len(pred):
        raise DataError(
            f"sentence count mismatch: {len(gold)} gold vs {len(pred)} predicted"
        )
    pairs = []
    for i, ((gs, gt), (ps, pt)) in enumerate(zip(gold, pred)):
        if gs.n != ps.n:
            raise DataError(f"sentence {i}: length mismatch {gs.n} vs {ps.n}")
        pairs.append((gt.heads, pt.heads, tuple(t.pos for t in gs.tokens)))
    try:
        metrics = evaluate(pairs, PUNCT_PROFILES[args.punct])
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    sys.stdout.write(metrics.as_table())
    sys.stdout.write(metrics.as_key_values())
    if args.report_dir:
        from .report import write_metrics_report

        for path in write_metrics_report(args.report_dir, metrics):
            _log(f"wrote {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import format_report, run_verification

    results, ok = run_verification(args.max_n, args.trials, args.seed)
    sys.stdout.write(format_report(results))
    if args.report_dir:
        from .report import write_verification_report

        for path in write_verification_report(args.report_dir, results):
            _log(f"wrote {path}")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> _Parser:
    parser = _Parser(prog="hodep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model on a CoNLL-X treebank")
    p.add_argument("--train", required=True, help="training file (- for stdin)")
    p.add_argument("--model-out", required=True)
    p.add_argument("--factorization", required=True, choices=FACTORIZATIONS)
    p.add_argument("--dev", help="development file for a post-training UAS report")
    p.add_argument("--c", type=float, default=0.01, help="L2 coefficient")
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--max-len", type=int, default=100)
    p.add_argument("--lang-profile", choices=PROFILES, default="generic")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", help="parse a CoNLL-X file with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", help="score predicted trees against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--punct", choices=sorted(PUNCT_PROFILES), default="none")
    p.add_argument("--report-dir", help="also write TSV and figure files here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="check chart inference against enumeration")
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report-dir", help="also write TSV and figure files here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify" and not 1 <= args.max_n <= 6:
        parser.error("--max-n must be between 1 and 6")
    try:
        return args.func(args)
    except DataError as exc:
        _log(f"error: {exc}")
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
