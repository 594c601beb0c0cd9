"""Report rendering: tab-delimited summaries plus figures on disk."""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import Metrics
from .verify import VerificationResult


def write_metrics_report(report_dir: str, metrics: Metrics) -> list[str]:
    """metrics.tsv plus a bar chart of the three scores; returns paths."""
    os.makedirs(report_dir, exist_ok=True)
    tsv_path = os.path.join(report_dir, "metrics.tsv")
    with open(tsv_path, "w", encoding="utf-8") as fp:
        fp.write("metric\tvalue\n")
        fp.write(f"uas\t{metrics.uas:.6f}\n")
        fp.write(f"ra\t{metrics.root_accuracy:.6f}\n")
        fp.write(f"cm\t{metrics.complete_match:.6f}\n")
        fp.write(f"tokens\t{metrics.scoring_tokens}\n")
        fp.write(f"sentences\t{metrics.sentences}\n")
    png_path = os.path.join(report_dir, "metrics.png")
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    names = ["UAS", "RA", "CM"]
    values = [metrics.uas, metrics.root_accuracy, metrics.complete_match]
    ax.bar(names, [100 * v for v in values], color="#4878a8")
    ax.set_ylim(0, 100)
    ax.set_ylabel("percent")
    ax.set_title("attachment metrics")
    for i, v in enumerate(values):
        ax.text(i, 100 * v + 1, f"{100 * v:.1f}", ha="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [tsv_path, png_path]


def write_verification_report(
    report_dir: str, results: list[VerificationResult]
) -> list[str]:
    """verification.tsv plus a deviation chart; returns paths."""
    os.makedirs(report_dir, exist_ok=True)
    tsv_path = os.path.join(report_dir, "verification.tsv")
    with open(tsv_path, "w", encoding="utf-8") as fp:
        fp.write(
            "factorization\tn\ttrials\tmax_partition_dev\t"
            "max_marginal_dev\tmax_decode_dev\tok\n"
        )
        for r in results:
            fp.write(
                f"{r.factorization}\t{r.n}\t{r.trials}\t"
                f"{r.max_partition_dev:.3e}\t{r.max_marginal_dev:.3e}\t"
                f"{r.max_decode_dev:.3e}\t{int(r.ok)}\n"
            )
    png_path = os.path.join(report_dir, "verification.png")
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    floor = 1e-18
    for factorization in sorted({r.factorization for r in results}):
        rows = [r for r in results if r.factorization == factorization]
        ax.plot(
            [r.n for r in rows],
            [max(r.max_marginal_dev, floor) for r in rows],
            marker="o",
            label=factorization,
        )
    ax.axhline(1e-9, color="red", linestyle="--", linewidth=1, label="tolerance")
    ax.set_yscale("log")
    ax.set_xlabel("sentence length n")
    ax.set_ylabel("max marginal deviation")
    ax.set_title("chart vs enumeration")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [tsv_path, png_path]
