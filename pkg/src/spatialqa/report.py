"""Evaluation report output: JSON, a console table, CSV, and figures.

Given a report path like ``out/report.json``, the writer places a tidy
long-format CSV and the rendered PNG figures next to it using the same stem.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .metrics import Metrics


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def render_table(metrics: Metrics) -> str:
    lines = []
    lines.append(f"{'YN accuracy':<22}{_fmt(metrics.yn_accuracy):>10}")
    lines.append(f"{'FR exact accuracy':<22}{_fmt(metrics.fr_exact_accuracy):>10}")
    lines.append(f"{'Macro F1':<22}{_fmt(metrics.macro_f1):>10}")
    lines.append(f"{'Abstained':<22}{metrics.abstained:>10}")
    if metrics.mean_runtime_s is not None:
        lines.append(f"{'Mean s/question':<22}{metrics.mean_runtime_s:>10.6f}")
    for key in ("yn_gold_yes", "yn_gold_no", "yn_pred_yes", "yn_pred_no"):
        lines.append(f"{key:<22}{metrics.counts.get(key, 0):>10}")

    if metrics.per_relation:
        lines.append("")
        lines.append(f"{'relation':<10}{'P':>8}{'R':>8}{'F1':>8}{'support':>9}")
        for name, score in metrics.per_relation.items():
            lines.append(
                f"{name:<10}{score.precision:>8.3f}{score.recall:>8.3f}"
                f"{score.f1:>8.3f}{score.support:>9}"
            )

    if metrics.by_hops:
        lines.append("")
        lines.append(f"{'hops':<6}{'YN acc':>10}{'FR acc':>10}{'#YN':>7}{'#FR':>7}")
        for hops, entry in sorted(metrics.by_hops.items()):
            lines.append(
                f"{hops:<6}{_fmt(entry['yn_accuracy']):>10}"
                f"{_fmt(entry['fr_exact_accuracy']):>10}"
                f"{entry['yn_count']:>7}{entry['fr_count']:>7}"
            )
    return "\n".join(lines)


def _write_csv(metrics: Metrics, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["section", "key", "metric", "value"])
        for key in ("yn_accuracy", "fr_exact_accuracy", "macro_f1"):
            writer.writerow(["summary", "", key, getattr(metrics, key)])
        writer.writerow(["summary", "", "abstained", metrics.abstained])
        if metrics.mean_runtime_s is not None:
            writer.writerow(["summary", "", "mean_runtime_s", metrics.mean_runtime_s])
        for key, value in metrics.counts.items():
            writer.writerow(["counts", "", key, value])
        for name, score in metrics.per_relation.items():
            for metric in ("precision", "recall", "f1", "support", "predicted"):
                writer.writerow(["relation", name, metric, getattr(score, metric)])
        if metrics.by_hops:
            for hops, entry in sorted(metrics.by_hops.items()):
                for metric, value in entry.items():
                    writer.writerow(["hops", hops, metric, value])


def _summary_figure(metrics: Metrics, path: Path) -> None:
    labels, values = [], []
    for label, value in (
        ("YN acc", metrics.yn_accuracy),
        ("FR exact", metrics.fr_exact_accuracy),
        ("Macro F1", metrics.macro_f1),
    ):
        if value is not None:
            labels.append(label)
            values.append(value)
    if not labels:
        return
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.bar(labels, values, color="#4878d0")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title("Pipeline accuracy")
    for i, v in enumerate(values):
        ax.text(i, v + 0.02, f"{v:.3f}", ha="center", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _relations_figure(metrics: Metrics, path: Path) -> None:
    if not metrics.per_relation:
        return
    names = list(metrics.per_relation)
    f1s = [metrics.per_relation[n].f1 for n in names]
    fig, ax = plt.subplots(figsize=(max(4.5, 0.5 * len(names) + 2), 3.2))
    ax.bar(names, f1s, color="#6acc64")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("F1")
    ax.set_title("Per-relation F1 (FR questions)")
    ax.tick_params(axis="x", rotation=45)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _hops_figure(metrics: Metrics, path: Path) -> None:
    if not metrics.by_hops:
        return
    hops = sorted(metrics.by_hops)
    yn = [metrics.by_hops[h]["yn_accuracy"] for h in hops]
    fr = [metrics.by_hops[h]["fr_exact_accuracy"] for h in hops]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    if any(v is not None for v in yn):
        ax.plot(hops, [v if v is not None else float("nan") for v in yn], "o-", label="YN")
    if any(v is not None for v in fr):
        ax.plot(hops, [v if v is not None else float("nan") for v in fr], "s-", label="FR")
    ax.set_xlabel("hops")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0, 1.05)
    ax.set_title("Accuracy by derivation depth")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(metrics: Metrics, report_path) -> list[Path]:
    """Write report JSON plus CSV and figures alongside it; returns the paths."""
    report_path = Path(report_path)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    stem = report_path.with_suffix("")

    report_path.write_text(
        json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written = [report_path]

    csv_path = stem.with_name(stem.name + ".csv")
    _write_csv(metrics, csv_path)
    written.append(csv_path)

    for suffix, renderer in (
        ("_summary.png", _summary_figure),
        ("_relations.png", _relations_figure),
        ("_hops.png", _hops_figure),
    ):
        figure_path = stem.with_name(stem.name + suffix)
        renderer(metrics, figure_path)
        if figure_path.exists():
            written.append(figure_path)
    return written
