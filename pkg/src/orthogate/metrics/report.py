"""Multi-run evaluation: the full metric battery per (language x class), per
language, and overall, aggregated as mean +/- population std across runs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus import DiagnosisLabel, LanguageTag
from ..predictions import PredictionRecord
from .core import (
    EceConfig,
    MetricNotComputable,
    accuracy,
    average_precision_ovr,
    ece,
    macro_prf,
    per_class_prf,
    roc_auc_ovr,
)

METRIC_NAMES = ("precision", "recall", "f1", "accuracy", "roc_auc", "auprc", "ece")

ALL_LANGUAGES = "ALL"
MACRO = "MACRO"


@dataclass(frozen=True)
class MetricValue:
    mean: float
    std: float
    n_runs: int

    def to_json_obj(self) -> dict:
        return {"mean": self.mean, "std": self.std, "n_runs": self.n_runs}


@dataclass
class MetricReport:
    """One scope row: a (language, class) cell, a per-language macro, or the
    cross-language aggregate."""

    language: str
    class_name: str
    metrics: dict[str, MetricValue | None]
    flags: list[str] = field(default_factory=list)

    @property
    def scope(self) -> str:
        return f"{self.language}/{self.class_name}"


def scope_order() -> list[tuple[str, str]]:
    scopes: list[tuple[str, str]] = []
    for lang in LanguageTag:
        for label in DiagnosisLabel:
            scopes.append((lang.value, label.wire))
        scopes.append((lang.value, MACRO))
    scopes.append((ALL_LANGUAGES, MACRO))
    return scopes


def _single_run_scopes(
    records: list[PredictionRecord], ece_config: EceConfig
) -> dict[tuple[str, str], dict[str, float | None]]:
    """Metric values for one run; None marks a not-computable entry.

    Per-class rows report PRF and ranking metrics only (accuracy and ECE are
    set-level quantities); the overall row is the unweighted mean of the
    per-language aggregates.
    """
    by_language: dict[LanguageTag, list[PredictionRecord]] = {lang: [] for lang in LanguageTag}
    for record in records:
        by_language[record.language].append(record)

    out: dict[tuple[str, str], dict[str, float | None]] = {}
    language_rows: list[dict[str, float | None]] = []
    for lang in LanguageTag:
        recs = by_language[lang]
        for label in DiagnosisLabel:
            row: dict[str, float | None] = dict.fromkeys(METRIC_NAMES)
            if recs:
                precision, recall, f1 = per_class_prf(recs, label)
                row.update(precision=precision, recall=recall, f1=f1)
                try:
                    row["roc_auc"] = roc_auc_ovr(recs, label)
                except MetricNotComputable:
                    pass
                try:
                    row["auprc"] = average_precision_ovr(recs, label)
                except MetricNotComputable:
                    pass
            out[(lang.value, label.wire)] = row

        lang_row: dict[str, float | None] = dict.fromkeys(METRIC_NAMES)
        if recs:
            precision, recall, f1 = macro_prf(recs)
            lang_row.update(precision=precision, recall=recall, f1=f1)
            lang_row["accuracy"] = accuracy(recs)
            lang_row["ece"] = ece(recs, ece_config)
            for key, fn in (("roc_auc", roc_auc_ovr), ("auprc", average_precision_ovr)):
                values = []
                for label in DiagnosisLabel:
                    try:
                        values.append(fn(recs, label))
                    except MetricNotComputable:
                        continue
                lang_row[key] = float(np.mean(values)) if values else None
        out[(lang.value, MACRO)] = lang_row
        language_rows.append(lang_row)

    overall: dict[str, float | None] = {}
    for name in METRIC_NAMES:
        values = [row[name] for row in language_rows if row[name] is not None]
        overall[name] = float(np.mean(values)) if values else None
    out[(ALL_LANGUAGES, MACRO)] = overall
    return out


def evaluate(
    runs: list[list[PredictionRecord]], ece_config: EceConfig = EceConfig()
) -> list[MetricReport]:
    """Score every run, then aggregate each scope metric across runs.

    All runs must cover the same record ids; population std (divide by the
    number of runs) is used throughout.
    """
    if not runs:
        raise ValueError("at least one run is required")
    reference = {r.record_id for r in runs[0]}
    for i, run in enumerate(runs[1:], start=2):
        ids = {r.record_id for r in run}
        if ids != reference:
            difference = sorted(ids.symmetric_difference(reference))
            raise ValueError(
                f"run {i} covers different record ids; symmetric difference: {difference[:20]}"
            )

    per_run = [_single_run_scopes(run, ece_config) for run in runs]
    reports: list[MetricReport] = []
    for scope in scope_order():
        metrics: dict[str, MetricValue | None] = {}
        flags: list[str] = []
        for name in METRIC_NAMES:
            values = [run_scores[scope][name] for run_scores in per_run]
            present = [v for v in values if v is not None]
            if not present:
                metrics[name] = None
                continue
            if len(present) < len(values):
                flags.append(f"{name}: computable in {len(present)}/{len(values)} runs")
            metrics[name] = MetricValue(
                mean=float(np.mean(present)),
                std=float(np.std(present)),
                n_runs=len(present),
            )
        reports.append(
            MetricReport(language=scope[0], class_name=scope[1], metrics=metrics, flags=flags)
        )
    return reports


def report_to_json_obj(reports: list[MetricReport], ece_config: EceConfig) -> dict:
    scopes = {}
    for report in reports:
        scopes[report.scope] = {
            name: (value.to_json_obj() if value is not None else None)
            for name, value in report.metrics.items()
        }
        if report.flags:
            scopes[report.scope]["flags"] = list(report.flags)
    return {"ece_bins": ece_config.n_bins, "scopes": scopes}


def format_report_table(reports: list[MetricReport]) -> str:
    """Aligned plain-text table, one scope per row."""
    headers = ["scope"] + [name for name in METRIC_NAMES]
    rows = []
    for report in reports:
        cells = [report.scope]
        for name in METRIC_NAMES:
            value = report.metrics[name]
            if value is None:
                cells.append("-")
            else:
                cells.append(f"{value.mean:.4f}+/-{value.std:.4f}")
        rows.append(cells)
    widths = [max(len(row[i]) for row in [headers] + rows) for i in range(len(headers))]
    lines = []
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)))
    lines.append("  ".join("-" * widths[i] for i in range(len(headers))))
    for cells in rows:
        lines.append("  ".join(cells[i].ljust(widths[i]) for i in range(len(cells))))
    return "\n".join(lines)
