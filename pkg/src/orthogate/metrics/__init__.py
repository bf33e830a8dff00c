from .core import (
    EceConfig,
    MetricNotComputable,
    accuracy,
    average_precision_ovr,
    bin_index,
    confusion_matrix,
    ece,
    macro_f1,
    macro_prf,
    per_class_prf,
    roc_auc_ovr,
)
from .external import ingest_external_predictions
from .report import (
    ALL_LANGUAGES,
    MACRO,
    METRIC_NAMES,
    MetricReport,
    MetricValue,
    evaluate,
    format_report_table,
    report_to_json_obj,
    scope_order,
)

__all__ = [
    "EceConfig",
    "MetricNotComputable",
    "accuracy",
    "average_precision_ovr",
    "bin_index",
    "confusion_matrix",
    "ece",
    "macro_f1",
    "macro_prf",
    "per_class_prf",
    "roc_auc_ovr",
    "ingest_external_predictions",
    "ALL_LANGUAGES",
    "MACRO",
    "METRIC_NAMES",
    "MetricReport",
    "MetricValue",
    "evaluate",
    "format_report_table",
    "report_to_json_obj",
    "scope_order",
]
