"""Evaluation metrics and annotation agreement."""

from entangle.evaluation.agreement import (
    AnnotationSet,
    agreement_report,
    cohen_kappa_pairwise,
    fleiss_kappa,
    majority_vote,
)
from entangle.evaluation.metrics import (
    EvalReport,
    LabelMetrics,
    compare_reports,
    cooccurrence_delta,
    evaluate,
    format_report,
    hamming_loss,
    lexical_accuracy,
    macro_f1,
    per_label_metrics,
    predicted_cooccurrence,
    vector_accuracy,
)

__all__ = [
    "AnnotationSet",
    "EvalReport",
    "LabelMetrics",
    "agreement_report",
    "cohen_kappa_pairwise",
    "compare_reports",
    "cooccurrence_delta",
    "evaluate",
    "fleiss_kappa",
    "format_report",
    "hamming_loss",
    "lexical_accuracy",
    "macro_f1",
    "majority_vote",
    "per_label_metrics",
    "predicted_cooccurrence",
    "vector_accuracy",
]
