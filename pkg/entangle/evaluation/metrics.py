"""Multi-label evaluation metrics.

All functions take aligned prediction and gold vectors (same order, same
label space) and return fractions in ``[0, 1]``. Formatting as percentages is
left to :func:`format_report`.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from entangle.errors import DimensionMismatch, EmptyDataset, LengthMismatch, ValidationError
from entangle.labels import LabelSpace, LabelVector

logger = logging.getLogger(__name__)

Vectors = Union[Sequence[LabelVector], np.ndarray]

ZERO_DIVISION_POLICIES = (0, 1)


def _as_matrix(vectors: Vectors, space: Optional[LabelSpace] = None) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        matrix = vectors
        if matrix.ndim != 2:
            raise DimensionMismatch(f"expected an N×L matrix, got shape {matrix.shape}")
        return matrix.astype(np.int64)
    vectors = list(vectors)
    if not vectors:
        size = space.size if space is not None else 0
        return np.zeros((0, size), dtype=np.int64)
    reference = space or vectors[0].space
    for vector in vectors:
        reference.check(vector)
    return np.array([v.bits for v in vectors], dtype=np.int64)


def _paired(pred: Vectors, gold: Vectors) -> Tuple[np.ndarray, np.ndarray]:
    p = _as_matrix(pred)
    g = _as_matrix(gold)
    if p.shape[0] != g.shape[0]:
        raise LengthMismatch(f"{p.shape[0]} predictions but {g.shape[0]} gold vectors")
    if p.shape[1] != g.shape[1]:
        raise DimensionMismatch(f"predictions have {p.shape[1]} labels, gold has {g.shape[1]}")
    if not isinstance(pred, np.ndarray) and not isinstance(gold, np.ndarray) and len(p):
        if list(pred)[0].space != list(gold)[0].space:
            raise DimensionMismatch("predictions and gold use different label spaces")
    if p.shape[0] == 0:
        raise EmptyDataset("metrics need at least one instance")
    return p, g


def _complementary(count: int, total: int) -> float:
    """``count / total`` such that complementary counts sum to exactly 1.0.

    The larger side of the pair is divided directly; the smaller is taken as
    ``1 - larger``, which is exact in binary floating point.
    """
    if 2 * count >= total:
        return count / total
    return 1.0 - (total - count) / total


def hamming_loss(pred: Vectors, gold: Vectors) -> float:
    """Fraction of (instance, label) cells where prediction and gold differ."""
    p, g = _paired(pred, gold)
    mismatches = int(np.count_nonzero(p != g))
    return _complementary(mismatches, p.size)


def lexical_accuracy(pred: Vectors, gold: Vectors) -> float:
    """Fraction of correct (instance, label) cells; ``1 - hamming_loss`` exactly."""
    p, g = _paired(pred, gold)
    matches = int(np.count_nonzero(p == g))
    return _complementary(matches, p.size)


def vector_accuracy(pred: Vectors, gold: Vectors) -> float:
    """Fraction of instances whose whole vector matches gold."""
    p, g = _paired(pred, gold)
    exact = int(np.count_nonzero((p == g).all(axis=1)))
    return exact / p.shape[0]


@dataclass(frozen=True)
class LabelMetrics:
    label: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int

    def as_dict(self) -> Dict[str, object]:
        return {
            "label": self.label,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
        }


def _check_policy(zero_division: int) -> None:
    if zero_division not in ZERO_DIVISION_POLICIES:
        raise ValidationError(f"zero_division must be 0 or 1, got {zero_division!r}")


def _ratio(numerator: int, denominator: int, zero_division: int) -> float:
    return numerator / denominator if denominator else float(zero_division)


def per_label_metrics(
    pred: Vectors,
    gold: Vectors,
    zero_division: int = 0,
    names: Optional[Sequence[str]] = None,
) -> List[LabelMetrics]:
    """Confusion-based accuracy, precision, recall and F1 for every label.

    A zero denominator resolves to ``zero_division``. F1 is ``2tp / (2tp + fp + fn)``
    so it only falls back to the policy when the label is absent from both sides.
    """
    _check_policy(zero_division)
    p, g = _paired(pred, gold)
    if names is None:
        names = _names_of(pred, gold, p.shape[1])
    n = p.shape[0]
    tp = ((p == 1) & (g == 1)).sum(axis=0)
    fp = ((p == 1) & (g == 0)).sum(axis=0)
    fn = ((p == 0) & (g == 1)).sum(axis=0)
    tn = ((p == 0) & (g == 0)).sum(axis=0)
    results = []
    for i, name in enumerate(names):
        t, f_p, f_n, t_n = int(tp[i]), int(fp[i]), int(fn[i]), int(tn[i])
        results.append(
            LabelMetrics(
                label=name,
                accuracy=(t + t_n) / n,
                precision=_ratio(t, t + f_p, zero_division),
                recall=_ratio(t, t + f_n, zero_division),
                f1=_ratio(2 * t, 2 * t + f_p + f_n, zero_division),
                tp=t,
                fp=f_p,
                fn=f_n,
                tn=t_n,
            )
        )
    return results


def macro_f1(pred: Vectors, gold: Vectors, zero_division: int = 0) -> float:
    """Unweighted mean of the per-label F1 scores."""
    scores = [m.f1 for m in per_label_metrics(pred, gold, zero_division)]
    return float(np.mean(scores))


def predicted_cooccurrence(pred: Vectors, space: Optional[LabelSpace] = None) -> np.ndarray:
    """L×L co-occurrence counts of predicted labels; the diagonal holds label counts."""
    m = _as_matrix(pred, space)
    return m.T @ m


def cooccurrence_delta(pred: Vectors, gold: Vectors) -> np.ndarray:
    """Predicted minus gold co-occurrence.

    Positive mass means the predictor pairs labels more often than the gold does.
    """
    p, g = _paired(pred, gold)
    return p.T @ p - g.T @ g


def _names_of(pred: Vectors, gold: Vectors, size: int) -> Sequence[str]:
    for vectors in (pred, gold):
        if not isinstance(vectors, np.ndarray):
            return list(vectors)[0].space.names
    return [f"label_{i}" for i in range(size)]


@dataclass(frozen=True)
class EvalReport:
    n_instances: int
    lexical_accuracy: float
    vector_accuracy: float
    hamming_loss: float
    macro_f1: float
    per_label: List[LabelMetrics] = field(default_factory=list)
    zero_division_policy: int = 0

    def as_dict(self) -> Dict[str, object]:
        return {
            "n": self.n_instances,
            "lexical_accuracy": self.lexical_accuracy,
            "vector_accuracy": self.vector_accuracy,
            "hamming_loss": self.hamming_loss,
            "macro_f1": self.macro_f1,
            "zero_division_policy": self.zero_division_policy,
            "per_label": [m.as_dict() for m in self.per_label],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "EvalReport":
        return cls(
            n_instances=int(data["n"]),
            lexical_accuracy=float(data["lexical_accuracy"]),
            vector_accuracy=float(data["vector_accuracy"]),
            hamming_loss=float(data["hamming_loss"]),
            macro_f1=float(data["macro_f1"]),
            per_label=[LabelMetrics(**m) for m in data.get("per_label", [])],
            zero_division_policy=int(data.get("zero_division_policy", 0)),
        )


SUMMARY_METRICS = ("lexical_accuracy", "vector_accuracy", "hamming_loss", "macro_f1")


def evaluate(pred: Vectors, gold: Vectors, zero_division: int = 0) -> EvalReport:
    per_label = per_label_metrics(pred, gold, zero_division)
    report = EvalReport(
        n_instances=_as_matrix(gold).shape[0],
        lexical_accuracy=lexical_accuracy(pred, gold),
        vector_accuracy=vector_accuracy(pred, gold),
        hamming_loss=hamming_loss(pred, gold),
        macro_f1=float(np.mean([m.f1 for m in per_label])),
        per_label=per_label,
        zero_division_policy=zero_division,
    )
    logger.debug(
        f"Evaluated {report.n_instances} instances: hamming {report.hamming_loss:.4f}, "
        f"macro F1 {report.macro_f1:.3f}"
    )
    return report


def compare_reports(baseline: EvalReport, corrected: EvalReport) -> Dict[str, float]:
    """Metric changes from ``baseline`` to ``corrected`` (corrected minus baseline)."""
    return {
        name: getattr(corrected, name) - getattr(baseline, name) for name in SUMMARY_METRICS
    }


def format_report(report: EvalReport, title: Optional[str] = None) -> str:
    """Plain-text table: accuracies and Hamming loss in percent, F1 as a fraction."""
    lines = []
    if title:
        lines.append(title)
    lines.append(f"instances        {report.n_instances}")
    lines.append(f"lexical accuracy {100 * report.lexical_accuracy:.2f}")
    lines.append(f"vector accuracy  {100 * report.vector_accuracy:.2f}")
    lines.append(f"hamming loss     {100 * report.hamming_loss:.2f}")
    lines.append(f"macro F1         {report.macro_f1:.3f}")
    lines.append(f"zero division    {report.zero_division_policy}")
    if report.per_label:
        width = max(len(m.label) for m in report.per_label)
        lines.append("")
        lines.append(
            f"{'label':<{width}}  accuracy  precision  recall     f1     tp     fp     fn     tn"
        )
        for m in report.per_label:
            lines.append(
                f"{m.label:<{width}}  {100 * m.accuracy:8.2f}  {m.precision:9.3f}  {m.recall:6.3f}"
                f"  {m.f1:5.3f}  {m.tp:5d}  {m.fp:5d}  {m.fn:5d}  {m.tn:5d}"
            )
    return "\n".join(lines)
