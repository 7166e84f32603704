"""Majority-vote aggregation and inter-annotator agreement.

Every (item, label) decision is one binary rating. Kappas pool those
decisions into a single agreement problem by default; passing ``label``
restricts the pool to one label.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from entangle.errors import IncompleteAnnotation
from entangle.labels import LabeledDataset, LabelSpace, LabelVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AnnotationSet:
    """Items rated by a fixed number ``A >= 2`` of annotators in a stable order.

    ``ratings`` has shape (items, annotators, labels).
    """

    space: LabelSpace
    ids: Tuple[str, ...]
    ratings: np.ndarray = field(repr=False)

    def __post_init__(self):
        ids = tuple(self.ids)
        ratings = np.asarray(self.ratings, dtype=np.uint8)
        if ratings.ndim != 3 or ratings.shape[0] != len(ids) or ratings.shape[2] != self.space.size:
            raise IncompleteAnnotation(
                f"ratings must have shape (items, annotators, {self.space.size}), got {ratings.shape}"
            )
        if ratings.shape[1] < 2:
            raise IncompleteAnnotation(f"need at least 2 annotators, got {ratings.shape[1]}")
        if len(set(ids)) != len(ids):
            raise IncompleteAnnotation("annotation item ids must be unique")
        ratings.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "ratings", ratings)

    @classmethod
    def from_items(
        cls, space: LabelSpace, items: Sequence[Tuple[str, Sequence[LabelVector]]]
    ) -> "AnnotationSet":
        counts = {len(vectors) for _, vectors in items}
        if len(counts) > 1:
            raise IncompleteAnnotation(
                f"every item needs the same number of annotators, found {sorted(counts)}"
            )
        for item_id, vectors in items:
            if len(vectors) < 2:
                raise IncompleteAnnotation(
                    f"need at least 2 annotators, got {len(vectors)}", record_id=item_id
                )
            for vector in vectors:
                space.check(vector)
        annotators = counts.pop() if counts else 2
        ratings = np.array(
            [[v.bits for v in vectors] for _, vectors in items], dtype=np.uint8
        ).reshape(len(items), annotators, space.size)
        return cls(space, tuple(item_id for item_id, _ in items), ratings)

    @property
    def annotator_count(self) -> int:
        return int(self.ratings.shape[1])

    def majority_gold(self) -> LabeledDataset:
        """Gold labels by per-label strict majority; even-A ties go to 0."""
        votes = self.ratings.sum(axis=1).astype(np.int64)
        gold = (2 * votes > self.annotator_count).astype(np.uint8)
        return LabeledDataset.from_matrix(self.space, self.ids, gold)

    def _decisions(self, label: Optional[int]) -> np.ndarray:
        """(decisions, annotators) matrix of pooled binary ratings."""
        if label is not None:
            return self.ratings[:, :, label]
        return self.ratings.transpose(0, 2, 1).reshape(-1, self.annotator_count)


def majority_vote(vectors: Sequence[LabelVector]) -> LabelVector:
    """1 where strictly more than half of the annotators said 1."""
    if len(vectors) < 2:
        raise IncompleteAnnotation(f"majority vote needs at least 2 annotators, got {len(vectors)}")
    space = vectors[0].space
    for vector in vectors:
        space.check(vector)
    votes = np.sum([v.bits for v in vectors], axis=0)
    return space.vector((2 * votes > len(vectors)).astype(np.uint8))


def _cohen(a: np.ndarray, b: np.ndarray) -> float:
    n = a.size
    observed = np.count_nonzero(a == b) / n
    a_yes, b_yes = np.count_nonzero(a) / n, np.count_nonzero(b) / n
    a_no, b_no = np.count_nonzero(a == 0) / n, np.count_nonzero(b == 0) / n
    expected = a_yes * b_yes + a_no * b_no
    if expected == 1.0:
        return 1.0
    return float((observed - expected) / (1.0 - expected))


def cohen_kappa_pairwise(annotations: AnnotationSet, label: Optional[int] = None) -> np.ndarray:
    """A×A matrix of Cohen's κ for every annotator pair; the diagonal is 1."""
    decisions = _decisions_or_raise(annotations, label)
    count = annotations.annotator_count
    matrix = np.ones((count, count))
    for a in range(count):
        for b in range(a + 1, count):
            matrix[a, b] = matrix[b, a] = _cohen(decisions[:, a], decisions[:, b])
    return matrix


def fleiss_kappa(annotations: AnnotationSet, label: Optional[int] = None) -> float:
    """Fleiss' κ over pooled binary decisions.

    When every rating falls in one category the statistic is undefined; 1 is
    returned since the raters agree perfectly.
    """
    decisions = _decisions_or_raise(annotations, label).astype(np.int64)
    raters = annotations.annotator_count
    yes = decisions.sum(axis=1)
    counts = np.stack([raters - yes, yes], axis=1)
    per_item = ((counts * counts).sum(axis=1) - raters) / (raters * (raters - 1))
    observed = float(per_item.mean())
    proportions = counts.sum(axis=0) / (decisions.shape[0] * raters)
    expected = float(np.sum(proportions * proportions))
    if expected == 1.0:
        logger.debug("Fleiss kappa degenerate (single category everywhere); returning 1")
        return 1.0
    return (observed - expected) / (1.0 - expected)


def _decisions_or_raise(annotations: AnnotationSet, label: Optional[int]) -> np.ndarray:
    decisions = annotations._decisions(label)
    if decisions.shape[0] == 0:
        raise IncompleteAnnotation("agreement needs at least one rated decision")
    return decisions


def agreement_report(annotations: AnnotationSet) -> Dict[str, object]:
    pairwise = cohen_kappa_pairwise(annotations)
    count = annotations.annotator_count
    upper = pairwise[np.triu_indices(count, k=1)]
    per_label: List[Dict[str, object]] = []
    for i, name in enumerate(annotations.space.names):
        label_pairwise = cohen_kappa_pairwise(annotations, label=i)
        per_label.append(
            {
                "label": name,
                "fleiss_kappa": fleiss_kappa(annotations, label=i),
                "mean_cohen_kappa": float(label_pairwise[np.triu_indices(count, k=1)].mean()),
            }
        )
    report = {
        "n_items": len(annotations.ids),
        "annotators": count,
        "fleiss_kappa": fleiss_kappa(annotations),
        "cohen_kappa_pairwise": pairwise.tolist(),
        "mean_cohen_kappa": float(upper.mean()),
        "per_label": per_label,
    }
    logger.info(
        f"Agreement over {report['n_items']} items: Fleiss κ={report['fleiss_kappa']:.4f}, "
        f"mean pairwise Cohen κ={report['mean_cohen_kappa']:.4f}"
    )
    return report
