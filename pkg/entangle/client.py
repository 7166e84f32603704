"""Core entangle client."""

import logging
import threading
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from entangle.collectors.inference_collector import InferenceCollector
from entangle.config import Config
from entangle.errors import DimensionMismatch, ValidationError
from entangle.evaluation.agreement import AnnotationSet, agreement_report
from entangle.evaluation.metrics import (
    EvalReport,
    compare_reports,
    cooccurrence_delta,
    evaluate,
    predicted_cooccurrence,
)
from entangle.inference import MapResult, SweepReport, alpha_sweep, align_gold, infer_batch
from entangle.labels import LabeledDataset, LabelSpace, LabelVector, StatsReport
from entangle.labels import cooccurrence_counts, dataset_statistics
from entangle.likelihood import LikelihoodRecord, responses_to_records
from entangle.prior import (
    IsingPrior,
    estimate_prior,
    lift_matrix,
    mutual_information_matrix,
    sample_prior,
)
from entangle.transport.file_transport import FileTransport
from entangle.utils.response_parser import RawResponse

logger = logging.getLogger(__name__)


class Corrector:
    """Entanglement-aware corrector.

    Holds the active prior and wires estimation, inference, evaluation and
    agreement to the file transport and the metrics collector.
    """

    def __init__(self, config: Optional[Config] = None, prior: Optional[IsingPrior] = None):
        self.config = config or Config()
        self._lock = threading.RLock()
        self.transport = FileTransport(self.config)
        self.collector = InferenceCollector()
        self._prior = prior
        self._closed = False

        if self.config.debug:
            logger.info(f"Corrector initialized over labels {list(self.config.labels)}")

    @property
    def space(self) -> LabelSpace:
        """Label space of the active prior, or the configured one when no prior is set."""
        if self._prior is not None:
            return self._prior.space
        return self.config.space

    @property
    def prior(self) -> IsingPrior:
        if self._prior is None:
            raise ValidationError("no prior loaded; call estimate_prior() or load_prior() first")
        return self._prior

    @prior.setter
    def prior(self, prior: IsingPrior) -> None:
        with self._lock:
            self._prior = prior

    # -- prior -----------------------------------------------------------

    def estimate_prior(
        self, gold: LabeledDataset, epsilon: Optional[float] = None, source: Optional[str] = None
    ) -> IsingPrior:
        """Fit the Ising prior on ``gold`` and make it the active prior."""
        eps = self.config.epsilon if epsilon is None else epsilon
        self.prior = estimate_prior(gold, epsilon=eps, source=source)
        return self._prior

    def load_prior(self, path: str) -> IsingPrior:
        self.prior = self.transport.read_prior(path)
        logger.info(f"Loaded prior over {self._prior.space.size} labels from {path}")
        return self._prior

    def save_prior(self, path: str) -> None:
        self.transport.write_prior(path, self.prior)

    def synthesize(self, n: int, seed: Optional[int] = None) -> LabeledDataset:
        """Draw ``n`` labeled items from the active prior."""
        seed = self.config.seed if seed is None else seed
        return sample_prior(self.prior, n, seed=seed)

    # -- inference -------------------------------------------------------

    def infer(
        self, records: Sequence[LikelihoodRecord], alpha: Optional[float] = None
    ) -> List[MapResult]:
        alpha = self.config.alpha if alpha is None else alpha
        return infer_batch(
            records, self.prior, alpha, workers=self.config.workers, collector=self.collector
        )

    def sweep(
        self,
        records: Sequence[LikelihoodRecord],
        gold: LabeledDataset,
        alphas: Optional[Sequence[float]] = None,
    ) -> SweepReport:
        self._check_gold_space(gold)
        return alpha_sweep(
            records,
            gold,
            self.prior,
            alphas=self.config.alphas if alphas is None else alphas,
            zero_division=self.config.zero_division,
            workers=self.config.workers,
            collector=self.collector,
        )

    def parse_responses(self, responses: Sequence[RawResponse]) -> List[LikelihoodRecord]:
        return responses_to_records(responses, self.space, self.config.fill_policy)

    # -- evaluation ------------------------------------------------------

    def _check_gold_space(self, gold: LabeledDataset) -> None:
        if gold.space != self.space:
            raise DimensionMismatch(
                f"gold labels {list(gold.space.names)} differ from {list(self.space.names)}"
            )

    def evaluate(
        self,
        ids: Sequence[str],
        predictions: Sequence[LabelVector],
        gold: LabeledDataset,
        baseline: Optional[Sequence[LabelVector]] = None,
    ) -> Dict[str, Any]:
        """Score ``predictions`` against the gold vectors of the same ids.

        With ``baseline`` the α=0 decode is scored too and the deltas are
        reported. Gold ids without a prediction are logged and ignored.
        """
        gold_vectors = align_gold(ids, gold)
        uncovered = gold.size - len(set(ids))
        if uncovered > 0:
            logger.warning(f"{uncovered} gold item(s) have no prediction and are not scored")
        zero_division = self.config.zero_division
        report = evaluate(predictions, gold_vectors, zero_division)
        result: Dict[str, Any] = {
            "report": report.as_dict(),
            "predicted_cooccurrence": predicted_cooccurrence(predictions).tolist(),
            "cooccurrence_delta": cooccurrence_delta(predictions, gold_vectors).tolist(),
        }
        if baseline is not None:
            baseline_report = evaluate(baseline, gold_vectors, zero_division)
            result["baseline"] = baseline_report.as_dict()
            result["delta"] = compare_reports(baseline_report, report)
        return result

    def evaluation_report(
        self, predictions: Sequence[LabelVector], gold_vectors: Sequence[LabelVector]
    ) -> EvalReport:
        return evaluate(predictions, gold_vectors, self.config.zero_division)

    def agreement(self, annotations: AnnotationSet) -> Dict[str, Any]:
        return agreement_report(annotations)

    def statistics(self, data: LabeledDataset) -> StatsReport:
        return dataset_statistics(data)

    def analyze(
        self, data: LabeledDataset, epsilon: Optional[float] = None, base: str = "nats"
    ) -> Dict[str, Any]:
        """Co-occurrence, mutual information and lift matrices of a labeled corpus."""
        eps = self.config.epsilon if epsilon is None else epsilon
        joint, marginal = cooccurrence_counts(data)
        mi = mutual_information_matrix(data, epsilon=eps, base=base)
        lift = lift_matrix(data, epsilon=eps)
        logger.info(f"Analyzed label entanglement over {data.size} items")
        return {
            "labels": list(data.space.names),
            "n_items": data.size,
            "epsilon": eps,
            "mi_base": base,
            "marginal_counts": marginal.tolist(),
            "cooccurrence": joint.tolist(),
            "mutual_information": np.asarray(mi).tolist(),
            "lift": np.asarray(lift).tolist(),
        }

    # -- metrics ---------------------------------------------------------

    def metrics_exposition(self) -> str:
        return self.collector.exposition()

    def close(self):
        """Release the client; the active prior is dropped."""
        if self._closed:
            return
        with self._lock:
            self._prior = None
            self._closed = True
        if self.config.debug:
            logger.info("Corrector closed")

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
