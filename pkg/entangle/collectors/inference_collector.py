"""Inference metrics backed by prometheus-client."""

import logging
import threading
from typing import Dict, Iterable, Optional

try:
    from prometheus_client import CollectorRegistry, Counter, Histogram, generate_latest
    PROMETHEUS_AVAILABLE = True
except ImportError:
    PROMETHEUS_AVAILABLE = False

logger = logging.getLogger(__name__)


class InferenceCollector:
    """Counts inferred records, label flips and evaluated configurations.

    Each collector owns its registry so several can coexist in one process.
    """

    def __init__(self, registry=None):
        self._lock = threading.RLock()
        self._metrics_enabled = False
        self.registry = None
        if PROMETHEUS_AVAILABLE:
            self._init_metrics(registry)
        else:
            logger.debug("prometheus-client not installed; inference metrics disabled")

    def _init_metrics(self, registry):
        try:
            self.registry = registry if registry is not None else CollectorRegistry()
            self.records_inferred = Counter(
                "entangle_records_inferred",
                "Records decoded by MAP inference",
                ["alpha"],
                registry=self.registry,
            )
            self.labels_flipped = Counter(
                "entangle_labels_flipped",
                "Label decisions changed relative to the independent baseline",
                ["alpha", "direction"],
                registry=self.registry,
            )
            self.configurations_evaluated = Counter(
                "entangle_configurations_evaluated",
                "Label configurations scored during exhaustive search",
                registry=self.registry,
            )
            self.batch_duration = Histogram(
                "entangle_batch_duration_seconds",
                "Time taken to infer one batch of records",
                registry=self.registry,
            )
            self._metrics_enabled = True
        except Exception as e:
            logger.warning(f"Failed to initialize Prometheus metrics: {e}")
            self._metrics_enabled = False

    @property
    def enabled(self) -> bool:
        return self._metrics_enabled

    def observe_batch(self, results: Iterable, alpha: float, configurations: int, duration: float):
        """Record one ``infer_batch`` call.

        ``configurations`` is the number of configurations scored per record.
        """
        if not self._metrics_enabled:
            return
        alpha_label = f"{alpha:g}"
        with self._lock:
            count = 0
            for result in results:
                count += 1
                for bit_map, bit_base in zip(result.map_vector.bits, result.baseline_vector.bits):
                    if bit_map > bit_base:
                        self.labels_flipped.labels(alpha=alpha_label, direction="added").inc()
                    elif bit_map < bit_base:
                        self.labels_flipped.labels(alpha=alpha_label, direction="removed").inc()
            self.records_inferred.labels(alpha=alpha_label).inc(count)
            self.configurations_evaluated.inc(count * configurations)
            self.batch_duration.observe(duration)

    def snapshot(self) -> Dict[str, float]:
        """Flatten every sample into ``{"name{label=value,...}": value}``."""
        if not self._metrics_enabled:
            return {}
        values = {}
        try:
            for metric in self.registry.collect():
                for sample in metric.samples:
                    if sample.name.endswith("_created"):
                        continue
                    labels = ",".join(f"{k}={v}" for k, v in sorted(sample.labels.items()))
                    key = f"{sample.name}{{{labels}}}" if labels else sample.name
                    values[key] = sample.value
        except Exception as e:
            logger.warning(f"Failed to collect Prometheus metrics: {e}")
        return values

    def value(self, name: str, labels: Optional[Dict[str, str]] = None) -> Optional[float]:
        if not self._metrics_enabled:
            return None
        return self.registry.get_sample_value(name, labels or {})

    def exposition(self) -> str:
        """Prometheus text exposition format."""
        if not self._metrics_enabled:
            return ""
        return generate_latest(self.registry).decode("utf-8")
