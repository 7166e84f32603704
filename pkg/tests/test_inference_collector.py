"""Tests for inference metrics collection."""

from unittest.mock import patch

import pytest

from entangle.collectors import InferenceCollector
from entangle.inference import MapResult, infer_batch
from entangle.likelihood import LikelihoodRecord
from entangle.prior import IsingPrior


def result(space, map_bits, baseline_bits, record_id="r"):
    return MapResult(record_id, space.vector(map_bits), -1.0, space.vector(baseline_bits), 1.0)


class TestInferenceCollector:
    """Test inference collector functionality."""

    @pytest.fixture
    def collector(self):
        """Create a collector with its own registry."""
        return InferenceCollector()

    def test_enabled(self, collector):
        """Test metrics are enabled when prometheus-client is present."""
        assert collector.enabled is True
        assert collector.registry is not None

    def test_records_counted_per_alpha(self, collector, triad_space):
        """Test records are counted under their alpha label."""
        results = [result(triad_space, (1, 0, 0), (1, 0, 0))] * 3

        collector.observe_batch(results, alpha=1.0, configurations=8, duration=0.01)
        collector.observe_batch(results[:1], alpha=0.5, configurations=8, duration=0.01)

        assert collector.value("entangle_records_inferred_total", {"alpha": "1"}) == 3.0
        assert collector.value("entangle_records_inferred_total", {"alpha": "0.5"}) == 1.0
        assert collector.value("entangle_configurations_evaluated_total") == 32.0

    def test_flip_directions(self, collector, triad_space):
        """Test flips are split into added and removed labels."""
        results = [
            result(triad_space, (1, 1, 0), (1, 0, 0)),
            result(triad_space, (0, 1, 0), (1, 0, 1)),
        ]

        collector.observe_batch(results, alpha=1.0, configurations=8, duration=0.02)

        added = {"alpha": "1", "direction": "added"}
        removed = {"alpha": "1", "direction": "removed"}
        assert collector.value("entangle_labels_flipped_total", added) == 2.0
        assert collector.value("entangle_labels_flipped_total", removed) == 2.0

    def test_batch_duration(self, collector, triad_space):
        """Test every batch adds one duration observation."""
        collector.observe_batch([], alpha=1.0, configurations=8, duration=0.5)
        collector.observe_batch([], alpha=1.0, configurations=8, duration=0.25)

        assert collector.value("entangle_batch_duration_seconds_count") == 2.0
        assert collector.value("entangle_batch_duration_seconds_sum") == 0.75

    def test_snapshot_and_exposition(self, collector, triad_space):
        """Test samples are exported as a flat mapping and as text."""
        collector.observe_batch(
            [result(triad_space, (1, 0, 0), (1, 0, 0))], alpha=2.0, configurations=8, duration=0.1
        )

        snapshot = collector.snapshot()

        assert snapshot["entangle_records_inferred_total{alpha=2}"] == 1.0
        assert "entangle_records_inferred_total" in collector.exposition()

    def test_separate_registries(self, triad_space):
        """Test collectors do not share counts."""
        first, second = InferenceCollector(), InferenceCollector()

        first.observe_batch([result(triad_space, (0, 0, 0), (0, 0, 0))], 1.0, 8, 0.0)

        assert first.value("entangle_records_inferred_total", {"alpha": "1"}) == 1.0
        assert second.value("entangle_records_inferred_total", {"alpha": "1"}) is None

    def test_infer_batch_reports(self, collector, triad_space):
        """Test batch inference feeds the collector."""
        prior = IsingPrior.from_couplings(triad_space, [0.0, 0.0, 0.0], {})
        records = [
            LikelihoodRecord.from_probabilities(f"r{k}", triad_space, [0.9, 0.2, 0.6])
            for k in range(4)
        ]

        infer_batch(records, prior, alpha=1.0, collector=collector)

        assert collector.value("entangle_records_inferred_total", {"alpha": "1"}) == 4.0
        assert collector.value("entangle_configurations_evaluated_total") == 32.0

    def test_disabled_without_prometheus(self, triad_space):
        """Test the collector degrades to a no-op without prometheus-client."""
        with patch("entangle.collectors.inference_collector.PROMETHEUS_AVAILABLE", False):
            collector = InferenceCollector()

        collector.observe_batch([result(triad_space, (1, 0, 0), (0, 0, 0))], 1.0, 8, 0.1)

        assert collector.enabled is False
        assert collector.snapshot() == {}
        assert collector.value("entangle_records_inferred_total") is None
        assert collector.exposition() == ""
