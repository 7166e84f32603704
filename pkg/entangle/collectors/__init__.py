"""Metric collectors."""

from entangle.collectors.inference_collector import InferenceCollector

__all__ = ["InferenceCollector"]
