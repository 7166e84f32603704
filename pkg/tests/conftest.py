"""Pytest configuration and fixtures."""

import logging

import numpy as np
import pytest

from entangle.labels import LabeledDataset, LabelSpace


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Keep verbosity environment variables out of every test."""
    monkeypatch.delenv("ENTANGLE_LOG_LEVEL", raising=False)
    monkeypatch.delenv("ENTANGLE_DEBUG", raising=False)


@pytest.fixture(autouse=True)
def detach_cli_log_handler():
    """Drop the CLI's stderr handler so it never outlives a test's captured stream."""
    yield
    package_logger = logging.getLogger("entangle")
    for handler in list(package_logger.handlers):
        if handler.get_name() == "entangle-cli":
            package_logger.removeHandler(handler)


@pytest.fixture
def plutchik():
    """The default eight-label space."""
    return LabelSpace.default()


@pytest.fixture
def pair_space():
    return LabelSpace(("a", "b"))


@pytest.fixture
def triad_space():
    return LabelSpace(("sadness", "anticipation", "anger"))


@pytest.fixture
def small_gold(triad_space):
    """Six items with sadness and anticipation strongly co-occurring."""
    rows = [
        (1, 1, 0),
        (1, 1, 0),
        (1, 1, 0),
        (0, 0, 1),
        (0, 0, 0),
        (1, 0, 0),
    ]
    return LabeledDataset.from_matrix(triad_space, [f"item-{k}" for k in range(6)], rows)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
