"""Configuration for entangle."""

import logging
import os
from typing import Optional, Sequence

from entangle.errors import ConfigError
from entangle.inference import DEFAULT_ALPHA_GRID
from entangle.likelihood import FILL_POLICIES
from entangle.labels import DEFAULT_LABELS, LabelSpace
from entangle.prior import DEFAULT_EPSILON

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _env_flag(value: Optional[str]) -> bool:
    return value is not None and value.strip().lower() in ("1", "true", "yes", "on")


class Config:
    """Corrector configuration."""

    def __init__(
        self,
        labels: Optional[Sequence[str]] = None,
        labels_file: Optional[str] = None,
        epsilon: float = DEFAULT_EPSILON,
        alpha: float = 1.0,
        alphas: Optional[Sequence[float]] = None,
        zero_division: int = 0,
        fill_policy: str = "error",
        normalize: bool = True,
        seed: int = 0,
        workers: int = 1,
        debug: Optional[bool] = None,
        log_level: Optional[str] = None,
    ):
        """Initialize configuration.

        Args:
            labels: Ordered label names (default: the eight Plutchik emotions)
            labels_file: Newline-separated label names; overrides ``labels``
            epsilon: Add-ε smoothing used when estimating the prior
            alpha: Prior weight for MAP inference
            alphas: Grid for the α sweep (default: 0, 0.1, 0.25, 0.5, 0.75, 1, 2, 5)
            zero_division: Value (0 or 1) of precision/recall/F1 on empty denominators
            fill_policy: ``error`` or ``neutral`` for missing parsed answers
            normalize: Rescale probability pairs so that p1 + p0 = 1
            seed: Seed for every random draw (prior sampling)
            workers: Threads used for batch inference
            debug: Enable debug logging (falls back to ENTANGLE_DEBUG)
            log_level: Logging level name (falls back to ENTANGLE_LOG_LEVEL, then WARNING)
        """
        if debug is None:
            debug = _env_flag(os.environ.get("ENTANGLE_DEBUG"))
        if not log_level:
            log_level = os.environ.get("ENTANGLE_LOG_LEVEL") or ("DEBUG" if debug else "WARNING")
        log_level = log_level.upper()
        if log_level not in LOG_LEVELS:
            raise ConfigError(f"log_level must be one of {LOG_LEVELS}, got {log_level!r}")

        if labels_file:
            space = LabelSpace.from_file(labels_file)
        else:
            space = LabelSpace(tuple(labels) if labels is not None else DEFAULT_LABELS)

        if epsilon < 0:
            raise ConfigError(f"epsilon must be non-negative, got {epsilon}")
        if alpha < 0:
            raise ConfigError(f"alpha must be non-negative, got {alpha}")
        alphas = list(DEFAULT_ALPHA_GRID if alphas is None else alphas)
        if not alphas or any(a < 0 for a in alphas):
            raise ConfigError(f"alphas must be a non-empty list of non-negative values, got {alphas}")
        if zero_division not in (0, 1):
            raise ConfigError(f"zero_division must be 0 or 1, got {zero_division!r}")
        if fill_policy not in FILL_POLICIES:
            raise ConfigError(f"fill_policy must be one of {FILL_POLICIES}, got {fill_policy!r}")
        if workers < 1:
            raise ConfigError(f"workers must be at least 1, got {workers}")

        self._space = space
        self.labels = space.names
        self.labels_file = labels_file
        self.epsilon = float(epsilon)
        self.alpha = float(alpha)
        self.alphas = [float(a) for a in alphas]
        self.zero_division = int(zero_division)
        self.fill_policy = fill_policy
        self.normalize = bool(normalize)
        self.seed = int(seed)
        self.workers = int(workers)
        self.debug = bool(debug)
        self.log_level = log_level

    @property
    def space(self) -> LabelSpace:
        return self._space

    @property
    def logging_level(self) -> int:
        return getattr(logging, self.log_level)
