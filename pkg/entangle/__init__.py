"""Entanglement-aware MAP correction for multi-label predictions."""

__version__ = "0.1.0"

from entangle.client import Corrector
from entangle.config import Config
from entangle.errors import EntangleError, ValidationError
from entangle.inference import alpha_sweep, infer_batch, map_infer, posterior_log_objective
from entangle.labels import LabeledDataset, LabelSpace, LabelVector
from entangle.likelihood import LikelihoodRecord
from entangle.prior import IsingPrior, estimate_prior, sample_prior

# Global corrector instance
_corrector = None


def init(**kwargs):
    """Initialize the module-level corrector.

    Args:
        **kwargs: Configuration options passed to Config

    Example:
        >>> import entangle
        >>> corrector = entangle.init(epsilon=0.5, alpha=1.0)
        >>> corrector.load_prior("prior.json")
    """
    global _corrector
    if _corrector is not None:
        _corrector.close()
    config = Config(**kwargs)
    _corrector = Corrector(config)
    return _corrector


def get_corrector():
    """Get the module-level corrector.

    Returns:
        Corrector instance or None if not initialized
    """
    return _corrector


__all__ = [
    "init",
    "get_corrector",
    "Config",
    "Corrector",
    "EntangleError",
    "ValidationError",
    "IsingPrior",
    "LabeledDataset",
    "LabelSpace",
    "LabelVector",
    "LikelihoodRecord",
    "alpha_sweep",
    "estimate_prior",
    "infer_batch",
    "map_infer",
    "posterior_log_objective",
    "sample_prior",
]
