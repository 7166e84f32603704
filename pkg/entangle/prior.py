"""Maximum-entropy Ising prior over label vectors.

The prior is

    P(E) ∝ exp( Σ_i θ_i E_i + Σ_{i<j} θ_ij E_i E_j )

with closed-form parameters estimated from a labeled corpus:

    θ_i  = log( p_i / (1 - p_i) )
    θ_ij = log( p_ij / (p_i p_j) )

The partition constant is never stored. Only sampling and moment computation
normalize, and they do it transiently over all ``2**L`` configurations.
"""

import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.special import logsumexp, xlogy

from entangle.errors import (
    DegenerateJoint,
    DegenerateMarginal,
    SameIndex,
    ValidationError,
)
from entangle.labels import (
    LabeledDataset,
    LabelSpace,
    LabelVector,
    configuration_matrix,
    cooccurrence_counts,
)

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.5


@dataclass(frozen=True, eq=False)
class IsingPrior:
    """Per-label biases ``theta_i`` and strictly-upper-triangular couplings ``theta_ij``."""

    space: LabelSpace
    theta_i: np.ndarray = field(repr=False)
    theta_ij: np.ndarray = field(repr=False)
    epsilon: float = DEFAULT_EPSILON
    provenance: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        size = self.space.size
        theta_i = np.array(self.theta_i, dtype=np.float64).reshape(size)
        theta_ij = np.array(self.theta_ij, dtype=np.float64).reshape(size, size)
        if not np.isfinite(theta_i).all() or not np.isfinite(theta_ij).all():
            raise ValidationError("prior parameters must all be finite")
        if np.any(np.tril(theta_ij) != 0.0):
            raise ValidationError("theta_ij must be strictly upper triangular (i < j only)")
        if self.epsilon < 0 or not math.isfinite(self.epsilon):
            raise ValidationError(f"epsilon must be a finite non-negative number, got {self.epsilon}")
        theta_i.setflags(write=False)
        theta_ij.setflags(write=False)
        object.__setattr__(self, "theta_i", theta_i)
        object.__setattr__(self, "theta_ij", theta_ij)

    @classmethod
    def from_couplings(
        cls,
        space: LabelSpace,
        theta_i,
        couplings: Dict[Tuple[str, str], float],
        epsilon: float = 0.0,
    ) -> "IsingPrior":
        """Build a prior from biases and a ``{(name, name): value}`` coupling map."""
        theta_ij = np.zeros((space.size, space.size))
        for (a, b), value in couplings.items():
            i, j = sorted((space.index(a), space.index(b)))
            if i == j:
                raise SameIndex(f"coupling of label {a!r} with itself is not allowed")
            theta_ij[i, j] = value
        return cls(space, np.asarray(theta_i, dtype=np.float64), theta_ij, epsilon)

    def coupling(self, i: int, j: int) -> float:
        if i == j:
            raise SameIndex(f"coupling needs two distinct labels, got index {i} twice")
        a, b = (i, j) if i < j else (j, i)
        return float(self.theta_ij[a, b])

    def couplings(self) -> np.ndarray:
        """Full symmetric coupling matrix with a zero diagonal."""
        return self.theta_ij + self.theta_ij.T

    @cached_property
    def configuration_scores(self) -> np.ndarray:
        """Unnormalized log-score of every configuration, in enumeration order."""
        scores = score_configurations(self, configuration_matrix(self.space.size))
        scores.setflags(write=False)
        return scores


def score_configurations(prior: IsingPrior, configurations: np.ndarray) -> np.ndarray:
    """Ising exponent for each row of a K×L 0/1 matrix.

    Terms are accumulated elementwise in a fixed label order so that a row scores
    identically whether it is evaluated alone or inside the full enumeration.
    """
    x = np.asarray(configurations, dtype=np.float64)
    scores = np.zeros(x.shape[0], dtype=np.float64)
    size = prior.space.size
    for i in range(size):
        scores += prior.theta_i[i] * x[:, i]
    for i in range(size):
        for j in range(i + 1, size):
            coupling = prior.theta_ij[i, j]
            if coupling != 0.0:
                scores += coupling * (x[:, i] * x[:, j])
    return scores


def estimate_prior(
    data: LabeledDataset,
    epsilon: float = DEFAULT_EPSILON,
    source: Optional[str] = None,
) -> IsingPrior:
    """Closed-form maximum-entropy estimate with add-ε smoothing.

    Marginals use ``(c_i + ε) / (N + 2ε)``, joints ``(C_ij + ε) / (N + 4ε)``.
    With ``ε = 0`` degenerate marginals or empty joints raise instead of
    producing infinite parameters.
    """
    if epsilon < 0 or not math.isfinite(epsilon):
        raise ValidationError(f"epsilon must be a finite non-negative number, got {epsilon}")
    data.require_nonempty()
    space = data.space
    n = float(data.size)
    joint, marginal = cooccurrence_counts(data)
    joint = joint.astype(np.float64)
    marginal = marginal.astype(np.float64)

    if epsilon == 0:
        degenerate = [space.names[i] for i in range(space.size) if marginal[i] in (0.0, n)]
        if degenerate:
            raise DegenerateMarginal(
                f"labels {degenerate} are never or always active; use epsilon > 0"
            )
        empty = [
            (space.names[i], space.names[j])
            for i in range(space.size)
            for j in range(i + 1, space.size)
            if joint[i, j] == 0
        ]
        if empty:
            raise DegenerateJoint(f"label pairs {empty} never co-occur; use epsilon > 0")

    eps = float(epsilon)
    theta_i = np.log((marginal + eps) / (n - marginal + eps))

    theta_ij = np.zeros((space.size, space.size))
    for i in range(space.size):
        for j in range(i + 1, space.size):
            # p_ij / (p_i p_j) written over counts so exact factorization gives exactly 1.
            numerator = (joint[i, j] + eps) * (n + 2 * eps) ** 2
            denominator = (marginal[i] + eps) * (marginal[j] + eps) * (n + 4 * eps)
            theta_ij[i, j] = math.log(numerator / denominator)

    provenance = {
        "source": source,
        "n_items": data.size,
        "estimated_at": datetime.now(timezone.utc).replace(microsecond=0),
    }
    prior = IsingPrior(space, theta_i, theta_ij, eps, provenance)
    logger.info(f"Estimated Ising prior over {space.size} labels from {data.size} items (ε={eps})")
    return prior


def prior_log_score(vector: LabelVector, prior: IsingPrior) -> float:
    """Unnormalized prior log-score; the all-zero vector scores 0."""
    prior.space.check(vector)
    return float(score_configurations(prior, vector.as_array()[None, :])[0])


def select_best(scores: np.ndarray, configurations: np.ndarray) -> int:
    """Row index of the maximum score.

    Exact ties go to the configuration with fewer active labels, then to the
    lexicographically smallest bit pattern in declared label order.
    """
    best = np.flatnonzero(scores == scores.max())
    if best.size == 1:
        return int(best[0])
    return int(min(best, key=lambda k: (int(configurations[k].sum()), tuple(configurations[k]))))


def prior_mode(prior: IsingPrior) -> LabelVector:
    configurations = configuration_matrix(prior.space.size)
    row = select_best(prior.configuration_scores, configurations)
    return prior.space.vector(configurations[row])


def _configuration_probabilities(prior: IsingPrior) -> np.ndarray:
    scores = prior.configuration_scores
    return np.exp(scores - logsumexp(scores))


def sample_prior(prior: IsingPrior, n: int, seed: int = 0, id_prefix: str = "synth") -> LabeledDataset:
    """Draw ``n`` i.i.d. vectors from the normalized prior by inverse CDF."""
    if n < 1:
        raise ValidationError(f"sample size must be at least 1, got {n}")
    configurations = configuration_matrix(prior.space.size)
    cdf = np.cumsum(_configuration_probabilities(prior))
    rng = np.random.default_rng(seed)
    rows = np.searchsorted(cdf, rng.random(n), side="right")
    rows = np.minimum(rows, len(cdf) - 1)
    width = len(str(n))
    ids = [f"{id_prefix}-{k:0{width}d}" for k in range(n)]
    logger.debug(f"Sampled {n} vectors from the prior with seed {seed}")
    return LabeledDataset.from_matrix(prior.space, ids, configurations[rows])


def expected_moments(prior: IsingPrior) -> Tuple[np.ndarray, np.ndarray]:
    """Exact ``P(E_i=1)`` and ``P(E_i=1, E_j=1)`` under the normalized prior."""
    configurations = configuration_matrix(prior.space.size).astype(np.float64)
    probabilities = _configuration_probabilities(prior)
    pairwise = configurations.T @ (configurations * probabilities[:, None])
    return np.diag(pairwise).copy(), pairwise


def _contingency(data: LabeledDataset, i: int, j: int, epsilon: float) -> np.ndarray:
    a = data.matrix[:, i].astype(bool)
    b = data.matrix[:, j].astype(bool)
    table = np.array(
        [
            [np.sum(~a & ~b), np.sum(~a & b)],
            [np.sum(a & ~b), np.sum(a & b)],
        ],
        dtype=np.float64,
    )
    table += epsilon
    return table / table.sum()


def mutual_information(
    data: LabeledDataset,
    i: int,
    j: int,
    epsilon: float = 0.0,
    base: str = "nats",
) -> float:
    """Mutual information between labels ``i`` and ``j`` on the ε-smoothed 2×2 table."""
    if i == j:
        raise SameIndex(f"mutual information needs two distinct labels, got index {i} twice")
    if epsilon < 0:
        raise ValidationError(f"epsilon must be non-negative, got {epsilon}")
    if base not in ("nats", "bits"):
        raise ValidationError(f"base must be 'nats' or 'bits', got {base!r}")
    data.require_nonempty()
    # Evaluate in canonical order so MI(i, j) and MI(j, i) are bitwise equal.
    i, j = min(i, j), max(i, j)
    p = _contingency(data, i, j, epsilon)
    outer = np.outer(p.sum(axis=1), p.sum(axis=0))
    mi = float(np.sum(xlogy(p, p) - xlogy(p, outer)))
    mi = max(mi, 0.0)
    if base == "bits":
        mi /= math.log(2)
    return mi


def mutual_information_matrix(
    data: LabeledDataset, epsilon: float = 0.0, base: str = "nats"
) -> np.ndarray:
    size = data.space.size
    matrix = np.zeros((size, size))
    for i in range(size):
        for j in range(i + 1, size):
            matrix[i, j] = matrix[j, i] = mutual_information(data, i, j, epsilon, base)
    return matrix


def conditional_lift(data: LabeledDataset, given: int, target: int, epsilon: float = 0.0) -> float:
    """``P(target=1 | given=1) / P(target=1)`` on the ε-smoothed table.

    Values above 1 mean ``given`` makes ``target`` more likely.
    """
    if given == target:
        raise SameIndex(f"lift needs two distinct labels, got index {given} twice")
    data.require_nonempty()
    p = _contingency(data, given, target, epsilon)
    p_given = p[1].sum()
    p_target = p[:, 1].sum()
    if p_given == 0 or p_target == 0:
        raise DegenerateMarginal(
            f"lift undefined: label {data.space.names[given if p_given == 0 else target]!r} "
            f"never occurs; use epsilon > 0"
        )
    return float((p[1, 1] / p_given) / p_target)


def lift_matrix(data: LabeledDataset, epsilon: float = 0.0) -> np.ndarray:
    """Row ``given``, column ``target``; the diagonal is left at 1."""
    size = data.space.size
    matrix = np.ones((size, size))
    for given in range(size):
        for target in range(size):
            if given != target:
                matrix[given, target] = conditional_lift(data, given, target, epsilon)
    return matrix
