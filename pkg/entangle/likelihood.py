"""Per-label Bernoulli likelihoods built from classifier yes/no scores."""

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from entangle.errors import (
    DuplicateResponse,
    MissingResponse,
    MixedEncoding,
    NonFiniteLogit,
    UnknownLabel,
    ValidationError,
)
from entangle.labels import LabelSpace, LabelVector
from entangle.utils.response_parser import RawResponse, parse_response

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-9

FILL_POLICIES = ("error", "neutral")


def _clamp(values: np.ndarray, floor: float, normalized: bool) -> np.ndarray:
    if normalized:
        return np.clip(values, floor, 1.0 - floor)
    return np.maximum(values, floor)


@dataclass(frozen=True, eq=False)
class LikelihoodRecord:
    """Probability of "yes" (``p1``) and "no" (``p0``) for every label of one instance.

    Normalized records hold ``p1, p0`` in ``[δ, 1-δ]``. Unnormalized records keep
    arbitrary positive pairs (floored at δ); every argmax is unaffected by the
    per-label scale.
    """

    id: str
    space: LabelSpace
    p1: np.ndarray = field(repr=False)
    p0: np.ndarray = field(repr=False)
    normalized: bool = True
    confidence: Dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        size = self.space.size
        p1 = np.array(self.p1, dtype=np.float64).reshape(-1)
        p0 = np.array(self.p0, dtype=np.float64).reshape(-1)
        if p1.shape != (size,) or p0.shape != (size,):
            raise ValidationError(
                f"likelihood vectors must have {size} entries, got {p1.size} and {p0.size}",
                record_id=self.id,
            )
        if not (np.isfinite(p1).all() and np.isfinite(p0).all()):
            raise ValidationError("likelihood values must be finite", record_id=self.id)
        if (p1 < 0).any() or (p0 < 0).any():
            raise ValidationError("likelihood values must be non-negative", record_id=self.id)
        p1 = _clamp(p1, PROB_FLOOR, self.normalized)
        p0 = _clamp(p0, PROB_FLOOR, self.normalized)
        p1.setflags(write=False)
        p0.setflags(write=False)
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p0", p0)

    @classmethod
    def from_logits(
        cls,
        record_id: str,
        space: LabelSpace,
        yes_logits: Sequence[float],
        no_logits: Sequence[float],
        confidence: Optional[Dict[str, int]] = None,
    ) -> "LikelihoodRecord":
        pairs = []
        for y, n in zip(yes_logits, no_logits):
            try:
                pairs.append(logits_to_probs(y, n))
            except NonFiniteLogit as e:
                raise e.with_record(record_id)
        p1, p0 = zip(*pairs) if pairs else ((), ())
        return cls(record_id, space, np.array(p1), np.array(p0), True, dict(confidence or {}))

    @classmethod
    def from_probabilities(
        cls,
        record_id: str,
        space: LabelSpace,
        p1: Sequence[float],
        p0: Optional[Sequence[float]] = None,
        normalize: bool = True,
        confidence: Optional[Dict[str, int]] = None,
    ) -> "LikelihoodRecord":
        """``p0`` defaults to ``1 - p1``. With ``normalize`` pairs are rescaled to sum to 1."""
        yes = np.asarray(p1, dtype=np.float64)
        if p0 is None:
            if (yes < 0).any() or (yes > 1).any():
                raise ValidationError("p1 must lie in [0, 1] when p0 is omitted", record_id=record_id)
            no = 1.0 - yes
        else:
            no = np.asarray(p0, dtype=np.float64)
        if normalize:
            total = yes + no
            if (total <= 0).any():
                raise ValidationError("p1 + p0 must be positive", record_id=record_id)
            yes = yes / total
            no = 1.0 - yes
        return cls(record_id, space, yes, no, normalize, dict(confidence or {}))

    @property
    def log_p1(self) -> np.ndarray:
        return np.log(self.p1)

    @property
    def log_p0(self) -> np.ndarray:
        return np.log(self.p0)

    def as_mapping(self) -> Dict[str, Dict[str, float]]:
        return {
            name: {"p1": float(a), "p0": float(b)}
            for name, a, b in zip(self.space.names, self.p1, self.p0)
        }


def logits_to_probs(yes_logit: float, no_logit: float) -> Tuple[float, float]:
    """Two-way softmax of the yes/no logits, clamped into ``[δ, 1-δ]``."""
    if not (math.isfinite(yes_logit) and math.isfinite(no_logit)):
        raise NonFiniteLogit(f"logits must be finite, got yes={yes_logit}, no={no_logit}")
    p1 = float(expit(float(yes_logit) - float(no_logit)))
    p0 = 1.0 - p1
    return (
        min(max(p1, PROB_FLOOR), 1.0 - PROB_FLOOR),
        min(max(p0, PROB_FLOOR), 1.0 - PROB_FLOOR),
    )


def score_likelihood(record: LikelihoodRecord, configurations: np.ndarray) -> np.ndarray:
    """Bernoulli log-likelihood of each row of a K×L 0/1 matrix.

    Accumulated label by label in a fixed order, elementwise, so single rows and
    full enumerations agree bit for bit.
    """
    x = np.asarray(configurations)
    log_p1 = record.log_p1
    log_p0 = record.log_p0
    scores = np.zeros(x.shape[0], dtype=np.float64)
    for i in range(record.space.size):
        scores += np.where(x[:, i] == 1, log_p1[i], log_p0[i])
    return scores


def likelihood_log_score(vector: LabelVector, record: LikelihoodRecord) -> float:
    """``Σ_i [E_i log p1_i + (1 - E_i) log p0_i]``."""
    record.space.check(vector)
    return float(score_likelihood(record, vector.as_array()[None, :])[0])


def threshold_decode(record: LikelihoodRecord) -> LabelVector:
    """Independent per-label decision; an exact tie decodes to 0."""
    return record.space.vector((record.p1 > record.p0).astype(np.uint8))


def responses_to_records(
    responses: Sequence[RawResponse],
    space: LabelSpace,
    fill_policy: str = "error",
) -> List[LikelihoodRecord]:
    """Turn tagged yes/no answers into near-deterministic likelihood records.

    "yes" maps to ``(1-δ, δ)`` and "no" to ``(δ, 1-δ)``. Missing or unparseable
    answers raise under the ``error`` policy and become ``(0.5, 0.5)`` under
    ``neutral``. Parsed confidences are kept as metadata only.
    """
    if fill_policy not in FILL_POLICIES:
        raise ValidationError(f"fill_policy must be one of {FILL_POLICIES}, got {fill_policy!r}")

    grouped: "OrderedDict[str, Dict[str, RawResponse]]" = OrderedDict()
    for response in responses:
        space.index(response.label)
        by_label = grouped.setdefault(response.id, {})
        if response.label in by_label:
            raise DuplicateResponse(
                f"more than one response for label {response.label!r}", record_id=response.id
            )
        by_label[response.label] = response

    records = []
    for record_id, by_label in grouped.items():
        p1 = np.full(space.size, 0.5)
        confidence: Dict[str, int] = {}
        for i, name in enumerate(space.names):
            response = by_label.get(name)
            parsed = parse_response(response.text) if response is not None else None
            if parsed is None or not parsed.ok:
                reason = "no response" if parsed is None else parsed.status.value
                if fill_policy == "error":
                    raise MissingResponse(
                        f"label {name!r} has no usable answer ({reason})", record_id=record_id
                    )
                logger.debug(f"[{record_id}] label {name!r} filled as neutral ({reason})")
                continue
            p1[i] = 1.0 - PROB_FLOOR if parsed.answer == "yes" else PROB_FLOOR
            if parsed.confidence is not None:
                confidence[name] = parsed.confidence
        records.append(
            LikelihoodRecord(record_id, space, p1, 1.0 - p1, True, confidence)
        )
    logger.info(f"Assembled {len(records)} likelihood records from {len(responses)} responses")
    return records


def record_from_mapping(
    record_id: str,
    space: LabelSpace,
    labels: Mapping[str, Mapping[str, float]],
    normalize: bool = True,
    confidence: Optional[Dict[str, int]] = None,
) -> Tuple[str, LikelihoodRecord]:
    """Decode one prediction line's ``labels`` object.

    Returns the encoding name (``logits``, ``pair`` or ``p1``) with the record.
    Every label of the space must be present.
    """
    for name in labels:
        try:
            space.index(name)
        except UnknownLabel as e:
            raise e.with_record(record_id)
    encodings = set()
    yes_logits, no_logits, p1, p0 = [], [], [], []
    for name in space.names:
        if name not in labels:
            raise MissingResponse(f"label {name!r} missing from prediction", record_id=record_id)
        entry = labels[name]
        if not isinstance(entry, Mapping):
            raise ValidationError(f"label {name!r} must map to an object", record_id=record_id)
        if "yes_logit" in entry or "no_logit" in entry:
            encodings.add("logits")
            yes_logits.append(float(entry["yes_logit"]))
            no_logits.append(float(entry["no_logit"]))
        elif "p1" in entry:
            encodings.add("pair" if "p0" in entry else "p1")
            p1.append(float(entry["p1"]))
            p0.append(float(entry["p0"]) if "p0" in entry else None)
        else:
            raise ValidationError(
                f"label {name!r} needs yes_logit/no_logit or p1", record_id=record_id
            )
    if len(encodings) > 1:
        raise MixedEncoding(f"mixed encodings {sorted(encodings)}", record_id=record_id)
    encoding = encodings.pop()
    if encoding == "logits":
        return encoding, LikelihoodRecord.from_logits(
            record_id, space, yes_logits, no_logits, confidence
        )
    return encoding, LikelihoodRecord.from_probabilities(
        record_id, space, p1, p0 if encoding == "pair" else None, normalize, confidence
    )
