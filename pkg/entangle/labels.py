"""Label spaces, binary label vectors and labeled corpora."""

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple, Union

import numpy as np

from entangle.errors import (
    DimensionMismatch,
    EmptyDataset,
    EnumerationTooLarge,
    MalformedRecord,
    UnknownLabel,
    ValidationError,
)

logger = logging.getLogger(__name__)

# Plutchik's basic emotions, in canonical order.
DEFAULT_LABELS = (
    "joy",
    "trust",
    "fear",
    "surprise",
    "sadness",
    "disgust",
    "anger",
    "anticipation",
)

MAX_ENUMERABLE_LABELS = 20


@dataclass(frozen=True)
class LabelSpace:
    """Ordered set of binary label names.

    Bit ``i`` of every vector aligned to this space refers to ``names[i]``.
    """

    names: Tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValidationError("label space must contain at least one label")
        if len(names) > MAX_ENUMERABLE_LABELS:
            raise EnumerationTooLarge(
                f"label space has {len(names)} labels; at most {MAX_ENUMERABLE_LABELS} "
                f"can be enumerated exactly"
            )
        for name in names:
            if not isinstance(name, str) or not name.strip():
                raise ValidationError(f"label names must be non-empty strings, got {name!r}")
        if len(set(names)) != len(names):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            raise ValidationError(f"duplicate label names: {', '.join(duplicates)}")

    @classmethod
    def default(cls) -> "LabelSpace":
        return cls(DEFAULT_LABELS)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "LabelSpace":
        """Read a newline-separated label list. Blank lines and ``#`` comments are ignored."""
        names = []
        for line_number, raw in enumerate(Path(path).read_bytes().splitlines(), start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise MalformedRecord(str(path), line_number, f"invalid UTF-8 ({e.reason})")
            line = line.split("#", 1)[0].strip()
            if line:
                names.append(line)
        return cls(tuple(names))

    @property
    def size(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.names)

    @cached_property
    def _positions(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def index(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise UnknownLabel(f"unknown label {name!r}; expected one of {list(self.names)}")

    def vector(self, bits: Sequence[int]) -> "LabelVector":
        return LabelVector(self, tuple(int(b) for b in bits))

    def zeros(self) -> "LabelVector":
        return LabelVector(self, (0,) * self.size)

    def vector_from_mapping(self, mapping: Mapping[str, int]) -> "LabelVector":
        """Build a vector from ``{name: 0|1}``; names absent from the mapping are 0."""
        bits = [0] * self.size
        for name, value in mapping.items():
            if value not in (0, 1):
                raise ValidationError(f"label {name!r} must be 0 or 1, got {value!r}")
            bits[self.index(name)] = int(value)
        return LabelVector(self, tuple(bits))

    def to_mapping(self, vector: "LabelVector") -> Dict[str, int]:
        self.check(vector)
        return dict(zip(self.names, vector.bits))

    def check(self, vector: "LabelVector") -> None:
        if vector.space != self:
            raise DimensionMismatch(
                f"vector is aligned to {list(vector.space.names)}, expected {list(self.names)}"
            )


@dataclass(frozen=True)
class LabelVector:
    """Binary label vector aligned to a ``LabelSpace``."""

    space: LabelSpace
    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(self.bits)
        object.__setattr__(self, "bits", bits)
        if len(bits) != self.space.size:
            raise DimensionMismatch(
                f"vector has {len(bits)} bits but the label space has {self.space.size} labels"
            )
        for b in bits:
            if b not in (0, 1):
                raise ValidationError(f"label vector elements must be 0 or 1, got {b!r}")

    @property
    def cardinality(self) -> int:
        return sum(self.bits)

    @property
    def active_labels(self) -> List[str]:
        return [name for name, b in zip(self.space.names, self.bits) if b]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.bits, dtype=np.uint8)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Corpus of ``(id, LabelVector)`` items, stored as an N×L read-only matrix."""

    space: LabelSpace
    ids: Tuple[str, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        ids = tuple(self.ids)
        raw = np.asarray(self.matrix)
        if raw.size == 0:
            raw = raw.reshape(0, self.space.size)
        if raw.shape != (len(ids), self.space.size):
            raise DimensionMismatch(
                f"label matrix has shape {raw.shape}, expected ({len(ids)}, {self.space.size})"
            )
        if raw.size and not np.isin(raw, (0, 1)).all():
            raise ValidationError("label matrix must contain only 0 and 1")
        duplicates = [item_id for item_id, n in Counter(ids).items() if n > 1]
        if duplicates:
            raise ValidationError(f"duplicate item id {duplicates[0]!r}")
        matrix = raw.astype(np.uint8)
        matrix.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_items(
        cls, space: LabelSpace, items: Sequence[Tuple[str, LabelVector]]
    ) -> "LabeledDataset":
        for item_id, vector in items:
            try:
                space.check(vector)
            except DimensionMismatch as e:
                raise e.with_record(item_id)
        matrix = np.array([v.bits for _, v in items], dtype=np.uint8).reshape(len(items), space.size)
        return cls(space, tuple(i for i, _ in items), matrix)

    @classmethod
    def from_matrix(cls, space: LabelSpace, ids: Sequence[str], matrix) -> "LabeledDataset":
        return cls(space, tuple(ids), np.asarray(matrix))

    @property
    def size(self) -> int:
        return len(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def items(self) -> List[Tuple[str, LabelVector]]:
        return [
            (item_id, LabelVector(self.space, tuple(int(b) for b in row)))
            for item_id, row in zip(self.ids, self.matrix)
        ]

    @property
    def vectors(self) -> List[LabelVector]:
        return [vector for _, vector in self.items]

    @cached_property
    def _row_of(self) -> Dict[str, int]:
        return {item_id: row for row, item_id in enumerate(self.ids)}

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._row_of

    def get(self, item_id: str) -> LabelVector:
        row = self.matrix[self._row_of[item_id]]
        return LabelVector(self.space, tuple(int(b) for b in row))

    def require_nonempty(self) -> None:
        if self.size == 0:
            raise EmptyDataset("dataset is empty; estimation needs at least one item")


@dataclass(frozen=True)
class StatsReport:
    n: int
    label_counts: Dict[str, int]
    single_label_count: int
    multi_label_count: int
    empty_count: int
    multi_label_fraction: float
    mean_cardinality: float
    cardinality_histogram: Dict[int, int]

    def as_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "label_counts": dict(self.label_counts),
            "single_label_count": self.single_label_count,
            "multi_label_count": self.multi_label_count,
            "empty_count": self.empty_count,
            "multi_label_fraction": self.multi_label_fraction,
            "mean_cardinality": self.mean_cardinality,
            "cardinality_histogram": {str(k): v for k, v in self.cardinality_histogram.items()},
        }


@lru_cache(maxsize=None)
def configuration_matrix(size: int) -> np.ndarray:
    """All ``2**size`` configurations as a read-only uint8 matrix.

    Row ``k`` is the binary expansion of ``k`` with bit 0 in column 0.
    """
    if size > MAX_ENUMERABLE_LABELS:
        raise EnumerationTooLarge(
            f"cannot enumerate 2^{size} configurations (limit is 2^{MAX_ENUMERABLE_LABELS})"
        )
    codes = np.arange(1 << size, dtype=np.int64)
    matrix = ((codes[:, None] >> np.arange(size, dtype=np.int64)) & 1).astype(np.uint8)
    matrix.setflags(write=False)
    return matrix


def enumerate_configurations(space: LabelSpace) -> Iterator[LabelVector]:
    """Yield all ``2**L`` vectors in ascending binary order, bit 0 = first label."""
    if space.size > MAX_ENUMERABLE_LABELS:
        raise EnumerationTooLarge(
            f"cannot enumerate 2^{space.size} configurations (limit is 2^{MAX_ENUMERABLE_LABELS})"
        )
    for code in range(1 << space.size):
        yield LabelVector(space, tuple((code >> i) & 1 for i in range(space.size)))


def cooccurrence_counts(data: LabeledDataset) -> Tuple[np.ndarray, np.ndarray]:
    """Pairwise co-occurrence matrix ``C`` and marginal counts ``c``.

    ``C[i][j]`` counts items with both labels active; the diagonal equals ``c``.
    """
    data.require_nonempty()
    m = data.matrix.astype(np.int64)
    joint = m.T @ m
    return joint, np.diag(joint).copy()


def dataset_statistics(data: LabeledDataset) -> StatsReport:
    data.require_nonempty()
    m = data.matrix.astype(np.int64)
    cardinality = m.sum(axis=1)
    counts = m.sum(axis=0)
    n = data.size
    multi = int((cardinality >= 2).sum())
    histogram = {int(k): int(v) for k, v in zip(*np.unique(cardinality, return_counts=True))}
    report = StatsReport(
        n=n,
        label_counts={name: int(c) for name, c in zip(data.space.names, counts)},
        single_label_count=int((cardinality == 1).sum()),
        multi_label_count=multi,
        empty_count=int((cardinality == 0).sum()),
        multi_label_fraction=multi / n,
        mean_cardinality=int(counts.sum()) / n,
        cardinality_histogram=histogram,
    )
    logger.debug(f"Statistics over {n} items: mean cardinality {report.mean_cardinality:.4f}")
    return report
