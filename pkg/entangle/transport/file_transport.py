"""JSONL/JSON/CSV ingestion and emission.

Every reader reports malformed input with the file path and 1-based line
number. ``-`` as an output path writes to stdout.
"""

import csv
import io
import json
import logging
import sys
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from dateutil.parser import isoparse

from entangle.errors import EntangleError, MalformedRecord, MixedEncoding, ValidationError
from entangle.evaluation.agreement import AnnotationSet
from entangle.inference import MapResult
from entangle.labels import LabeledDataset, LabelSpace, LabelVector
from entangle.likelihood import LikelihoodRecord, record_from_mapping
from entangle.prior import IsingPrior
from entangle.utils.response_parser import RawResponse

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class FileTransport:
    """Reads and writes every file format the CLI consumes or produces."""

    def __init__(self, config=None):
        self.config = config

    # -- low level -------------------------------------------------------

    def iter_jsonl(self, path: PathLike) -> Iterator[Tuple[int, Dict[str, Any]]]:
        """Yield ``(line_number, object)`` for every non-blank line."""
        with open(path, "rb") as handle:
            for line_number, raw in enumerate(handle, start=1):
                if not raw.strip():
                    continue
                try:
                    obj = json.loads(raw.decode("utf-8"))
                except UnicodeDecodeError as e:
                    raise MalformedRecord(str(path), line_number, f"invalid UTF-8 ({e.reason})")
                except json.JSONDecodeError as e:
                    raise MalformedRecord(str(path), line_number, f"invalid JSON ({e.msg})")
                if not isinstance(obj, dict):
                    raise MalformedRecord(str(path), line_number, "expected a JSON object")
                yield line_number, obj

    @contextmanager
    def _open_output(self, path: PathLike):
        if str(path) == "-":
            yield sys.stdout
            sys.stdout.flush()
            return
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            yield handle

    def write_jsonl(self, path: PathLike, rows: Iterable[Mapping[str, Any]]) -> int:
        count = 0
        with self._open_output(path) as handle:
            for row in rows:
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")
                count += 1
        logger.debug(f"Wrote {count} lines to {path}")
        return count

    def write_json(self, path: PathLike, payload: Any) -> None:
        with self._open_output(path) as handle:
            json.dump(payload, handle, indent=2, ensure_ascii=False)
            handle.write("\n")

    def write_text(self, path: PathLike, text: str) -> None:
        with self._open_output(path) as handle:
            handle.write(text if text.endswith("\n") or not text else text + "\n")

    def read_json(self, path: PathLike) -> Any:
        data = Path(path).read_bytes()
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            line_number = data.count(b"\n", 0, e.start) + 1
            raise MalformedRecord(str(path), line_number, f"invalid UTF-8 ({e.reason})")
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise MalformedRecord(str(path), e.lineno, f"invalid JSON ({e.msg})")

    def write_matrix_csv(
        self, path: PathLike, names: Sequence[str], matrix: np.ndarray
    ) -> None:
        """Square matrix with label names as header row and first column."""
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow([""] + list(names))
        for name, row in zip(names, np.asarray(matrix)):
            writer.writerow([name] + [repr(float(v)) if isinstance(v, float) else v for v in row.tolist()])
        with self._open_output(path) as handle:
            handle.write(buffer.getvalue())

    # -- labeled data ----------------------------------------------------

    def _vector(
        self, path: PathLike, line_number: int, space: LabelSpace, mapping: Any
    ) -> LabelVector:
        if not isinstance(mapping, dict):
            raise MalformedRecord(str(path), line_number, "labels must be an object")
        try:
            return space.vector_from_mapping(mapping)
        except EntangleError as e:
            raise MalformedRecord(str(path), line_number, e.message)

    @staticmethod
    def _id(path: PathLike, line_number: int, obj: Dict[str, Any]) -> str:
        item_id = obj.get("id")
        if not isinstance(item_id, str) or not item_id:
            raise MalformedRecord(str(path), line_number, "missing or non-string 'id'")
        return item_id

    def read_gold(self, path: PathLike, space: LabelSpace) -> LabeledDataset:
        """``{"id": ..., "labels": {name: 0|1}}`` lines."""
        items = []
        seen = set()
        for line_number, obj in self.iter_jsonl(path):
            item_id = self._id(path, line_number, obj)
            if item_id in seen:
                raise MalformedRecord(str(path), line_number, f"duplicate id {item_id!r}")
            seen.add(item_id)
            items.append((item_id, self._vector(path, line_number, space, obj.get("labels"))))
        logger.info(f"Read {len(items)} labeled items from {path}")
        return LabeledDataset.from_items(space, items)

    def read_label_vectors(self, path: PathLike, space: LabelSpace, field_name: Optional[str] = None):
        """Vectors from either the gold schema (``labels``) or MAP output (``map``).

        Returns ``(ids, vectors)`` in file order.
        """
        ids, vectors = [], []
        for line_number, obj in self.iter_jsonl(path):
            item_id = self._id(path, line_number, obj)
            key = field_name or ("map" if "map" in obj else "labels")
            if key not in obj:
                raise MalformedRecord(str(path), line_number, f"missing {key!r}")
            ids.append(item_id)
            vectors.append(self._vector(path, line_number, space, obj[key]))
        if len(set(ids)) != len(ids):
            raise ValidationError(f"{path}: duplicate ids in prediction file")
        return ids, vectors

    def write_gold(self, path: PathLike, data: LabeledDataset) -> int:
        return self.write_jsonl(
            path,
            ({"id": item_id, "labels": data.space.to_mapping(vector)} for item_id, vector in data.items),
        )

    def read_annotations(self, path: PathLike, space: LabelSpace) -> AnnotationSet:
        """``{"id": ..., "annotations": [{name: 0|1}, ...]}`` lines, one object per annotator."""
        items = []
        for line_number, obj in self.iter_jsonl(path):
            item_id = self._id(path, line_number, obj)
            annotations = obj.get("annotations")
            if not isinstance(annotations, list):
                raise MalformedRecord(str(path), line_number, "'annotations' must be a list")
            vectors = [self._vector(path, line_number, space, a) for a in annotations]
            items.append((item_id, vectors))
        logger.info(f"Read annotations for {len(items)} items from {path}")
        return AnnotationSet.from_items(space, items)

    # -- predictions -----------------------------------------------------

    def read_predictions(
        self, path: PathLike, space: LabelSpace, normalize: bool = True
    ) -> List[LikelihoodRecord]:
        """Prediction lines in one of the three encodings; mixing encodings is an error."""
        records = []
        seen_encoding = None
        seen_ids = set()
        for line_number, obj in self.iter_jsonl(path):
            item_id = self._id(path, line_number, obj)
            if item_id in seen_ids:
                raise MalformedRecord(str(path), line_number, f"duplicate id {item_id!r}")
            seen_ids.add(item_id)
            labels = obj.get("labels")
            if not isinstance(labels, dict):
                raise MalformedRecord(str(path), line_number, "'labels' must be an object")
            confidence = obj.get("confidence") or {}
            try:
                encoding, record = record_from_mapping(
                    item_id, space, labels, normalize, confidence
                )
            except MixedEncoding as e:
                raise MixedEncoding(f"{path}:{line_number}: {e.message}", record_id=item_id)
            except (EntangleError, TypeError, KeyError) as e:
                reason = e.message if isinstance(e, EntangleError) else f"bad value ({e})"
                raise MalformedRecord(str(path), line_number, reason)
            if seen_encoding is not None and encoding != seen_encoding:
                raise MixedEncoding(
                    f"{path}:{line_number}: encoding {encoding!r} differs from {seen_encoding!r} "
                    f"used earlier in the file"
                )
            seen_encoding = encoding
            records.append(record)
        logger.info(f"Read {len(records)} prediction records from {path} ({seen_encoding})")
        return records

    def write_predictions(self, path: PathLike, records: Sequence[LikelihoodRecord]) -> int:
        def rows():
            for record in records:
                row: Dict[str, Any] = {"id": record.id, "labels": record.as_mapping()}
                if record.confidence:
                    row["confidence"] = dict(record.confidence)
                yield row

        return self.write_jsonl(path, rows())

    def read_responses(self, path: PathLike) -> List[RawResponse]:
        """``{"id": ..., "label": ..., "text": ...}`` lines."""
        responses = []
        for line_number, obj in self.iter_jsonl(path):
            item_id = self._id(path, line_number, obj)
            label = obj.get("label")
            text = obj.get("text")
            if not isinstance(label, str) or not isinstance(text, str):
                raise MalformedRecord(str(path), line_number, "'label' and 'text' must be strings")
            responses.append(RawResponse(item_id, label, text))
        logger.info(f"Read {len(responses)} raw responses from {path}")
        return responses

    def write_map_results(self, path: PathLike, results: Sequence[MapResult]) -> int:
        return self.write_jsonl(
            path,
            (
                {
                    "id": r.id,
                    "map": r.map_vector.space.to_mapping(r.map_vector),
                    "baseline": r.baseline_vector.space.to_mapping(r.baseline_vector),
                    "objective": r.objective,
                }
                for r in results
            ),
        )

    # -- prior -----------------------------------------------------------

    @staticmethod
    def prior_to_dict(prior: IsingPrior) -> Dict[str, Any]:
        names = prior.space.names
        provenance = dict(prior.provenance)
        estimated_at = provenance.get("estimated_at")
        if isinstance(estimated_at, datetime):
            provenance["estimated_at"] = estimated_at.isoformat()
        return {
            "labels": list(names),
            "epsilon": prior.epsilon,
            "theta_i": [float(v) for v in prior.theta_i],
            "theta_ij": [
                {"i": names[i], "j": names[j], "value": float(prior.theta_ij[i, j])}
                for i in range(len(names))
                for j in range(i + 1, len(names))
            ],
            "provenance": provenance,
        }

    @staticmethod
    def prior_from_dict(payload: Mapping[str, Any]) -> IsingPrior:
        try:
            space = LabelSpace(tuple(payload["labels"]))
            theta_ij = np.zeros((space.size, space.size))
            for entry in payload.get("theta_ij", []):
                i, j = sorted((space.index(entry["i"]), space.index(entry["j"])))
                theta_ij[i, j] = float(entry["value"])
            provenance = dict(payload.get("provenance") or {})
            if isinstance(provenance.get("estimated_at"), str):
                provenance["estimated_at"] = isoparse(provenance["estimated_at"])
            return IsingPrior(
                space,
                np.asarray(payload["theta_i"], dtype=np.float64),
                theta_ij,
                float(payload.get("epsilon", 0.0)),
                provenance,
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, EntangleError):
                raise
            raise ValidationError(f"invalid prior document: {e}")

    def write_prior(self, path: PathLike, prior: IsingPrior) -> None:
        self.write_json(path, self.prior_to_dict(prior))
        logger.info(f"Wrote prior over {prior.space.size} labels to {path}")

    def read_prior(self, path: PathLike) -> IsingPrior:
        return self.prior_from_dict(self.read_json(path))
