"""Shared builders for tests."""

import json
from pathlib import Path

import numpy as np

from entangle.likelihood import LikelihoodRecord
from entangle.prior import IsingPrior


def random_record(rng, space, record_id="r"):
    p1 = rng.uniform(0.01, 0.99, size=space.size)
    return LikelihoodRecord.from_probabilities(record_id, space, p1)


def random_prior(rng, space, scale=1.5):
    size = space.size
    theta_ij = np.triu(rng.normal(0.0, scale, size=(size, size)), k=1)
    return IsingPrior(space, rng.normal(0.0, scale, size=size), theta_ij, 0.0)


def write_jsonl(path, rows):
    path = Path(path)
    path.write_text("".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8")
    return path


def read_jsonl(path):
    return [json.loads(line) for line in Path(path).read_text(encoding="utf-8").splitlines() if line]
