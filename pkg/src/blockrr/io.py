"""CSV datasets and JSON documents (configs, matrices, priors, reports)."""
from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path
from typing import Union

import numpy as np

from .core import MechanismMatrix, PartitionConfig, PriorDistribution
from .errors import DataError
from .partition import LabelDataset, RandomizedDataset

PathLike = Union[str, Path]


def _parse_id(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def read_dataset(path: PathLike) -> LabelDataset:
    """Read an ``id,label`` CSV; ids may be integers or strings."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"id", "label"} <= set(reader.fieldnames):
            raise DataError("MALFORMED_CSV", f"{path}: header must contain id,label")
        ids, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                labels.append(int(row["label"]))
            except (TypeError, ValueError):
                raise DataError("MALFORMED_CSV", f"{path}:{lineno}: label {row['label']!r} is not an integer") from None
            ids.append(_parse_id(row["id"]))
    if all(isinstance(i, int) for i in ids):
        id_arr = np.asarray(ids, dtype=np.int64)
    else:
        id_arr = np.asarray([str(i) for i in ids], dtype=object)
    return LabelDataset(id_arr, np.asarray(labels, dtype=np.int64))


def write_dataset(dataset: LabelDataset, path: PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"])
        for i, y in zip(dataset.ids.tolist(), dataset.labels.tolist()):
            w.writerow([i, y])


def randomized_to_csv(data: RandomizedDataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "label", "original_index"])
    for i, y, idx in zip(data.ids.tolist(), data.labels.tolist(), data.original_index.tolist()):
        w.writerow([i, y, idx])
    return buf.getvalue()


def read_randomized(path: PathLike) -> RandomizedDataset:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ids = [_parse_id(r["id"]) for r in rows]
    id_arr = np.asarray(ids, dtype=np.int64) if all(isinstance(i, int) for i in ids) else np.asarray(ids, dtype=object)
    return RandomizedDataset(
        id_arr,
        np.asarray([int(r["label"]) for r in rows], dtype=np.int64),
        np.asarray([int(r["original_index"]) for r in rows], dtype=np.int64),
    )


def dumps(doc) -> str:
    # float repr is the shortest string that round-trips exactly
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_text(text: str, path: PathLike) -> None:
    if str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def write_json(doc, path: PathLike) -> None:
    write_text(dumps(doc), path)


def read_json(path: PathLike):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError("MALFORMED_JSON", f"{path}: {exc}") from exc


def read_matrix(path: PathLike) -> MechanismMatrix:
    return MechanismMatrix.from_dict(read_json(path))


def read_config(path: PathLike) -> PartitionConfig:
    return PartitionConfig.from_dict(read_json(path))


def read_prior(path: PathLike) -> PriorDistribution:
    return PriorDistribution.from_dict(read_json(path))
