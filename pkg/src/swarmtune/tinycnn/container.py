"""Flat binary container for datasets and trained models.

Layout (all integers little-endian)::

    b"TCNN"  u32 version  u32 n_arrays
    n_arrays x { u32 name_len, name (utf-8), u32 ndim, ndim x u64 dim, f64 data... }

Arrays are stored row-major as float64. Class names have no numeric form, so
a dataset stores each one as a scalar array named ``class_name:<name>``
whose value is the class index.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..exceptions import SwarmtuneError
from .data import Dataset
from .nn import PARAM_NAMES, CnnModel

MAGIC = b"TCNN"
VERSION = 1
_CLASS_PREFIX = "class_name:"


class ContainerError(SwarmtuneError, ValueError):
    pass


def dumps_arrays(arrays: dict) -> bytes:
    parts = [MAGIC, struct.pack("<II", VERSION, len(arrays))]
    for name, arr in arrays.items():
        a = np.asarray(arr, dtype="<f8")  # tobytes() below is row-major for any layout
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<I", a.ndim))
        parts.append(struct.pack(f"<{a.ndim}Q", *a.shape))
        parts.append(a.tobytes())
    return b"".join(parts)


def loads_arrays(data: bytes, source: str = "<bytes>") -> dict:
    def take(n):
        nonlocal pos
        if pos + n > len(data):
            raise ContainerError(f"{source}: truncated container")
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    pos = 0
    if take(4) != MAGIC:
        raise ContainerError(f"{source}: not a TCNN container")
    version, count = struct.unpack("<II", take(8))
    if version != VERSION:
        raise ContainerError(f"{source}: unsupported container version {version}")
    arrays = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<I", take(4))
        name = take(name_len).decode("utf-8")
        (ndim,) = struct.unpack("<I", take(4))
        shape = struct.unpack(f"<{ndim}Q", take(8 * ndim))
        size = int(np.prod(shape, dtype=np.int64))
        arrays[name] = np.frombuffer(take(8 * size), dtype="<f8").reshape(shape).astype(np.float64)
    if pos != len(data):
        raise ContainerError(f"{source}: {len(data) - pos} trailing bytes")
    return arrays


def save_arrays(path, arrays: dict) -> None:
    Path(path).write_bytes(dumps_arrays(arrays))


def load_arrays(path) -> dict:
    path = Path(path)
    return loads_arrays(path.read_bytes(), str(path))


def save_model(path, model: CnnModel) -> None:
    arrays = dict(model.params())
    arrays["dropout_rate"] = np.array([model.dropout_rate])
    save_arrays(path, arrays)


def load_model(path) -> CnnModel:
    arrays = load_arrays(path)
    missing = [n for n in (*PARAM_NAMES, "dropout_rate") if n not in arrays]
    if missing:
        raise ContainerError(f"{path}: missing arrays {missing}")
    return CnnModel(**{n: arrays[n] for n in PARAM_NAMES},
                    dropout_rate=float(arrays["dropout_rate"][0]))


def save_dataset(path, dataset: Dataset) -> None:
    arrays = {
        "images": dataset.images,
        "labels": dataset.labels,
        "train_idx": dataset.train_idx,
        "test_idx": dataset.test_idx,
    }
    for k, name in enumerate(dataset.class_names):
        arrays[_CLASS_PREFIX + name] = np.array(float(k))
    save_arrays(path, arrays)


def load_dataset_container(path) -> Dataset:
    arrays = load_arrays(path)
    names = sorted(
        ((int(v), k[len(_CLASS_PREFIX):]) for k, v in arrays.items() if k.startswith(_CLASS_PREFIX))
    )
    try:
        return Dataset(
            arrays["images"],
            arrays["labels"].astype(np.int64),
            [n for _, n in names],
            arrays["train_idx"].astype(np.int64),
            arrays["test_idx"].astype(np.int64),
        )
    except KeyError as exc:
        raise ContainerError(f"{path}: missing array {exc.args[0]!r}") from None

