"""Image datasets: container type, synthetic soil-like textures, PPM directories."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..exceptions import ConfigError, DimensionError, PpmParseError

SOIL_CLASSES = ("alluvial", "black", "clay", "red")

# base RGB colour and stripe frequency (cycles per image) per synthetic class
_PALETTE = {
    "alluvial": ((0.76, 0.65, 0.48), 1.0),
    "black": ((0.20, 0.18, 0.16), 2.0),
    "clay": ((0.55, 0.47, 0.42), 3.0),
    "red": ((0.66, 0.27, 0.16), 4.0),
}


@dataclass
class Dataset:
    images: np.ndarray  # (N, H, W, C) in [0, 1]
    labels: np.ndarray  # (N,) ints in [0, K)
    class_names: tuple
    train_idx: np.ndarray
    test_idx: np.ndarray

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.class_names = tuple(self.class_names)
        self.train_idx = np.asarray(self.train_idx, dtype=np.int64)
        self.test_idx = np.asarray(self.test_idx, dtype=np.int64)
        n = self.images.shape[0]
        if self.images.ndim != 4:
            raise DimensionError(f"images must be (N, H, W, C), got {self.images.shape}")
        if self.labels.shape != (n,):
            raise DimensionError(f"labels shape {self.labels.shape} != ({n},)")
        if n and (self.images.min() < 0.0 or self.images.max() > 1.0):
            raise ConfigError("pixel values must lie in [0, 1]")
        k = len(self.class_names)
        if n and (self.labels.min() < 0 or self.labels.max() >= k):
            raise ConfigError(f"labels must lie in [0, {k})")
        both = np.concatenate([self.train_idx, self.test_idx])
        if len(both) != n or not np.array_equal(np.sort(both), np.arange(n)):
            raise ConfigError("train and test indices must partition the dataset")

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def image_shape(self) -> tuple:
        return self.images.shape[1:]

    @property
    def X_train(self):
        return self.images[self.train_idx]

    @property
    def y_train(self):
        return self.labels[self.train_idx]

    @property
    def X_test(self):
        return self.images[self.test_idx]

    @property
    def y_test(self):
        return self.labels[self.test_idx]


def stratified_split(labels, test_fraction: float = 0.2, seed: int = 0):
    """Per-class shuffle; each class contributes round(fraction*n) test items.

    Every class with at least two members keeps at least one item on each side.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for k in np.unique(labels):
        members = np.flatnonzero(labels == k)
        members = members[rng.permutation(len(members))]
        n_test = int(np.floor(test_fraction * len(members) + 0.5))
        if len(members) >= 2:
            n_test = min(max(n_test, 1), len(members) - 1)
        test.extend(members[:n_test])
        train.extend(members[n_test:])
    return np.sort(np.array(train, dtype=np.int64)), np.sort(np.array(test, dtype=np.int64))


def parse_size(size) -> tuple:
    if isinstance(size, str):
        try:
            h, w = (int(s) for s in size.lower().split("x"))
        except ValueError:
            raise ConfigError(f"size must look like HxW, got {size!r}") from None
    else:
        h, w = size
    if h < 2 or w < 2 or h % 2 or w % 2:
        raise ConfigError(f"image height and width must be even and >= 2, got {h}x{w}")
    return int(h), int(w)


def generate_synthetic_dataset(classes: int = 4, per_class: int = 50, size=(32, 32),
                               seed: int = 0, test_fraction: float = 0.2) -> Dataset:
    """Soil-like RGB textures: per-class base colour and stripe frequency, plus noise."""
    if not 2 <= classes <= len(SOIL_CLASSES):
        raise ConfigError(f"classes must be in [2, {len(SOIL_CLASSES)}], got {classes}")
    if per_class < 2:
        raise ConfigError(f"per_class must be >= 2, got {per_class}")
    h, w = parse_size(size)
    rng = np.random.default_rng(seed)
    names = SOIL_CLASSES[:classes]
    yy, xx = np.meshgrid(np.arange(h) / h, np.arange(w) / w, indexing="ij")
    images = np.empty((classes * per_class, h, w, 3))
    labels = np.repeat(np.arange(classes), per_class)
    for i, k in enumerate(labels):
        colour, freq = _PALETTE[names[k]]
        theta = rng.uniform(0.0, np.pi)
        phase = rng.uniform(0.0, 2 * np.pi)
        stripes = np.sin(2 * np.pi * freq * (xx * np.cos(theta) + yy * np.sin(theta)) + phase)
        brightness = rng.uniform(-0.05, 0.05)
        img = np.asarray(colour) + brightness + 0.08 * stripes[..., None]
        img = img + rng.normal(0.0, 0.04, size=(h, w, 3))
        images[i] = np.clip(img, 0.0, 1.0)
    train_idx, test_idx = stratified_split(labels, test_fraction, seed)
    return Dataset(images, labels, names, train_idx, test_idx)


# -- PPM (P6) -------------------------------------------------------------------

_WHITESPACE = b" \t\n\r\x0b\x0c"


def decode_ppm(data: bytes, name: str = "<bytes>") -> np.ndarray:
    """Decode binary P6 bytes to a (H, W, 3) array scaled to [0, 1]."""
    if data[:2] != b"P6":
        raise PpmParseError(f"{name}: bad magic {data[:2]!r}, expected b'P6'")
    if data[2:3] not in tuple(bytes([c]) for c in _WHITESPACE) + (b"#",):
        raise PpmParseError(f"{name}: bad magic {data[:3]!r}, expected b'P6'")
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise PpmParseError(f"{name}: truncated header")
        ch = data[pos:pos + 1]
        if ch == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        if ch in _WHITESPACE:
            pos += 1
            continue
        start = pos
        while pos < len(data) and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise PpmParseError(f"{name}: non-numeric header field {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise PpmParseError(f"{name}: invalid dimensions {width}x{height}")
    if maxval != 255:
        raise PpmParseError(f"{name}: unsupported maxval {maxval}, expected 255")
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise PpmParseError(f"{name}: truncated header")
    pos += 1
    n = width * height * 3
    pixels = data[pos:pos + n]
    if len(pixels) < n:
        raise PpmParseError(f"{name}: truncated pixel data ({len(pixels)} of {n} bytes)")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3) / 255.0


def read_ppm(path) -> np.ndarray:
    path = Path(path)
    return decode_ppm(path.read_bytes(), str(path))


def encode_ppm(image: np.ndarray) -> bytes:
    """(H, W, 3) array in [0, 1] to P6 bytes, rounding to the nearest level."""
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionError(f"PPM needs (H, W, 3) images, got {img.shape}")
    h, w, _ = img.shape
    raw = np.clip(np.floor(img * 255.0 + 0.5), 0, 255).astype(np.uint8)
    return b"P6\n%d %d\n255\n" % (w, h) + raw.tobytes()


def write_ppm(path, image: np.ndarray) -> None:
    Path(path).write_bytes(encode_ppm(image))


def resize_nearest(image: np.ndarray, size) -> np.ndarray:
    h, w = size
    src_h, src_w = image.shape[:2]
    rows = (np.arange(h) * src_h) // h
    cols = (np.arange(w) * src_w) // w
    return image[rows][:, cols]


def load_dataset(root, target_size=(32, 32), split_seed: int = 0,
                 test_fraction: float = 0.2) -> Dataset:
    """Read ``<root>/<class>/*.ppm``; classes are labelled in sorted name order."""
    root = Path(root)
    h, w = parse_size(target_size)
    if not root.is_dir():
        raise ConfigError(f"dataset directory {str(root)!r} does not exist")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise ConfigError(f"dataset directory {str(root)!r} has no class subdirectories")
    images, labels = [], []
    for k, cdir in enumerate(class_dirs):
        files = sorted(f for f in cdir.iterdir() if f.suffix.lower() == ".ppm" and f.is_file())
        if not files:
            raise ConfigError(f"class directory {str(cdir)!r} holds no .ppm files")
        for f in files:
            images.append(resize_nearest(read_ppm(f), (h, w)))
            labels.append(k)
    labels = np.array(labels)
    train_idx, test_idx = stratified_split(labels, test_fraction, split_seed)
    return Dataset(np.stack(images), labels, [d.name for d in class_dirs], train_idx, test_idx)


def save_dataset_images(dataset: Dataset, out_dir) -> list:
    """Write every image as ``<out_dir>/<class>/<index>.ppm``; returns the paths."""
    out_dir = Path(out_dir)
    if dataset.images.shape[-1] != 3:
        raise DimensionError("only RGB datasets can be written as PPM")
    paths = []
    for name in dataset.class_names:
        os.makedirs(out_dir / name, exist_ok=True)
    for i, (img, k) in enumerate(zip(dataset.images, dataset.labels)):
        p = out_dir / dataset.class_names[k] / f"{i:05d}.ppm"
        write_ppm(p, img)
        paths.append(p)
    return paths
