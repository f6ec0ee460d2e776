"""Minimal numpy CNN: layers, backprop, Adam, training, datasets and I/O."""

from .container import (
    ContainerError,
    load_arrays,
    load_dataset_container,
    load_model,
    save_arrays,
    save_dataset,
    save_model,
)
from .data import (
    SOIL_CLASSES,
    Dataset,
    decode_ppm,
    encode_ppm,
    generate_synthetic_dataset,
    load_dataset,
    read_ppm,
    resize_nearest,
    save_dataset_images,
    stratified_split,
    write_ppm,
)
from .estimator import TinyCNNClassifier
from .nn import AdamState, CnnModel, adam_step, conv2d, forward, loss_and_grads, softmax
from .training import EpochStats, evaluate_model, fit_arrays, predict_proba, train

__all__ = [
    "AdamState", "CnnModel", "ContainerError", "Dataset", "EpochStats", "SOIL_CLASSES",
    "TinyCNNClassifier", "adam_step", "conv2d", "decode_ppm", "encode_ppm", "evaluate_model",
    "fit_arrays", "forward", "generate_synthetic_dataset", "load_arrays",
    "load_dataset", "load_dataset_container", "load_model", "loss_and_grads", "predict_proba",
    "read_ppm", "resize_nearest", "save_arrays", "save_dataset", "save_dataset_images",
    "save_model", "softmax", "stratified_split", "train", "write_ppm",
]
