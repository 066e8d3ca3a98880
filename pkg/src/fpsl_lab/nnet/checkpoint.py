"""JSON checkpoints: config hash, seed, epoch and flat parameter arrays per layer."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..core import ExperimentConfig, InvalidInput


def config_hash(config: ExperimentConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def save_checkpoint(path: str | Path, params: dict, config: ExperimentConfig, epoch: int) -> None:
    doc = {
        "config_hash": config_hash(config),
        "config": config.to_dict(),
        "seed": config.seed,
        "epoch": epoch,
        "params": {name: {"shape": list(v.shape), "data": v.ravel().tolist()}
                   for name, v in sorted(params.items())},
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path: str | Path) -> tuple[dict, ExperimentConfig, int]:
    doc = json.loads(Path(path).read_text())
    config = ExperimentConfig.from_dict(doc["config"])
    if config_hash(config) != doc["config_hash"]:
        raise InvalidInput(f"{path}: config hash mismatch")
    params = {name: np.array(p["data"], dtype=np.float64).reshape(p["shape"])
              for name, p in doc["params"].items()}
    return params, config, int(doc["epoch"])
