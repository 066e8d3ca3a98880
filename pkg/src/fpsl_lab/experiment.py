"""Experiment orchestration: multi-seed training, teacher evaluation, sweeps and reports.

Every number written to a CSV is a seed mean; per-seed values go to a sidecar
file next to it, and a JSON manifest records the config, seeds and the
content hashes of the dataset files used.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import metrics
from .core import ClipRecord, ExperimentConfig, InvalidInput, load_dataset
from .decode import decode_batch
from .nnet import predict, train
from .nnet.model import Params

log = logging.getLogger(__name__)

METRIC_COLUMNS = ("PSDS1", "PSDS2", "E-F1_mac", "E-F1_mic", "IB-F1")
CONFIG_COLUMNS = ("use_fpsl", "thresh", "win_size", "alpha", "pooling", "median_size",
                  "binarize_thresh", "epochs", "seeds")
SWEEP_GRIDS = {
    "win_size": (1, 2, 4, 8, 16),
    "thresh": (0.3, 0.4, 0.5, 0.6, 0.7),
    "alpha": (0.1, 0.3, 0.5, 0.7, 0.9),
}
DEFAULT_SEEDS = (1, 2, 3)


@dataclass(frozen=True)
class DatasetPaths:
    train: Path
    eval: Path

    @classmethod
    def in_dir(cls, root: str | Path) -> "DatasetPaths":
        root = Path(root)
        return cls(root / "train.jsonl", root / "eval.jsonl")

    def check(self) -> None:
        for p in (self.train, self.eval):
            if not Path(p).is_file():
                raise InvalidInput(f"dataset file {p} does not exist")

    def sha256(self) -> dict[str, str]:
        return {name: hashlib.sha256(Path(p).read_bytes()).hexdigest()
                for name, p in (("train", self.train), ("eval", self.eval))}


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    fixed: ExperimentConfig = ExperimentConfig()

    def __post_init__(self):
        if self.parameter not in SWEEP_GRIDS:
            raise InvalidInput(f"cannot sweep {self.parameter!r}; choose from {sorted(SWEEP_GRIDS)}")
        if not self.values:
            raise InvalidInput("sweep needs at least one value")
        for v in self.values:
            self.fixed.with_(**{self.parameter: v})  # raises on illegal values

    def configs(self) -> list[ExperimentConfig]:
        return [self.fixed.with_(**{self.parameter: v}) for v in self.values]


@dataclass(frozen=True)
class SeedResult:
    seed: int
    scores: dict[str, float]
    class_f1: tuple[float, ...]


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    per_seed: tuple[SeedResult, ...]

    @property
    def seeds(self) -> tuple[int, ...]:
        return tuple(r.seed for r in self.per_seed)

    @property
    def scores(self) -> dict[str, float]:
        return {m: float(np.mean([r.scores[m] for r in self.per_seed])) for m in METRIC_COLUMNS}

    @property
    def class_f1(self) -> np.ndarray:
        return np.mean([r.class_f1 for r in self.per_seed], axis=0)

    def row(self) -> dict[str, str]:
        out = {m: _fmt(v) for m, v in self.scores.items()}
        out.update(_config_columns(self.config, self.seeds))
        return out


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _config_columns(config: ExperimentConfig, seeds: Sequence[int]) -> dict[str, str]:
    return {
        "use_fpsl": str(int(config.use_fpsl)),
        "thresh": repr(config.thresh),
        "win_size": str(config.win_size),
        "alpha": repr(config.alpha),
        "pooling": config.pooling,
        "median_size": str(config.median_size),
        "binarize_thresh": repr(config.binarize_thresh),
        "epochs": str(config.epochs),
        "seeds": " ".join(str(s) for s in seeds),
    }


def evaluate(params: Params, clips: Sequence[ClipRecord], config: ExperimentConfig,
             num_classes: int) -> tuple[dict[str, float], tuple[float, ...]]:
    """Score a model on clips: the five table metrics plus per-class event-based F1."""
    grids = predict(params, np.stack([c.features for c in clips]))
    ops = metrics.operating_points(config.num_operating_points)
    thresholds = [config.binarize_thresh, *ops]
    decoded = decode_batch(grids, thresholds, config.median_size, config.frame_rate_hz)

    def pairs_for(hyps):
        return [metrics.EvalPair(c.clip_id, c.events, h, c.duration_s) for c, h in zip(clips, hyps)]

    main = pairs_for(decoded[0])
    ef = metrics.event_f1(main, config.onset_collar_s, config.offset_collar_s, config.offset_collar_frac)
    ib = metrics.intersection_f1(main, config.ib_dtc, config.ib_gtc)
    per_op = {float(th): pairs_for(h) for th, h in zip(ops, decoded[1:])}
    total = float(sum(c.duration_s for c in clips))
    scores = {
        "PSDS1": metrics.psds(per_op, replace(metrics.PSDS1, e_max=config.e_max), total, num_classes),
        "PSDS2": metrics.psds(per_op, replace(metrics.PSDS2, e_max=config.e_max), total, num_classes),
        "E-F1_mac": ef.macro_f1,
        "E-F1_mic": ef.micro_f1,
        "IB-F1": ib.macro_f1,
    }
    return scores, tuple(ef.f1(c) for c in range(num_classes))


def _num_classes(clips: Sequence[ClipRecord]) -> int:
    counts = {c.num_classes for c in clips}
    if len(counts) != 1:
        raise InvalidInput(f"clips disagree on the number of classes: {sorted(counts)}")
    return counts.pop()


def run_seeds(config: ExperimentConfig, train_clips: Sequence[ClipRecord],
              eval_clips: Sequence[ClipRecord], seeds: Sequence[int] = DEFAULT_SEEDS) -> ExperimentResult:
    """Train one arm per seed and evaluate its EMA teacher on the eval clips."""
    if not seeds:
        raise InvalidInput("need at least one seed")
    num_classes = _num_classes(train_clips)
    results = []
    for seed in seeds:
        cfg = config.with_(seed=seed)
        trained = train(train_clips, cfg)
        scores, class_f1 = evaluate(trained.teacher.params, eval_clips, cfg, num_classes)
        log.info("seed %d use_fpsl=%s %s", seed, cfg.use_fpsl,
                 {k: round(v, 4) for k, v in scores.items()})
        results.append(SeedResult(seed, scores, class_f1))
    return ExperimentResult(config.with_(seed=seeds[0]), tuple(results))


def _csv_text(rows: Sequence[dict[str, str]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _write_reports(out: Path, stem: str, results: Sequence[ExperimentResult],
                   paths: DatasetPaths | None, extra: dict | None = None) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    columns = METRIC_COLUMNS + CONFIG_COLUMNS
    table = out / f"{stem}.csv"
    table.write_text(_csv_text([r.row() for r in results], columns))
    seed_rows = []
    for r in results:
        for s in r.per_seed:
            row = {m: _fmt(s.scores[m]) for m in METRIC_COLUMNS}
            row.update(_config_columns(r.config, [s.seed]))
            seed_rows.append(row)
    (out / f"{stem}.per_seed.csv").write_text(_csv_text(seed_rows, columns))
    manifest = {
        "configs": [r.config.to_dict() for r in results],
        "seeds": list(results[0].seeds) if results else [],
        "dataset_sha256": paths.sha256() if paths else None,
        **(extra or {}),
    }
    (out / f"{stem}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return table


def _load(paths: DatasetPaths) -> tuple[list[ClipRecord], list[ClipRecord]]:
    paths.check()
    return load_dataset(paths.train), load_dataset(paths.eval)


def run_experiment(config: ExperimentConfig, paths: DatasetPaths, out: str | Path,
                   seeds: Sequence[int] = DEFAULT_SEEDS) -> ExperimentResult:
    """One CSV row of seed-mean metrics for ``config``, written to ``out/experiment.csv``."""
    train_clips, eval_clips = _load(paths)
    result = run_seeds(config, train_clips, eval_clips, seeds)
    _write_reports(Path(out), "experiment", [result], paths)
    return result


def run_sweep(spec: SweepSpec, paths: DatasetPaths, out: str | Path,
              seeds: Sequence[int] = DEFAULT_SEEDS) -> list[ExperimentResult]:
    """Baseline row first, then one row per swept value with everything else fixed."""
    train_clips, eval_clips = _load(paths)
    baseline = run_seeds(spec.fixed.with_(use_fpsl=False), train_clips, eval_clips, seeds)
    results = [baseline] + [run_seeds(cfg, train_clips, eval_clips, seeds) for cfg in spec.configs()]
    _write_reports(Path(out), f"sweep_{spec.parameter}", results, paths,
                   {"parameter": spec.parameter, "values": list(spec.values)})
    return results


CLASSWISE_COLUMNS = ("class_id", "name", "profile", "baseline_f1", "fpsl_f1", "delta")


def classwise_rows(baseline: ExperimentResult, fpsl: ExperimentResult,
                   class_names: Sequence[str], profiles: Sequence[str]) -> list[dict[str, str]]:
    """Per-class event-based F1 of both arms (seed means) and their difference."""
    b, f = baseline.class_f1, fpsl.class_f1
    if not (len(b) == len(f) == len(class_names) == len(profiles)):
        raise InvalidInput("class count mismatch between arms and scene")
    return [{"class_id": str(c), "name": class_names[c], "profile": profiles[c],
             "baseline_f1": _fmt(b[c]), "fpsl_f1": _fmt(f[c]), "delta": _fmt(f[c] - b[c])}
            for c in range(len(b))]


def profile_deltas(rows: Sequence[dict[str, str]]) -> dict[str, float]:
    """Mean F1 delta per duration profile."""
    groups: dict[str, list[float]] = {}
    for r in rows:
        groups.setdefault(r["profile"], []).append(float(r["delta"]))
    return {k: float(np.mean(v)) for k, v in sorted(groups.items())}


def classwise_report(config: ExperimentConfig, paths: DatasetPaths, out: str | Path,
                     class_names: Sequence[str], profiles: Sequence[str],
                     seeds: Sequence[int] = DEFAULT_SEEDS) -> list[dict[str, str]]:
    train_clips, eval_clips = _load(paths)
    baseline = run_seeds(config.with_(use_fpsl=False), train_clips, eval_clips, seeds)
    fpsl = run_seeds(config.with_(use_fpsl=True), train_clips, eval_clips, seeds)
    rows = classwise_rows(baseline, fpsl, class_names, profiles)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "classwise.csv").write_text(_csv_text(rows, CLASSWISE_COLUMNS))
    _write_reports(out, "classwise_arms", [baseline, fpsl], paths)
    return rows


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
