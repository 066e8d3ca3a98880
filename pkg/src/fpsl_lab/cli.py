"""Command line entry point: gen, train, score, sweep, classwise, selftest.

Typical flow::

    fpsl-lab gen --out data/
    fpsl-lab train --data data/ --out runs/fpsl
    fpsl-lab score --data data/ --checkpoint runs/fpsl/teacher_seed*.json --out runs/fpsl
    fpsl-lab sweep --data data/ --param win_size --out runs/win
    fpsl-lab classwise --data data/ --out runs/classwise
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import experiment as ex
from . import selftest as st
from .core import POOLING_CHOICES, ExperimentConfig, InvalidInput, load_dataset, save_dataset, write_jsonl
from .nnet import TrainingAborted, train
from .nnet.checkpoint import load_checkpoint, save_checkpoint
from .synthgen import SceneConfig, desk_dcase, generate

log = logging.getLogger("fpsl_lab")


def _seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def _config_flags() -> argparse.ArgumentParser:
    d = ExperimentConfig()
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("experiment configuration")
    g.add_argument("--thresh", type=float, default=d.thresh, help="pseudo-label confidence threshold")
    g.add_argument("--win-size", type=int, default=d.win_size, help="frames added on each side of the peak")
    g.add_argument("--alpha", type=float, default=d.alpha, help="weight of the pseudo-label loss")
    g.add_argument("--no-fpsl", action="store_true", help="train on weak labels only")
    g.add_argument("--pooling", choices=POOLING_CHOICES, default=d.pooling)
    g.add_argument("--median-size", type=int, default=d.median_size)
    g.add_argument("--binarize-thresh", type=float, default=d.binarize_thresh)
    g.add_argument("--epochs", type=int, default=d.epochs)
    g.add_argument("--seeds", type=_seeds, default=ex.DEFAULT_SEEDS, help="comma separated, e.g. 1,2,3")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(thresh=args.thresh, win_size=args.win_size, alpha=args.alpha,
                            use_fpsl=not args.no_fpsl, pooling=args.pooling,
                            median_size=args.median_size, binarize_thresh=args.binarize_thresh,
                            epochs=args.epochs, seed=args.seeds[0])


def _scene(path: str | None) -> SceneConfig:
    return SceneConfig.load(path) if path else desk_dcase()


def cmd_gen(args) -> int:
    scene = _scene(args.scene)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(out / "train.jsonl", generate(scene, "train"))
    save_dataset(out / "eval.jsonl", generate(scene, "eval"))
    scene.save(out / "scene.json")
    print(f"wrote {scene.num_clips} train and {scene.num_eval_clips} eval clips to {out}")
    return 0


def cmd_train(args) -> int:
    config = config_from_args(args)
    paths = ex.DatasetPaths.in_dir(args.data)
    paths.check()
    clips = load_dataset(paths.train)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for seed in args.seeds:
        cfg = config.with_(seed=seed)
        result = train(clips, cfg)
        save_checkpoint(out / f"teacher_seed{seed}.json", result.teacher.params, cfg, cfg.epochs)
        write_jsonl(out / f"log_seed{seed}.jsonl", result.log)
        print(f"seed {seed}: final total loss {result.log[-1]['total_loss']:.6f}")
    return 0


def cmd_score(args) -> int:
    paths = ex.DatasetPaths.in_dir(args.data)
    paths.check()
    eval_clips = load_dataset(paths.eval)
    num_classes = eval_clips[0].num_classes
    per_seed, config = [], None
    for ck in args.checkpoint:
        params, cfg, _ = load_checkpoint(ck)
        cfg = cfg.with_(median_size=args.median_size or cfg.median_size,
                        binarize_thresh=args.binarize_thresh or cfg.binarize_thresh)
        if config is not None and cfg.with_(seed=config.seed) != config:
            raise InvalidInput(f"{ck}: checkpoints come from different configurations")
        config = config or cfg
        scores, class_f1 = ex.evaluate(params, eval_clips, cfg, num_classes)
        per_seed.append(ex.SeedResult(cfg.seed, scores, class_f1))
    result = ex.ExperimentResult(config, tuple(per_seed))
    table = ex._write_reports(Path(args.out), "experiment", [result], paths)
    print(table.read_text(), end="")
    return 0


def cmd_sweep(args) -> int:
    values = tuple(args.values) if args.values else ex.SWEEP_GRIDS[args.param]
    spec = ex.SweepSpec(args.param, values, config_from_args(args))
    ex.run_sweep(spec, ex.DatasetPaths.in_dir(args.data), args.out, args.seeds)
    print((Path(args.out) / f"sweep_{args.param}.csv").read_text(), end="")
    return 0


def cmd_classwise(args) -> int:
    scene_path = args.scene or Path(args.data) / "scene.json"
    scene = SceneConfig.load(scene_path)
    rows = ex.classwise_report(config_from_args(args).with_(use_fpsl=True), ex.DatasetPaths.in_dir(args.data),
                               args.out, scene.class_names, [p.stationarity for p in scene.profiles],
                               args.seeds)
    for r in rows:
        print(f"{r['class_id']:>2} {r['name']:<16} {r['profile']:<10} {r['baseline_f1']} -> {r['fpsl_f1']} "
              f"({r['delta']})")
    return 0


def cmd_selftest(args) -> int:
    ok = True
    for res in st.run_all():
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.detail}")
        ok &= res.passed
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpsl-lab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    flags = _config_flags()

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--scene", help="scene config JSON (default: desk_dcase)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", parents=[flags], help="train one model per seed, save teacher checkpoints")
    p.add_argument("--data", required=True, help="directory holding train.jsonl and eval.jsonl")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="evaluate teacher checkpoints on the eval split")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", nargs="+", required=True)
    p.add_argument("--median-size", type=int, default=None, help="override the checkpoint's value")
    p.add_argument("--binarize-thresh", type=float, default=None, help="override the checkpoint's value")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sweep", parents=[flags], help="baseline plus one row per value of a parameter")
    p.add_argument("--data", required=True)
    p.add_argument("--param", choices=sorted(ex.SWEEP_GRIDS), required=True)
    p.add_argument("--values", type=float, nargs="+", help="default: the standard grid for --param")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("classwise", parents=[flags], help="per-class F1 of baseline and FPSL arms")
    p.add_argument("--data", required=True)
    p.add_argument("--scene", help="scene config JSON (default: <data>/scene.json)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classwise)

    p = sub.add_parser("selftest", help="oracle, gradient and metric self checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "param", None) == "win_size" and args.values:
        args.values = [int(v) for v in args.values]
    try:
        return args.func(args)
    except TrainingAborted as exc:
        print(f"training aborted: {exc}", file=sys.stderr)
        return 3
    except (InvalidInput, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
