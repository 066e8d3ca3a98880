"""Quick built-in checks: FPSL against its brute-force oracle, gradients against
finite differences, and metric/decoding sanity fixtures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Event, ExperimentConfig
from .decode import median_filter
from .fpsl import FpslParams, build_fpsl, fpsl_oracle
from .metrics import PSDS1, EvalPair, event_f1, intersection_f1, operating_points, psds
from .nnet.gradcheck import check_gradients, random_problem


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_fpsl_instance(rng: np.random.Generator):
    c, t = int(rng.integers(1, 9)), int(rng.integers(1, 51))
    grid = rng.random((c, t))
    weak = rng.integers(0, 2, size=c)
    params = FpslParams(float(rng.choice([0.3, 0.4, 0.5, 0.6, 0.7])), int(rng.integers(0, 9)))
    return grid, weak, params


def check_fpsl_oracle(num_instances: int = 1000, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    for i in range(num_instances):
        grid, weak, params = random_fpsl_instance(rng)
        if build_fpsl(grid, weak, params) != fpsl_oracle(grid, weak, params):
            return CheckResult("fpsl-oracle", False, f"instance {i} disagrees")
    return CheckResult("fpsl-oracle", True, f"{num_instances} instances agree")


def check_gradients_suite(num_configs: int = 10, num_probes: int = 100, tol: float = 1e-4) -> CheckResult:
    poolings = ("attention", "linear_softmax", "mean", "max")
    worst = 0.0
    for i in range(num_configs):
        rng = np.random.default_rng(100 + i)
        params, x, weak = random_problem(rng)
        cfg = ExperimentConfig(pooling=poolings[i % len(poolings)], thresh=0.5,
                               win_size=i % 3, alpha=0.3 + 0.1 * (i % 5))
        worst = max(worst, max(p.rel_error for p in check_gradients(params, x, weak, cfg, num_probes, rng=rng)))
    return CheckResult("gradients", worst < tol, f"worst relative error {worst:.2e} over "
                                                 f"{num_configs}x{num_probes} probes")


def check_metrics() -> CheckResult:
    refs = (Event(0, 1.0, 3.0), Event(1, 4.0, 4.6), Event(0, 6.0, 9.0))
    perfect = [EvalPair("a", refs, refs, 10.0)]
    empty = [EvalPair("a", refs, (), 10.0)]
    ops = operating_points(50)
    values = {
        "event_f1(perfect)": event_f1(perfect).macro_f1,
        "intersection_f1(perfect)": intersection_f1(perfect).macro_f1,
        "psds(perfect)": psds({float(o): perfect for o in ops}, PSDS1, 10.0, 2),
        "psds(empty)": psds({float(o): empty for o in ops}, PSDS1, 10.0, 2),
    }
    expected = {"event_f1(perfect)": 1.0, "intersection_f1(perfect)": 1.0,
                "psds(perfect)": 1.0, "psds(empty)": 0.0}
    bad = [k for k in values if abs(values[k] - expected[k]) > 1e-9]
    return CheckResult("metrics", not bad, "fixtures match" if not bad else f"mismatch: {bad}")


def check_median() -> CheckResult:
    row = np.zeros(30, dtype=np.int8)
    row[[3, 10]] = 1
    row[20:28] = 1
    out = median_filter(row[None, :], 7)[0]
    want = np.zeros(30, dtype=np.int8)
    want[20:28] = 1
    ok = np.array_equal(out, want)
    return CheckResult("median-filter", ok, "isolated spikes removed, long run kept" if ok else f"got {out}")


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "fpsl-oracle": check_fpsl_oracle,
    "gradients": check_gradients_suite,
    "metrics": check_metrics,
    "median-filter": check_median,
}


def run_all() -> list[CheckResult]:
    return [fn() for fn in CHECKS.values()]

