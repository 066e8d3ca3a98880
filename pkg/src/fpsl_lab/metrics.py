"""Event-based F1, intersection-based F1 and the polyphonic sound detection score."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import Event, InvalidInput

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalPair:
    clip_id: str
    reference: Sequence[Event]
    hypothesis: Sequence[Event]
    duration_s: float


@dataclass(frozen=True)
class PsdsParams:
    dtc_threshold: float
    gtc_threshold: float
    cttc_threshold: float = 0.3
    alpha_ct: float = 0.0
    alpha_st: float = 1.0
    e_max: float = 100.0

    def __post_init__(self):
        for name in ("dtc_threshold", "gtc_threshold", "cttc_threshold"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise InvalidInput(f"{name}={v} outside (0, 1]")
        if self.alpha_ct < 0 or self.alpha_st < 0 or self.e_max <= 0:
            raise InvalidInput("alpha_ct, alpha_st must be >= 0 and e_max > 0")


PSDS1 = PsdsParams(dtc_threshold=0.7, gtc_threshold=0.7, cttc_threshold=0.3, alpha_ct=0.0, alpha_st=1.0)
PSDS2 = PsdsParams(dtc_threshold=0.1, gtc_threshold=0.1, cttc_threshold=0.3, alpha_ct=0.5, alpha_st=1.0)


def operating_points(n: int = 50) -> np.ndarray:
    """n evenly spaced bin centres in (0, 1): 0.01, 0.03, ..., 0.99 for n=50."""
    return (np.arange(n) + 0.5) / n


@dataclass
class F1Report:
    tp: dict[int, int] = field(default_factory=dict)
    fp: dict[int, int] = field(default_factory=dict)
    fn: dict[int, int] = field(default_factory=dict)

    @property
    def classes(self) -> list[int]:
        return sorted(set(self.tp) | set(self.fp) | set(self.fn))

    def precision(self, c: int) -> float:
        return _ratio(self.tp.get(c, 0), self.tp.get(c, 0) + self.fp.get(c, 0))

    def recall(self, c: int) -> float:
        return _ratio(self.tp.get(c, 0), self.tp.get(c, 0) + self.fn.get(c, 0))

    def f1(self, c: int) -> float:
        return _f1(self.precision(c), self.recall(c))

    @property
    def reference_classes(self) -> list[int]:
        return [c for c in self.classes if self.tp.get(c, 0) + self.fn.get(c, 0) > 0]

    @property
    def macro_f1(self) -> float:
        present = self.reference_classes
        return float(np.mean([self.f1(c) for c in present])) if present else 0.0

    @property
    def micro_f1(self) -> float:
        tp, fp, fn = (sum(d.values()) for d in (self.tp, self.fp, self.fn))
        return _f1(_ratio(tp, tp + fp), _ratio(tp, tp + fn))

    def add(self, c: int, tp: int = 0, fp: int = 0, fn: int = 0) -> None:
        self.tp[c] = self.tp.get(c, 0) + tp
        self.fp[c] = self.fp.get(c, 0) + fp
        self.fn[c] = self.fn.get(c, 0) + fn


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _by_class(events: Sequence[Event]) -> dict[int, list[Event]]:
    out: dict[int, list[Event]] = {}
    for e in events:
        out.setdefault(e.class_id, []).append(e)
    for evs in out.values():
        evs.sort()
    return out


def event_f1(pairs: Sequence[EvalPair], onset_collar_s: float = 0.2, offset_collar_s: float = 0.2,
             offset_collar_frac: float = 0.2) -> F1Report:
    """Collar-based event matching, greedy and one-to-one in onset order."""
    if onset_collar_s <= 0 or offset_collar_s <= 0 or offset_collar_frac < 0:
        raise InvalidInput("collars must be positive")
    report = F1Report()
    for pair in pairs:
        refs = _by_class(pair.reference)
        hyps = _by_class(pair.hypothesis)
        for c in set(refs) | set(hyps):
            r_list, h_list = refs.get(c, []), hyps.get(c, [])
            used = [False] * len(r_list)
            tp = 0
            for h in h_list:
                for i, r in enumerate(r_list):
                    if used[i]:
                        continue
                    off_tol = max(offset_collar_s, offset_collar_frac * r.duration)
                    if abs(h.onset_s - r.onset_s) <= onset_collar_s and abs(h.offset_s - r.offset_s) <= off_tol:
                        used[i] = True
                        tp += 1
                        break
            report.add(c, tp=tp, fp=len(h_list) - tp, fn=len(r_list) - tp)
    return report


def _merge(intervals) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for on, off in sorted(intervals):
        if merged and on <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], off)
        else:
            merged.append([on, off])
    return [(a, b) for a, b in merged]


def _overlap(on: float, off: float, union: Sequence[tuple[float, float]]) -> float:
    total = 0.0
    for a, b in union:
        if b <= on:
            continue
        if a >= off:
            break
        total += min(off, b) - max(on, a)
    return total


def _intersection_counts(refs: Sequence[Event], hyps: Sequence[Event], dtc: float, gtc: float):
    """Returns (valid hypotheses, invalid hypotheses, tp, fn) for one class of one clip."""
    ref_union = _merge((r.onset_s, r.offset_s) for r in refs)
    valid, invalid = [], []
    for h in hyps:
        if _overlap(h.onset_s, h.offset_s, ref_union) / h.duration >= dtc:
            valid.append(h)
        else:
            invalid.append(h)
    hyp_union = _merge((h.onset_s, h.offset_s) for h in valid)
    tp = sum(1 for r in refs if _overlap(r.onset_s, r.offset_s, hyp_union) / r.duration >= gtc)
    return valid, invalid, tp, len(refs) - tp


def intersection_f1(pairs: Sequence[EvalPair], dtc: float = 0.5, gtc: float = 0.5) -> F1Report:
    """Detections are valid if enough of them overlaps same-class ground truth (dtc);
    ground-truth events are found if enough of them is covered by valid detections (gtc)."""
    if not (0 < dtc <= 1 and 0 < gtc <= 1):
        raise InvalidInput("dtc and gtc must lie in (0, 1]")
    report = F1Report()
    for pair in pairs:
        refs = _by_class(pair.reference)
        hyps = _by_class(pair.hypothesis)
        for c in set(refs) | set(hyps):
            _, invalid, tp, fn = _intersection_counts(refs.get(c, []), hyps.get(c, []), dtc, gtc)
            report.add(c, tp=tp, fp=len(invalid), fn=fn)
    return report


def _psds_counts(pairs: Sequence[EvalPair], params: PsdsParams, num_classes: int):
    tp = np.zeros(num_classes)
    fp = np.zeros(num_classes)
    ct = np.zeros((num_classes, num_classes))
    for pair in pairs:
        refs = _by_class(pair.reference)
        hyps = _by_class(pair.hypothesis)
        unions = {c: _merge((r.onset_s, r.offset_s) for r in evs) for c, evs in refs.items()}
        for c in set(refs) | set(hyps):
            _, invalid, n_tp, _ = _intersection_counts(refs.get(c, []), hyps.get(c, []),
                                                       params.dtc_threshold, params.gtc_threshold)
            tp[c] += n_tp
            if params.alpha_ct == 0:
                fp[c] += len(invalid)
                continue
            for h in invalid:
                hit = False
                for other, union in unions.items():
                    if other != c and _overlap(h.onset_s, h.offset_s, union) / h.duration >= params.cttc_threshold:
                        ct[c, other] += 1
                        hit = True
                if not hit:
                    fp[c] += 1
    return tp, fp, ct


def psds_roc(per_op_pairs: Mapping[float, Sequence[EvalPair]], params: PsdsParams,
             total_duration_s: float, num_classes: int) -> tuple[np.ndarray, np.ndarray]:
    """Effective-FPR breakpoints and the monotone effective-TPR envelope on them."""
    if not per_op_pairs:
        raise InvalidInput("need at least one operating point")
    if total_duration_s <= 0:
        raise InvalidInput("total duration must be positive")
    hours = total_duration_s / 3600.0
    first = next(iter(per_op_pairs.values()))
    n_ref = np.zeros(num_classes)
    ref_hours = np.zeros(num_classes)
    for pair in first:
        for r in pair.reference:
            n_ref[r.class_id] += 1
            ref_hours[r.class_id] += r.duration / 3600.0
    scored = n_ref > 0
    if not scored.all():
        log.warning("classes without reference events excluded from PSDS: %s",
                    np.flatnonzero(~scored).tolist())
    if not scored.any():
        raise InvalidInput("no reference events for any class")

    efpr, tpr = [], []
    for pairs in per_op_pairs.values():
        tp, fp, ct = _psds_counts(pairs, params, num_classes)
        e = fp / hours
        if params.alpha_ct > 0:
            ct_rate = np.divide(ct, ref_hours[None, :], out=np.zeros_like(ct), where=ref_hours[None, :] > 0)
            for c in range(num_classes):
                others = [o for o in range(num_classes) if o != c and scored[o]]
                if others:
                    e[c] += params.alpha_ct * ct_rate[c, others].mean()
        efpr.append(e[scored])
        tpr.append((tp / np.where(scored, n_ref, 1.0))[scored])
    efpr = np.array(efpr)  # (ops, classes)
    tpr = np.array(tpr)

    grid = np.unique(np.concatenate(([0.0], efpr[efpr <= params.e_max])))
    best = np.where(efpr[None, :, :] <= grid[:, None, None], tpr[None, :, :], 0.0).max(axis=1)
    eff = np.clip(best.mean(axis=1) - params.alpha_st * best.std(axis=1), 0.0, 1.0)
    return grid, np.maximum.accumulate(eff)


def psds(per_op_pairs: Mapping[float, Sequence[EvalPair]], params: PsdsParams,
         total_duration_s: float, num_classes: int) -> float:
    """Normalised area under the PSD-ROC up to ``e_max`` false positives per hour."""
    grid, eff = psds_roc(per_op_pairs, params, total_duration_s, num_classes)
    widths = np.diff(np.append(grid, params.e_max))
    return float(np.sum(eff * widths) / params.e_max)
