import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpsl_lab.core import Event, InvalidInput
from fpsl_lab.metrics import (PSDS1, PSDS2, EvalPair, PsdsParams, event_f1, intersection_f1,
                              operating_points, psds, psds_roc)


def pair(ref, hyp, dur=10.0, cid="a"):
    return EvalPair(cid, [Event(*r) for r in ref], [Event(*h) for h in hyp], dur)


class TestEventF1:
    def test_match_within_collars(self):
        rep = event_f1([pair([(0, 1.0, 2.0)], [(0, 1.1, 2.05)])], 0.2, 0.2, 0.2)
        assert (rep.tp[0], rep.fp[0], rep.fn[0]) == (1, 0, 0)
        assert rep.precision(0) == rep.recall(0) == rep.f1(0) == 1.0

    def test_onset_outside_collar(self):
        rep = event_f1([pair([(0, 1.0, 2.0)], [(0, 1.3, 2.0)])], 0.2, 0.2, 0.2)
        assert (rep.tp[0], rep.fp[0], rep.fn[0]) == (0, 1, 1)
        assert rep.f1(0) == 0.0

    def test_empty_hypothesis(self):
        rep = event_f1([pair([(0, 1.0, 2.0)], [])])
        assert rep.precision(0) == 0.0 and rep.recall(0) == 0.0 and rep.f1(0) == 0.0
        assert rep.macro_f1 == 0.0 and rep.micro_f1 == 0.0

    def test_offset_collar_relative(self):
        # 5 s event: offset tolerance is max(0.2, 0.2 * 5) = 1.0 s
        rep = event_f1([pair([(0, 1.0, 6.0)], [(0, 1.0, 6.9)])])
        assert rep.tp[0] == 1

    def test_class_mismatch(self):
        rep = event_f1([pair([(0, 1.0, 2.0)], [(1, 1.0, 2.0)])])
        assert rep.fn[0] == 1 and rep.fp[1] == 1
        # macro only over classes with references
        assert rep.macro_f1 == 0.0

    def test_one_to_one(self):
        rep = event_f1([pair([(0, 1.0, 2.0)], [(0, 1.0, 2.0), (0, 1.05, 2.0)])])
        assert (rep.tp[0], rep.fp[0], rep.fn[0]) == (1, 1, 0)

    def test_macro_and_micro(self):
        rep = event_f1([pair([(0, 1.0, 2.0), (1, 3.0, 4.0), (1, 5.0, 6.0)],
                             [(0, 1.0, 2.0), (1, 3.0, 4.0)])])
        # class 0: F1 1; class 1: P=1, R=0.5, F1=2/3
        assert rep.macro_f1 == pytest.approx((1 + 2 / 3) / 2, abs=1e-12)
        assert rep.micro_f1 == pytest.approx(2 * 1 * (2 / 3) / (1 + 2 / 3), abs=1e-12)

    def test_bad_collar(self):
        with pytest.raises(InvalidInput):
            event_f1([], onset_collar_s=0)


class TestIntersectionF1:
    def test_half_overlap(self):
        rep = intersection_f1([pair([(0, 0.5, 1.5)], [(0, 0.0, 1.0)])], 0.5, 0.5)
        assert (rep.tp[0], rep.fp[0], rep.fn[0]) == (1, 0, 0)

    def test_exact(self):
        rep = intersection_f1([pair([(2, 1.0, 3.0)], [(2, 1.0, 3.0)])])
        assert rep.f1(2) == 1.0

    def test_disjoint(self):
        rep = intersection_f1([pair([(0, 0.0, 1.0)], [(0, 2.0, 3.0)])])
        assert (rep.tp[0], rep.fp[0], rep.fn[0]) == (0, 1, 1)

    def test_fragments_cover_reference(self):
        # two valid fragments jointly cover 0.8 of the reference
        rep = intersection_f1([pair([(0, 0.0, 1.0)], [(0, 0.0, 0.4), (0, 0.5, 0.9)])], 0.5, 0.7)
        assert (rep.tp[0], rep.fp[0], rep.fn[0]) == (1, 0, 0)

    def test_below_dtc(self):
        rep = intersection_f1([pair([(0, 0.0, 1.0)], [(0, 0.6, 2.0)])], 0.5, 0.3)
        assert (rep.tp[0], rep.fp[0], rep.fn[0]) == (0, 1, 1)


events = st.lists(st.tuples(st.integers(0, 2), st.floats(0, 8), st.floats(0.05, 2)), max_size=6)


class TestOrderInvariance:
    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(events, events), min_size=1, max_size=4), st.randoms())
    def test_clip_and_event_order(self, clips, rnd):
        pairs = [EvalPair(str(i), [Event(c, o, o + d) for c, o, d in r], [Event(c, o, o + d) for c, o, d in h], 10.0)
                 for i, (r, h) in enumerate(clips)]
        shuffled = []
        for p in pairs:
            ref, hyp = list(p.reference), list(p.hypothesis)
            rnd.shuffle(ref)
            rnd.shuffle(hyp)
            shuffled.append(EvalPair(p.clip_id, ref, hyp, p.duration_s))
        rnd.shuffle(shuffled)
        for metric in (event_f1, intersection_f1):
            a, b = metric(pairs), metric(shuffled)
            assert (a.tp, a.fp, a.fn) == (b.tp, b.fp, b.fn)
        rep = event_f1(pairs)
        n_ref = sum(len(p.reference) for p in pairs)
        n_hyp = sum(len(p.hypothesis) for p in pairs)
        assert sum(rep.tp.values()) + sum(rep.fn.values()) == n_ref
        assert sum(rep.tp.values()) + sum(rep.fp.values()) == n_hyp


REFS = [[(0, 1.0, 2.0), (1, 4.0, 7.0)], [(0, 0.5, 1.0), (2, 2.0, 9.0)]]


def per_op(hyp_fn, ops=operating_points(50)):
    return {float(op): [EvalPair(str(i), [Event(*r) for r in refs], hyp_fn(op, refs), 10.0)
                        for i, refs in enumerate(REFS)] for op in ops}


class TestPsds:
    @pytest.mark.parametrize("params", [PSDS1, PSDS2])
    def test_perfect(self, params):
        value = psds(per_op(lambda op, refs: [Event(*r) for r in refs]), params, 20.0, 3)
        assert value == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("params", [PSDS1, PSDS2])
    def test_empty(self, params):
        assert psds(per_op(lambda op, refs: []), params, 20.0, 3) == 0.0

    def test_half_tpr_flat(self):
        refs = [Event(0, 1.0, 2.0), Event(0, 5.0, 6.0)]
        pairs = {0.5: [EvalPair("x", refs, refs[:1], 10.0)]}
        params = PsdsParams(0.7, 0.7, alpha_st=0.0, e_max=37.0)
        assert psds(pairs, params, 10.0, 1) == pytest.approx(0.5, abs=1e-12)

    def test_step_area_hand_computed(self):
        # one class, 36 s of audio (0.01 h). OP a: TPR 0.5 with no FP; OP b: TPR 1 with 1 FP (100/h).
        refs = [Event(0, 1.0, 2.0), Event(0, 5.0, 6.0)]
        fp = Event(0, 20.0, 21.0)
        pairs = {0.3: [EvalPair("x", refs, refs + [fp], 36.0)], 0.7: [EvalPair("x", refs, refs[:1], 36.0)]}
        params = PsdsParams(0.7, 0.7, alpha_st=0.0, e_max=200.0)
        # TPR 0.5 on [0, 100), 1.0 on [100, 200] -> (0.5 * 100 + 1 * 100) / 200
        assert psds(pairs, params, 36.0, 1) == pytest.approx(0.75, abs=1e-9)

    def test_alpha_st_penalises_spread(self):
        refs = [Event(0, 1.0, 2.0), Event(1, 3.0, 4.0)]
        pairs = {0.5: [EvalPair("x", refs, refs[:1], 10.0)]}
        # TPRs (1, 0): mean 0.5, population std 0.5
        assert psds(pairs, PsdsParams(0.7, 0.7, alpha_st=0.0), 10.0, 2) == pytest.approx(0.5)
        assert psds(pairs, PsdsParams(0.7, 0.7, alpha_st=1.0), 10.0, 2) == 0.0

    def test_cross_trigger_hand_computed(self):
        # class-1 detection lying on a class-0 reference is a cross-trigger, not a plain FP
        refs = [Event(0, 0.0, 36.0), Event(1, 40.0, 76.0)]
        hyps = refs + [Event(1, 10.0, 11.0)]
        pairs = {0.5: [EvalPair("x", refs, hyps, 360.0)]}
        params = PsdsParams(0.7, 0.7, cttc_threshold=0.3, alpha_ct=0.5, alpha_st=0.0, e_max=100.0)
        grid, eff = psds_roc(pairs, params, 360.0, 2)
        # class 1 effective FPR: 0 FP + 0.5 * (1 CT / 0.01 h of class-0 audio) = 50 per hour
        np.testing.assert_allclose(grid, [0.0, 50.0])
        np.testing.assert_allclose(eff, [0.5, 1.0])
        assert psds(pairs, params, 360.0, 2) == pytest.approx(0.75, abs=1e-12)
        # ignoring cross-triggers the same detection is an ordinary FP: 1 / 0.1 h = 10 per hour
        grid, _ = psds_roc(pairs, PsdsParams(0.7, 0.7, alpha_ct=0.0, alpha_st=0.0), 360.0, 2)
        np.testing.assert_allclose(grid, [0.0, 10.0])

    def test_adding_operating_points_never_hurts(self):
        rng = np.random.default_rng(0)
        params = PsdsParams(0.5, 0.5, alpha_st=0.0)
        base = {}
        for op in np.linspace(0.1, 0.9, 9):
            hyps = lambda o, refs: [Event(c, on + rng.uniform(-0.3, 0.3), off) for c, on, off in refs
                                    if rng.random() > o / 2 and on + 0.3 < off] + \
                                   ([Event(0, 9.0, 9.5)] if rng.random() < 1 - op else [])
            base.update(per_op(hyps, [op]))
        keys = sorted(base)
        subset = {k: base[k] for k in keys[::2]}
        assert psds(base, params, 20.0, 3) >= psds(subset, params, 20.0, 3)

    def test_missing_class_excluded(self, caplog):
        refs = [Event(0, 1.0, 2.0)]
        pairs = {0.5: [EvalPair("x", refs, refs, 10.0)]}
        assert psds(pairs, PSDS1, 10.0, 3) == pytest.approx(1.0)
        assert "excluded" in caplog.text

    def test_operating_point_grid(self):
        ops = operating_points(50)
        assert len(ops) == 50 and ops[0] == pytest.approx(0.01) and ops[-1] == pytest.approx(0.99)
        assert np.all(np.diff(ops) > 0)

    def test_bounds(self):
        with pytest.raises(InvalidInput):
            psds({}, PSDS1, 10.0, 1)
