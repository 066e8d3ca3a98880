import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpsl_lab.core import (ClipRecord, Event, ExperimentConfig, InvalidInput, PseudoLabelSet,
                           frame_grid, load_dataset, load_predictions, save_dataset,
                           save_predictions, validate_clip, weak_labels)


def clip(events, weak, duration=10.0, features=None):
    features = np.zeros((4, 10)) if features is None else features
    return ClipRecord("c0", features, np.array(weak, dtype=np.int8), tuple(events), duration)


class TestValidateClip:
    def test_consistent(self):
        assert validate_clip(clip([Event(2, 0.5, 1.0)], [0, 0, 1])) == []

    def test_weak_strong_mismatch(self):
        problems = validate_clip(clip([Event(0, 0.5, 1.0)], [0, 0, 0]))
        assert problems == ["weak/strong mismatch class 0"]

    def test_empty_event(self):
        rec = ClipRecord.from_json({"clip_id": "x", "duration_s": 10, "features": [[0.0]],
                                    "weak": [1], "events": [{"class": 0, "onset_s": 1.0, "offset_s": 1.0}]})
        assert any(p.startswith("empty event") for p in validate_clip(rec))

    def test_event_out_of_range(self):
        problems = validate_clip(clip([Event(0, 9.5, 10.5)], [1]))
        assert any("out of range" in p for p in problems)

    def test_class_out_of_range(self):
        problems = validate_clip(clip([Event(3, 1.0, 2.0)], [0, 0]))
        assert "class id 3 out of range" in problems

    def test_malformed_features(self):
        problems = validate_clip(clip([], [0], features=np.array([1.0, np.nan])))
        assert any(p.startswith("malformed features") for p in problems)

    def test_pure(self):
        rec = clip([Event(0, 0.5, 1.0)], [0, 1])
        assert validate_clip(rec) == validate_clip(rec)


class TestTypes:
    def test_event_strict(self):
        with pytest.raises(InvalidInput):
            Event(0, 1.0, 1.0)

    def test_frame_grid_range(self):
        with pytest.raises(InvalidInput):
            frame_grid([[0.2, 1.2]])
        with pytest.raises(InvalidInput):
            frame_grid(np.zeros((0, 3)))
        g = frame_grid([[0.2, 0.4]])
        assert not g.flags.writeable

    def test_weak_labels_binary(self):
        with pytest.raises(InvalidInput):
            weak_labels([0, 2])

    def test_pseudo_label_set_shapes(self):
        with pytest.raises(InvalidInput):
            PseudoLabelSet(np.zeros((2, 3), dtype=np.int8), np.zeros(4, dtype=np.int8))

    def test_config_validation(self):
        with pytest.raises(InvalidInput):
            ExperimentConfig(median_size=6)
        with pytest.raises(InvalidInput):
            ExperimentConfig(thresh=1.0)
        with pytest.raises(InvalidInput):
            ExperimentConfig(pooling="gru")

    def test_config_defaults_follow_table_one(self):
        cfg = ExperimentConfig()
        assert (cfg.thresh, cfg.win_size, cfg.alpha, cfg.median_size) == (0.6, 1, 0.3, 7)

    def test_config_roundtrip(self):
        cfg = ExperimentConfig(alpha=0.7, pooling="max")
        assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


clip_strategy = st.builds(
    lambda cid, feats, evs, dur: ClipRecord(
        cid, np.array(feats), np.array([int(any(e[0] == c for e in evs)) for c in range(3)], dtype=np.int8),
        tuple(sorted(Event(c, on, on + d) for c, on, d in evs)), dur),
    st.text(min_size=1, max_size=8),
    st.lists(st.lists(st.floats(0, 1), min_size=5, max_size=5), min_size=2, max_size=2),
    st.lists(st.tuples(st.integers(0, 2), st.floats(0, 5), st.floats(0.01, 4)), max_size=4),
    st.floats(9.5, 12),
)


@settings(max_examples=50, deadline=None)
@given(st.lists(clip_strategy, min_size=1, max_size=3))
def test_dataset_roundtrip(tmp_path_factory, clips):
    path = tmp_path_factory.mktemp("ds") / "data.jsonl"
    save_dataset(path, clips)
    loaded = load_dataset(path)
    assert loaded == clips
    for a, b in zip(loaded, clips):
        for ea, eb in zip(a.events, b.events):
            assert abs(ea.onset_s - eb.onset_s) < 1e-9 and abs(ea.offset_s - eb.offset_s) < 1e-9


def test_load_rejects_inconsistent(tmp_path):
    path = tmp_path / "bad.jsonl"
    row = {"clip_id": "x", "duration_s": 10, "frame_rate_hz": 25, "features": [[0.0]],
           "weak": [0], "events": [{"class": 0, "onset_s": 1.0, "offset_s": 2.0}]}
    path.write_text(json.dumps(row) + "\n")
    with pytest.raises(InvalidInput, match="mismatch"):
        load_dataset(path)
    assert len(load_dataset(path, validate=False)) == 1


def test_prediction_roundtrip(tmp_path):
    path = tmp_path / "pred.jsonl"
    preds = {"a": [Event(1, 0.5, 1.0), Event(0, 2.0, 3.0)], "b": []}
    grids = {"a": np.array([[0.1, 0.9]])}
    save_predictions(path, preds, grids)
    events, loaded_grids = load_predictions(path)
    assert events == {"a": sorted(preds["a"]), "b": []}
    np.testing.assert_array_equal(loaded_grids["a"], grids["a"])
