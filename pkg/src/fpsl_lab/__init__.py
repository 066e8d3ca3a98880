"""Train sound event detectors from clip tags, adding frame targets taken from each class's peak frames.

The package bundles the label construction, pooling functions, losses, a small
numpy training stack, decoding, evaluation metrics and a synthetic scene
generator used to study the method at desk scale.
"""

from .core import ClipRecord, Event, ExperimentConfig, InvalidInput, PseudoLabelSet
from .decode import DecodeParams, decode
from .fpsl import FpslParams, build_fpsl, fpsl_oracle
from .loss import LossBreakdown, combined_loss
from .metrics import PSDS1, PSDS2, EvalPair, PsdsParams, event_f1, intersection_f1, psds

__all__ = [
    "ClipRecord", "DecodeParams", "EvalPair", "Event", "ExperimentConfig", "FpslParams",
    "InvalidInput", "LossBreakdown", "PSDS1", "PSDS2", "PseudoLabelSet", "PsdsParams",
    "build_fpsl", "combined_loss", "decode", "event_f1", "fpsl_oracle", "intersection_f1", "psds",
]
