from .engine import Tensor
from .model import forward, init_params, predict
from .optim import Adam, TeacherState, adam_step, ema_update
from .train import TrainResult, TrainingAborted, train

__all__ = ["Tensor", "forward", "init_params", "predict", "Adam", "TeacherState", "adam_step",
           "ema_update", "TrainResult", "TrainingAborted", "train"]
