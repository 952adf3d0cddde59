"""Training drivers: run one optimizer over a perceptron and log progress.

The drivers operate on already-normalized feature/target arrays (the
feature pipeline owns scaling).  Every epoch records the training and
validation mean squared error; the returned model is the snapshot with
the best validation error (best training error when no validation rows
exist), and training stops on the loss goal, the epoch limit, a vanishing
gradient, or too many epochs without a new validation best.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict, replace
from typing import Optional

import numpy as np

from . import optimizers
from .errors import DimensionMismatch
from .mlp import (MlpModel, flatten_params, init_mlp, make_objective,
                  mlp_loss, model_from_dict, model_to_dict, model_with_params)

OPTIMIZER_NAMES = ("gdx", "scg", "cgb")

STOP_VALIDATION = "validation"


@dataclass
class TrainConfig:
    """Optimizer choice plus every tunable of the training loop."""

    optimizer: str = "gdx"
    max_epochs: int = 3000
    goal_mse: float = 0.0
    seed: int = 0
    hidden_layers: tuple[int, ...] = (10,)
    hidden_activation: str = "tanh"
    max_validation_failures: int = 6
    gradient_floor: float = 1e-10
    # gdx
    lr: float = 0.05
    momentum: float = 0.9
    lr_increase: float = 1.05
    lr_decrease: float = 0.7
    max_perf_increase: float = 1.04
    # scg
    scg_sigma: float = 5e-5
    scg_lambda: float = 5e-7
    # cgb
    cgb_c1: float = 1e-4
    cgb_c2: float = 0.1
    cgb_restart_threshold: float = 0.2
    cgb_ls_max_evals: int = 20

    def __post_init__(self) -> None:
        if self.optimizer not in OPTIMIZER_NAMES:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.goal_mse < 0:
            raise ValueError("goal_mse must be >= 0")
        self.hidden_layers = tuple(int(h) for h in self.hidden_layers)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_layers"] = list(self.hidden_layers)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        kwargs = dict(data)
        if "hidden_layers" in kwargs:
            kwargs["hidden_layers"] = tuple(kwargs["hidden_layers"])
        return cls(**kwargs)


@dataclass
class TrainingReport:
    """Per-epoch error history of one training run (epochs are 1-based)."""

    train_mse: list[float] = field(default_factory=list)
    validation_mse: list[float] = field(default_factory=list)
    stop_reason: str = "max_epochs"
    best_epoch: int = 0
    learning_rates: Optional[list[float]] = None  # gdx only

    @property
    def n_epochs(self) -> int:
        return len(self.train_mse)


def report_to_csv(report: TrainingReport) -> str:
    lines = ["epoch,train_mse,val_mse"]
    for i, (tr, va) in enumerate(zip(report.train_mse, report.validation_mse), start=1):
        lines.append(f"{i},{tr!r},{va!r}")
    return "\n".join(lines) + "\n"


class _EpochMonitor:
    """Records history, tracks the best snapshot, drives early stopping."""

    def __init__(self, model: MlpModel, x_val, y_val, max_failures: int):
        self.model = model
        self.x_val = x_val
        self.y_val = y_val
        self.has_val = x_val is not None and len(x_val) > 0
        self.max_failures = max_failures
        self.train_mse: list[float] = []
        self.validation_mse: list[float] = []
        self.best_score = math.inf
        self.best_w: Optional[np.ndarray] = None
        self.best_epoch = 0
        self.failures = 0

    def __call__(self, epoch: int, w: np.ndarray, train_mse: float) -> Optional[str]:
        self.train_mse.append(train_mse)
        if self.has_val:
            val = mlp_loss(model_with_params(self.model, w), self.x_val, self.y_val)
        else:
            val = math.nan
        self.validation_mse.append(val)

        score = val if self.has_val else train_mse
        if score < self.best_score:
            self.best_score = score
            self.best_w = w.copy()
            self.best_epoch = epoch
            self.failures = 0
        else:
            self.failures += 1
            if self.has_val and self.failures >= self.max_failures:
                return STOP_VALIDATION
        return None


def _prepare_targets(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return y[:, None] if y.ndim == 1 else y


def train_mlp(model: MlpModel, x_train, y_train, x_val=None, y_val=None,
              config: Optional[TrainConfig] = None) -> tuple[MlpModel, TrainingReport]:
    """Train `model` full-batch with the optimizer named in `config`.

    Inputs must already be normalized; y arrays may be 1-D (single
    output) or 2-D.  Returns the best-epoch snapshot and the report.
    """
    config = config or TrainConfig()
    x_train = np.asarray(x_train, dtype=float)
    y_train = _prepare_targets(y_train)
    if x_val is not None:
        x_val = np.asarray(x_val, dtype=float)
        y_val = _prepare_targets(y_val)
    if x_train.shape[1] != model.n_inputs:
        raise DimensionMismatch(
            f"model expects {model.n_inputs} inputs, data has {x_train.shape[1]}")

    f, grad = make_objective(model, x_train, y_train)
    w0 = flatten_params(model)
    monitor = _EpochMonitor(model, x_val, y_val, config.max_validation_failures)
    rate_log: Optional[list] = [] if config.optimizer == "gdx" else None

    if config.optimizer == "gdx":
        result = optimizers.gdx_minimize(
            f, grad, w0, lr=config.lr, momentum=config.momentum,
            lr_increase=config.lr_increase, lr_decrease=config.lr_decrease,
            max_perf_increase=config.max_perf_increase,
            max_iter=config.max_epochs, goal=config.goal_mse,
            gradient_floor=config.gradient_floor, callback=monitor,
            rate_log=rate_log)
    elif config.optimizer == "scg":
        result = optimizers.scg_minimize(
            f, grad, w0, sigma0=config.scg_sigma, lambda0=config.scg_lambda,
            max_iter=config.max_epochs, goal=config.goal_mse,
            gradient_floor=config.gradient_floor, callback=monitor)
    else:
        result = optimizers.cgb_minimize(
            f, grad, w0, c1=config.cgb_c1, c2=config.cgb_c2,
            restart_threshold=config.cgb_restart_threshold,
            ls_max_evals=config.cgb_ls_max_evals,
            max_iter=config.max_epochs, goal=config.goal_mse,
            gradient_floor=config.gradient_floor, callback=monitor)

    best_w = monitor.best_w if monitor.best_w is not None else result.w
    best_epoch = monitor.best_epoch if monitor.best_epoch > 0 else result.n_iter
    report = TrainingReport(train_mse=monitor.train_mse,
                            validation_mse=monitor.validation_mse,
                            stop_reason=result.stop_reason,
                            best_epoch=best_epoch,
                            learning_rates=rate_log)
    return model_with_params(model, best_w), report


def train_gdx(model, x_train, y_train, x_val=None, y_val=None,
              config: Optional[TrainConfig] = None):
    config = replace(config, optimizer="gdx") if config else TrainConfig(optimizer="gdx")
    return train_mlp(model, x_train, y_train, x_val, y_val, config)


def train_scg(model, x_train, y_train, x_val=None, y_val=None,
              config: Optional[TrainConfig] = None):
    config = replace(config, optimizer="scg") if config else TrainConfig(optimizer="scg")
    return train_mlp(model, x_train, y_train, x_val, y_val, config)


def train_cgb(model, x_train, y_train, x_val=None, y_val=None,
              config: Optional[TrainConfig] = None):
    config = replace(config, optimizer="cgb") if config else TrainConfig(optimizer="cgb")
    return train_mlp(model, x_train, y_train, x_val, y_val, config)


def new_model_for(config: TrainConfig, n_inputs: int, n_outputs: int = 1) -> MlpModel:
    """Fresh seeded perceptron with the configured topology."""
    sizes = (n_inputs,) + config.hidden_layers + (n_outputs,)
    return init_mlp(sizes, hidden_activation=config.hidden_activation,
                    seed=config.seed)


def save_model(path, model: MlpModel, normalizer: Optional[dict] = None,
               optimizer: Optional[str] = None) -> None:
    """Write the model (plus optional normalizer block and optimizer tag)
    as deterministic JSON."""
    payload = model_to_dict(model)
    payload["kind"] = "hifloc-mlp"
    if normalizer is not None:
        payload["normalizer"] = normalizer
    if optimizer is not None:
        payload["optimizer"] = optimizer
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> tuple[MlpModel, Optional[dict], Optional[str]]:
    """Read a model file; returns (model, normalizer dict or None, optimizer tag)."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    model = model_from_dict(payload)
    return model, payload.get("normalizer"), payload.get("optimizer")
