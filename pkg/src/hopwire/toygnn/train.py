"""Mini-batch Adam training with a plateau-halving learning rate."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..encode import random_signs
from ..errors import GraphError, NumericalError
from . import autograd as ag
from .batch import make_batch, pe_kind_of
from .model import ToyModel, backward, loss, predictions


@dataclass
class TrainConfig:
    """Optimisation settings.

    ``wall_clock`` is in seconds; ``max_epochs`` and ``target_accuracy`` are
    optional extra stopping rules (the second fires once training accuracy
    reaches the target).
    """

    lr: float = 1e-3
    patience: int = 10
    factor: float = 0.5
    stop_lr: float = 1e-6
    wall_clock: Optional[float] = None
    batch_size: int = 32
    seed: int = 0
    max_epochs: Optional[int] = None
    target_accuracy: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.stop_lr < self.lr:
            raise GraphError("need 0 < stop_lr < lr")
        if self.patience < 1 or self.batch_size < 1:
            raise GraphError("patience and batch_size must be positive")
        if not 0 < self.factor < 1:
            raise GraphError("factor must lie in (0, 1)")


class PlateauHalving:
    """Multiply the LR by ``factor`` after ``patience`` epochs without a new best validation loss."""

    def __init__(self, lr: float, patience: int, factor: float = 0.5):
        self.lr = lr
        self.patience = patience
        self.factor = factor
        self.best = np.inf
        self.bad_epochs = 0

    def step(self, val_loss: float) -> float:
        if val_loss < self.best:
            self.best = val_loss
            self.bad_epochs = 0
        else:
            self.bad_epochs += 1
            if self.bad_epochs >= self.patience:
                self.lr *= self.factor
                self.bad_epochs = 0
        return self.lr


class Adam:
    def __init__(self, params: Dict[str, ag.Tensor], betas=(0.9, 0.999), eps: float = 1e-8):
        self.params = params
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v.data) for k, v in params.items()}
        self.v = {k: np.zeros_like(v.data) for k, v in params.items()}

    def step(self, grads: Dict[str, np.ndarray], lr: float) -> None:
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            self.params[k].data -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class TrainResult:
    model: ToyModel
    history: List[dict] = field(default_factory=list)
    stop_reason: str = ""

    @property
    def final_accuracy(self) -> float:
        return self.history[-1]["train_acc"] if self.history else float("nan")

    def epochs_to(self, accuracy: float) -> Optional[int]:
        """First epoch whose training accuracy reached ``accuracy``, if any."""
        for rec in self.history:
            if rec["train_acc"] >= accuracy:
                return rec["epoch"]
        return None


def _chunks(items: Sequence, size: int):
    for i in range(0, len(items), size):
        yield items[i : i + size]


def evaluate(model: ToyModel, items: Sequence, batch_size: int = 64):
    """Mean loss and accuracy over ``items`` without recording gradients."""
    task = model.config.task
    total, correct, count, weight = 0.0, 0, 0, 0
    with ag.no_grad():
        for chunk in _chunks(list(items), batch_size):
            b = make_batch(chunk)
            _, out = model.forward(b)
            n = b.num_graphs if task != "per-node-multiclass" else int(np.sum(b.node_y >= 0))
            total += float(loss(out, b, task).data) * n
            weight += n
            pred, target = predictions(out, b, task)
            if task != "regression":
                correct += int(np.sum(pred == target))
                count += pred.shape[0]
    acc = correct / count if count else float("nan")
    return total / weight, acc


def train(
    model: ToyModel,
    train_set: Sequence,
    val_set: Optional[Sequence] = None,
    tc: Optional[TrainConfig] = None,
    log_path: Optional[Path] = None,
) -> TrainResult:
    """Train ``model`` in place.

    Without a validation split the training set doubles as one, which is what
    the synthetic fitting experiments measure. Each epoch appends one record
    ``{epoch, train_loss, val_loss, train_acc, val_acc, lr}`` to the history.
    """
    tc = tc or TrainConfig()
    train_set = list(train_set)
    if not train_set:
        raise GraphError("training split is empty")
    if val_set is not None and len(val_set) == 0:
        raise GraphError("validation split is empty")
    rng = np.random.default_rng(tc.seed)
    spectral = pe_kind_of(train_set[0]) == "lp"
    q = train_set[0].node_pe.q if spectral else 0

    opt = Adam(model.params)
    sched = PlateauHalving(tc.lr, tc.patience, tc.factor)
    result = TrainResult(model)
    log = open(log_path, "w") if log_path is not None else None
    start = time.perf_counter()
    epoch = 0
    try:
        while True:
            epoch += 1
            order = rng.permutation(len(train_set))
            losses = []
            for idx in _chunks(order, tc.batch_size):
                chunk = [train_set[i] for i in idx]
                signs = [random_signs(rng, q) for _ in chunk] if spectral else None
                batch = make_batch(chunk, node_pe_signs=signs)
                try:
                    value, grads = backward(model, batch)
                except NumericalError as exc:
                    result.stop_reason = f"diverged: {exc}"
                    return result
                opt.step(grads, sched.lr)
                losses.append(value * batch.num_graphs)
            train_loss = float(np.sum(losses) / len(train_set))
            if not np.isfinite(train_loss):
                result.stop_reason = "diverged: non-finite training loss"
                return result

            try:
                eval_loss, train_acc = evaluate(model, train_set)
                val_loss, val_acc = (eval_loss, train_acc) if val_set is None else evaluate(model, val_set)
            except NumericalError as exc:
                result.stop_reason = f"diverged: {exc}"
                return result
            rec = {
                "epoch": epoch,
                "train_loss": train_loss,
                "val_loss": val_loss,
                "train_acc": train_acc,
                "val_acc": val_acc,
                "lr": sched.lr,
            }
            result.history.append(rec)
            if log is not None:
                log.write(json.dumps(rec) + "\n")
            sched.step(val_loss)

            if sched.lr < tc.stop_lr:
                result.stop_reason = "lr below stop_lr"
            elif tc.target_accuracy is not None and train_acc >= tc.target_accuracy:
                result.stop_reason = "target accuracy reached"
            elif tc.max_epochs is not None and epoch >= tc.max_epochs:
                result.stop_reason = "max epochs"
            elif tc.wall_clock is not None and time.perf_counter() - start >= tc.wall_clock:
                result.stop_reason = "wall clock"
            if result.stop_reason:
                return result
    finally:
        if log is not None:
            log.close()
