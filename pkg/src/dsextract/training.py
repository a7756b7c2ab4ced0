"""Data splits, Adam, early stopping on dev micro-F1, grid search and repeated runs."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .evaluation import MICRO, RunSummary, Scores
from .tensor import Rng, zero_grads


class TrainingDiverged(RuntimeError):
    """Raised when the training loss stops being finite."""

    def __init__(self, step: int, loss: float):
        super().__init__(f"non-finite training loss {loss!r} at step {step}")
        self.step, self.loss = step, loss


# -- splitting -------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple = (0.8, 0.1, 0.1)
    seed: int = 0
    stratified: bool = False

    def __post_init__(self):
        if len(self.fractions) != 3 or any(f < 0 for f in self.fractions):
            raise ValueError("fractions must be three non-negative numbers")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError(f"split fractions sum to {sum(self.fractions)}, not 1")


def _allocate(units: list, spec: SplitSpec) -> tuple:
    n = len(units)
    n_dev = math.floor(n * spec.fractions[1])
    n_test = math.floor(n * spec.fractions[2])
    n_train = n - n_dev - n_test
    return units[:n_train], units[n_train:n_train + n_dev], units[n_train + n_dev:]


def split(items: Sequence, spec: SplitSpec = SplitSpec(), group: Optional[Callable] = None,
          stratify: Optional[Callable] = None) -> tuple:
    """Shuffle by seed, then floor-allocate dev and test; the remainder goes to train.

    With ``group`` the allocation unit is a group of items (all items sharing a key
    land in one part). With ``spec.stratified`` and ``stratify`` each stratum is
    allocated separately.
    """
    items = list(items)
    if len(items) < 10:
        raise ValueError(f"need at least 10 items to split, got {len(items)}")
    rng = Rng(spec.seed).child("split")
    if group is None:
        units = [[it] for it in items]
    else:
        by_key: dict = {}
        for it in items:
            by_key.setdefault(group(it), []).append(it)
        units = list(by_key.values())
    if spec.stratified and stratify is not None:
        strata: dict = {}
        for u in units:
            strata.setdefault(stratify(u[0]), []).append(u)
        parts = ([], [], [])
        for key in sorted(strata, key=str):
            for acc, got in zip(parts, _allocate(rng.shuffle(strata[key]), spec)):
                acc.extend(got)
    else:
        parts = _allocate(rng.shuffle(units), spec)
    return tuple([it for u in p for it in u] for p in parts)


# -- optimisation ----------------------------------------------------------------

@dataclass
class TrainConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 5.0
    batch_size: int = 32
    eval_every: int = 50
    patience: int = 500
    max_steps: int = 20000

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown training settings: {sorted(unknown)}")
        return cls(**data)


class Adam:
    def __init__(self, params: Sequence, cfg: TrainConfig):
        self.params = list(params)
        self.cfg = cfg
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.t = 0

    def step(self) -> float:
        """Clip the global gradient norm, apply one update, return the pre-clip norm."""
        cfg = self.cfg
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        norm = math.sqrt(sum(float(np.vdot(g, g)) for g in grads))
        scale = cfg.clip_norm / norm if cfg.clip_norm and norm > cfg.clip_norm else 1.0
        self.t += 1
        c1 = 1.0 - cfg.beta1 ** self.t
        c2 = 1.0 - cfg.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            g = g * scale
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * g * g
            p.data -= cfg.lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps)
        return norm


@dataclass
class EarlyStop:
    """Track the best dev metric; stop once ``patience_steps`` pass without strict gain."""

    patience_steps: int = 500
    best_metric: float = -math.inf
    best_step: int = 0
    best_state: Optional[dict] = None

    def update(self, step: int, metric: float, state: Optional[Callable] = None) -> bool:
        if metric > self.best_metric:
            self.best_metric, self.best_step = metric, step
            if state is not None:
                self.best_state = state()
            return True
        return False

    def should_stop(self, step: int) -> bool:
        return step - self.best_step >= self.patience_steps


def length_batches(lengths: Sequence[int], batch_size: int, rng: Rng) -> list:
    """Shuffled batches of item indices where every batch shares one length."""
    groups: dict = {}
    for i in rng.permutation(len(lengths)):
        groups.setdefault(int(lengths[i]), []).append(int(i))
    batches = []
    for key in sorted(groups):
        idx = groups[key]
        batches.extend(idx[s:s + batch_size] for s in range(0, len(idx), batch_size))
    return [batches[i] for i in rng.permutation(len(batches))]


@dataclass
class TrainResult:
    best_metric: float
    best_step: int
    steps: int
    log: list = field(default_factory=list)


def train(model, items: Sequence, dev_metric: Callable, cfg: TrainConfig = TrainConfig(),
          rng: Optional[Rng] = None, log_file=None) -> TrainResult:
    """Mini-batch Adam with dev evaluation every ``cfg.eval_every`` steps.

    ``model`` needs ``parameters()``, ``loss(batch, rng)``, ``item_length(item)``,
    ``state()`` and ``load_state()``. ``dev_metric(model)`` returns the value to
    maximise. On return the model holds the best checkpoint.
    """
    if not items:
        raise ValueError("empty training set")
    rng = rng or Rng(0)
    batch_rng, noise_rng = rng.child("batches"), rng.child("noise")
    params = model.parameters()
    opt = Adam(params, cfg)
    stop = EarlyStop(cfg.patience)
    lengths = [model.item_length(it) for it in items]
    log: list = []
    step, since, loss_sum = 0, 0, 0.0
    done = False
    while not done:
        for batch_idx in length_batches(lengths, cfg.batch_size, batch_rng):
            zero_grads(params)
            loss = model.loss([items[i] for i in batch_idx], noise_rng)
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingDiverged(step + 1, value)
            loss.backward()
            opt.step()
            step += 1
            since += 1
            loss_sum += value
            if step % cfg.eval_every == 0 or step == cfg.max_steps:
                metric = float(dev_metric(model))
                improved = stop.update(step, metric, model.state)
                record = {"step": step, "loss": loss_sum / since, "dev_f1": metric, "best": improved}
                log.append(record)
                if log_file is not None:
                    log_file.write(json.dumps(record, sort_keys=True) + "\n")
                since, loss_sum = 0, 0.0
                if stop.should_stop(step) or step >= cfg.max_steps:
                    done = True
                    break
    if stop.best_state is not None:
        model.load_state(stop.best_state)
    return TrainResult(stop.best_metric, stop.best_step, step, log)


def replay_early_stop(trace: Sequence, patience: int) -> tuple:
    """Apply the stopping rule to a list of (step, metric); returns (stop_step, best_step)."""
    stop = EarlyStop(patience)
    for step, metric in trace:
        stop.update(step, metric)
        if stop.should_stop(step):
            return step, stop.best_step
    return (trace[-1][0] if trace else 0), stop.best_step


# -- grid search and repeated runs -------------------------------------------------

NER_CHAR_CNN_GRID = {"char_cnn_kernel": [2, 3, 4, 5, 6], "char_cnn_filters": [50, 100, 200, 300]}
RE_CNN_GRID = {
    "pos_dim": [50, 100, 200],
    "cnn_filters_per_size": [64, 128, 256, 512],
    "cnn_filter_sizes": [[2, 3, 4], [3, 4, 5], [4, 5, 6]],
}


def grid_cells(grid: dict) -> list:
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must have at least one value per axis")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def grid_search(grid: dict, run_cell: Callable) -> tuple:
    """Evaluate ``run_cell(cell) -> dev score`` over every cell; ties keep the earliest."""
    table = []
    best, best_score = None, -math.inf
    for cell in grid_cells(grid):
        score = float(run_cell(cell))
        table.append((cell, score))
        if score > best_score:
            best, best_score = cell, score
    return best, table


@dataclass
class RunReport:
    seeds: list
    runs: list
    extra: list = field(default_factory=list)

    @property
    def summary(self) -> RunSummary:
        return RunSummary(self.runs)

    def micro_f1(self) -> tuple:
        s = self.summary
        return s.mean(MICRO, "F1"), s.std(MICRO, "F1")


def multi_run(run: Callable, k: int = 5, seeds: Optional[Sequence[int]] = None, base_seed: int = 0) -> RunReport:
    """Call ``run(seed)`` k times; each call returns Scores or (Scores, extra)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    seeds = list(seeds) if seeds is not None else [base_seed + i for i in range(k)]
    if len(seeds) != k:
        raise ValueError(f"{len(seeds)} seeds given for {k} runs")
    runs, extra = [], []
    for s in seeds:
        out = run(s)
        if isinstance(out, Scores):
            runs.append(out)
            extra.append(None)
        else:
            runs.append(out[0])
            extra.append(out[1])
    return RunReport(seeds, runs, extra)
