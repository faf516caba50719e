"""End-to-end pipeline: task -> mask -> drive -> simulation -> states -> readout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .multiplexing import (
    EncodingConfig,
    encode,
    generate_task,
    make_mask,
    prepend_warmup,
    sample_states,
)
from .oscillator import OscillatorParams, simulate, stable_steps
from .readout import default_ridge, evaluate, make_targets, predict, split_train_test, train
from .seeding import STREAM_NOISE, STREAM_SPLIT, STREAM_TASK, substream


@dataclass(frozen=True)
class TaskConfig:
    """Task size, split fraction and the experiment's fixed mask seed."""

    n_symbols: int
    train_fraction: float
    mask_seed: int

    def __post_init__(self):
        if self.n_symbols < 1:
            raise ConfigError(f"n_symbols must be >= 1, got {self.n_symbols}")
        if not (0.0 < self.train_fraction < 1.0):
            raise ConfigError(
                f"train_fraction must lie in (0, 1), got {self.train_fraction}")


@dataclass
class PipelineResult:
    waveform: object
    mask: object
    drive: object
    trace: object
    states: object
    targets: np.ndarray
    weights: object
    outputs: np.ndarray
    ridge: float
    dt: float
    train_data: object
    test_data: object
    train_report: object
    test_report: object
    seed: int


def auto_dt(params: OscillatorParams, encoding: EncodingConfig) -> float:
    """Default integrator step: theta/20, refined when stability needs more.

    The step count per sub-interval is max(20, ceil(theta * L)) where L bounds
    the drift slope over the drive's current range and the whole clamp range,
    making every explicit-Euler step non-expansive.
    """
    n = stable_steps(params, encoding.i_dc - encoding.a_in,
                     encoding.i_dc + encoding.a_in, encoding.theta)
    return encoding.theta / n


def run_pipeline(params: OscillatorParams, encoding: EncodingConfig,
                 task: TaskConfig, shift: int, seed: int,
                 ridge="auto", dt: float | None = None) -> PipelineResult:
    """Run one full classification experiment.

    The run seed spawns independent sub-streams for the task draw, the noise
    realization and the train/test split (see FORMATS.md); the mask is fixed
    by ``task.mask_seed``.  Returns every intermediate artifact plus train-
    and test-set evaluation reports.
    """
    waveform = generate_task(task.n_symbols, substream(seed, STREAM_TASK))
    mask = make_mask(encoding.n_theta, task.mask_seed)
    drive = prepend_warmup(encode(waveform, mask, encoding), encoding.n_theta)
    if dt is None:
        dt = auto_dt(params, encoding)
    trace = simulate(params, drive, dt, substream(seed, STREAM_NOISE))
    states = sample_states(trace, encoding, waveform.n_points, shift)
    targets = make_targets(waveform)
    train_data, test_data = split_train_test(
        states, targets, task.train_fraction, substream(seed, STREAM_SPLIT))
    ridge_value = default_ridge(train_data.features) if ridge == "auto" else float(ridge)
    weights = train(train_data.features, train_data.targets, ridge_value)
    outputs = predict(states, weights)
    train_report = evaluate(outputs[train_data.point_index], train_data.targets)
    test_report = evaluate(outputs[test_data.point_index], test_data.targets)
    return PipelineResult(
        waveform=waveform, mask=mask, drive=drive, trace=trace, states=states,
        targets=targets, weights=weights, outputs=outputs, ridge=ridge_value,
        dt=dt, train_data=train_data, test_data=test_data,
        train_report=train_report, test_report=test_report, seed=seed)
