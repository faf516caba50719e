"""Sine/square task generation, binary-mask encoding and state sampling.

One physical node emulates ``n_theta`` virtual neurons by splitting each
input point's interval tau into ``n_theta`` sub-intervals of length theta.
The drive current for point ``k`` and sub-interval ``i`` is
``i_dc + a_in * u_k * m_i`` with mask entries ``m_i`` in {-1, +1}; the
reservoir state for point ``k`` is the envelope sampled once per
sub-interval (last integrator sample inside each sub-interval).
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

import numpy as np

from .errors import ConfigError, DimensionMismatch, OutOfRange
from .oscillator import AmplitudeTrace
from .seeding import make_rng

POINTS_PER_SYMBOL = 8
CLASS_SINE = 0
CLASS_SQUARE = 1

_HALF_SQRT2 = math.sqrt(0.5)
# one period, sampled so the extrema land exactly on +-1
SINE_POINTS = (0.0, _HALF_SQRT2, 1.0, _HALF_SQRT2,
               0.0, -_HALF_SQRT2, -1.0, -_HALF_SQRT2)
SQUARE_POINTS = (1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0)

SHIFT_MODES = ("in_phase", "half_tau")


@dataclass(frozen=True)
class Waveform:
    """Labeled sequence of input points, 8 per symbol."""

    points: np.ndarray   # u_k in [-1, 1]
    labels: np.ndarray   # per-point class, 0 = sine, 1 = square
    symbols: np.ndarray  # per-period class

    def __post_init__(self):
        n = len(self.points)
        if n != len(self.labels) or n != len(self.symbols) * POINTS_PER_SYMBOL:
            raise DimensionMismatch(
                f"waveform sizes inconsistent: {n} points, {len(self.labels)} "
                f"labels, {len(self.symbols)} symbols")

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_symbols(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class Mask:
    """Fixed +-1 sequence multiplying the input across sub-intervals."""

    entries: np.ndarray
    allow_degenerate: InitVar[bool] = False

    def __post_init__(self, allow_degenerate):
        entries = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", entries)
        if len(entries) < 1:
            raise ConfigError("mask must be non-empty")
        if not np.all(np.abs(entries) == 1.0):
            raise ConfigError("mask entries must be +1 or -1")
        if len(entries) >= 2 and not allow_degenerate:
            if entries.min() == entries.max():
                raise ConfigError("mask must contain both signs")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class EncodingConfig:
    """Timing and amplitude of the time-multiplexed encoding."""

    n_theta: int    # virtual neurons per input point
    theta: float    # sub-interval length (s)
    i_dc: float     # baseline current (mA)
    a_in: float     # input current amplitude (mA)

    def __post_init__(self):
        if self.n_theta < 1:
            raise ConfigError(f"n_theta must be >= 1, got {self.n_theta}")
        if self.theta <= 0:
            raise ConfigError(f"theta must be > 0, got {self.theta}")
        if self.a_in < 0:
            raise ConfigError(f"a_in must be >= 0, got {self.a_in}")

    @property
    def tau(self) -> float:
        return self.n_theta * self.theta


@dataclass(frozen=True)
class DriveSignal:
    """Piecewise-constant current drive, one value per sub-interval."""

    baseline: float
    segments: np.ndarray
    theta: float

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def duration(self) -> float:
        return self.n_segments * self.theta


@dataclass(frozen=True)
class StateMatrix:
    """Sampled reservoir state: one row per input point.

    Columns are the ``n_theta`` envelope samples of the (possibly shifted)
    sampling window followed by a constant bias feature of 1.0.
    """

    features: np.ndarray
    shift: int

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_cols(self) -> int:
        return self.features.shape[1]


def waveform_from_symbols(symbols) -> Waveform:
    """Build the 8-point-per-symbol waveform for a given class sequence."""
    symbols = np.asarray(symbols, dtype=np.int64)
    chunks = [SQUARE_POINTS if s == CLASS_SQUARE else SINE_POINTS for s in symbols]
    points = np.array([u for chunk in chunks for u in chunk])
    labels = np.repeat(symbols, POINTS_PER_SYMBOL)
    return Waveform(points=points, labels=labels, symbols=symbols)


def generate_task(n_symbols: int, seed: int) -> Waveform:
    """Random sequence of sine/square symbols, each class with probability 1/2."""
    if n_symbols < 1:
        raise ConfigError(f"n_symbols must be >= 1, got {n_symbols}")
    symbols = make_rng(seed).integers(0, 2, size=n_symbols)
    return waveform_from_symbols(symbols)


def make_mask(n_theta: int, seed: int) -> Mask:
    """Seeded uniform +-1 mask, redrawn until both signs are present."""
    if n_theta < 2:
        raise ConfigError(f"mask generation requires n_theta >= 2, got {n_theta}")
    rng = make_rng(seed)
    while True:
        entries = rng.integers(0, 2, size=n_theta) * 2.0 - 1.0
        if entries.min() < 0.0 < entries.max():
            return Mask(entries=entries)


def encode(waveform: Waveform, mask: Mask, config: EncodingConfig) -> DriveSignal:
    """Expand input points into the masked piecewise-constant current drive."""
    if len(mask) != config.n_theta:
        raise DimensionMismatch(
            f"mask has {len(mask)} entries but n_theta = {config.n_theta}")
    segments = (config.i_dc
                + config.a_in * np.outer(waveform.points, mask.entries)).ravel()
    return DriveSignal(baseline=config.i_dc, segments=segments, theta=config.theta)


def prepend_warmup(drive: DriveSignal, n_theta: int) -> DriveSignal:
    """Prepend one baseline segment (u = 0) so shifted sampling is defined
    for the first input point."""
    warm = np.full(n_theta, drive.baseline)
    return DriveSignal(baseline=drive.baseline,
                       segments=np.concatenate([warm, drive.segments]),
                       theta=drive.theta)


def shift_for_mode(mode: str, n_theta: int) -> int:
    """Sampling-window shift for a named target alignment."""
    if mode == "in_phase":
        return 0
    if mode == "half_tau":
        if n_theta % 2 != 0:
            raise ConfigError(
                f"half_tau shift requires even n_theta, got {n_theta}")
        return n_theta // 2
    raise ConfigError(f"unknown shift mode {mode!r}; expected one of {SHIFT_MODES}")


def sample_states(trace: AmplitudeTrace, config: EncodingConfig,
                  n_points: int, shift: int) -> StateMatrix:
    """Sample the trace into the reservoir state matrix.

    The trace must cover one leading warm-up segment plus ``n_points``
    segments and start at the warm-up's first sub-interval.  Row ``k`` takes
    the last integrator sample inside each of the ``n_theta`` sub-intervals
    ``k*n_theta - shift + 1 .. k*n_theta - shift + n_theta`` (1-indexed after
    the warm-up; indices <= 0 fall into the warm-up segment), then a constant
    bias feature.  ``shift = n_theta/2`` realizes the half-tau target shift.
    """
    n_theta = config.n_theta
    if not (0 <= shift <= n_theta):
        raise ConfigError(f"shift must lie in [0, {n_theta}], got {shift}")
    spp = int(round(config.theta / trace.dt))
    if spp < 1 or abs(config.theta - spp * trace.dt) > 1e-9 * config.theta:
        raise ConfigError(
            f"trace dt = {trace.dt} does not divide theta = {config.theta}")
    needed = (n_points + 1) * n_theta * spp + 1
    if len(trace.values) < needed:
        raise OutOfRange(
            f"trace has {len(trace.values)} samples but {needed} are needed "
            f"for {n_points} points plus warm-up")
    rows = np.arange(n_points)[:, None]
    cols = np.arange(1, n_theta + 1)[None, :]
    indices = (rows * n_theta - shift + cols + n_theta) * spp - 1
    features = np.column_stack([trace.values[indices], np.ones(n_points)])
    return StateMatrix(features=features, shift=shift)
