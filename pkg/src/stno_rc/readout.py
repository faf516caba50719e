"""Linear readout: ridge training, prediction and evaluation metrics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionMismatch, SingularSystem
from .multiplexing import POINTS_PER_SYMBOL, StateMatrix, Waveform
from .seeding import make_rng

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ReadoutWeights:
    """Trained output weights; the last entry multiplies the bias feature."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        object.__setattr__(self, "w", w)
        if not np.all(np.isfinite(w)):
            raise SingularSystem("readout weights are not finite")

    def __len__(self) -> int:
        return len(self.w)


@dataclass(frozen=True)
class EvalReport:
    rms: float                # root-mean-square output-to-target deviation
    point_error_rate: float   # fraction of misclassified points
    symbol_error_rate: float  # fraction of misclassified symbols (majority vote)


@dataclass(frozen=True)
class Dataset:
    """Aligned feature rows, targets and original point positions."""

    features: np.ndarray
    targets: np.ndarray
    point_index: np.ndarray


def _as_features(states) -> np.ndarray:
    if isinstance(states, StateMatrix):
        return states.features
    return np.asarray(states, dtype=np.float64)


def make_targets(waveform: Waveform) -> np.ndarray:
    """Per-point target: 0.0 for sine points, 1.0 for square points."""
    return waveform.labels.astype(np.float64)


def default_ridge(states) -> float:
    """Default regularization strength, 1e-6 * trace(S^T S) / n_cols."""
    s = _as_features(states)
    return 1e-6 * float(np.sum(s * s)) / s.shape[1]


def train(states, targets, ridge: float) -> ReadoutWeights:
    """Solve the ridge normal equations (S^T S + ridge * R) w = S^T y.

    The bias column (last) is excluded from the penalty.  With ridge = 0 a
    SingularSystem is raised when the Gram matrix's condition number exceeds
    1e12.
    """
    s = _as_features(states)
    y = np.asarray(targets, dtype=np.float64)
    if s.ndim != 2 or len(y) != s.shape[0]:
        raise DimensionMismatch(
            f"states {s.shape} and targets {y.shape} are incompatible")
    if ridge < 0:
        raise ConfigError(f"ridge must be >= 0, got {ridge}")
    n_rows, n_cols = s.shape
    if n_rows < n_cols:
        warnings.warn(
            f"training with {n_rows} rows and {n_cols} columns is "
            "underdetermined", RuntimeWarning, stacklevel=2)
    gram = s.T @ s
    if ridge == 0:
        cond = np.linalg.cond(gram)
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            raise SingularSystem(
                f"Gram matrix condition number {cond:.3e} exceeds {_COND_LIMIT:.0e}")
    penalty = ridge * np.eye(n_cols)
    penalty[-1, -1] = 0.0
    try:
        w = np.linalg.solve(gram + penalty, s.T @ y)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"normal equations are singular: {exc}") from exc
    return ReadoutWeights(w=w)


def predict(states, weights: ReadoutWeights) -> np.ndarray:
    """Reconstructed output, one weighted sum per input point."""
    s = _as_features(states)
    if s.shape[1] != len(weights):
        raise DimensionMismatch(
            f"states have {s.shape[1]} columns but weights have {len(weights)}")
    return s @ weights.w


def evaluate(outputs, targets, points_per_symbol: int = POINTS_PER_SYMBOL) -> EvalReport:
    """rms deviation plus point- and symbol-level classification errors.

    Points classify as square when output >= 0.5 (ties at exactly 0.5 go to
    square); symbols by majority vote over their points, ties again to square.
    """
    out = np.asarray(outputs, dtype=np.float64)
    tgt = np.asarray(targets, dtype=np.float64)
    if out.shape != tgt.shape:
        raise DimensionMismatch(
            f"outputs {out.shape} and targets {tgt.shape} differ")
    if len(out) % points_per_symbol != 0:
        raise DimensionMismatch(
            f"{len(out)} points do not form whole symbols of {points_per_symbol}")
    rms = math.sqrt(float(np.mean((out - tgt) ** 2)))
    pred = out >= 0.5
    truth = tgt >= 0.5
    point_err = float(np.mean(pred != truth))
    pred_sym = 2 * pred.reshape(-1, points_per_symbol).sum(axis=1) >= points_per_symbol
    true_sym = 2 * truth.reshape(-1, points_per_symbol).sum(axis=1) >= points_per_symbol
    sym_err = float(np.mean(pred_sym != true_sym))
    return EvalReport(rms=rms, point_error_rate=point_err, symbol_error_rate=sym_err)


def split_train_test(states, targets, train_fraction: float, seed: int,
                     points_per_symbol: int = POINTS_PER_SYMBOL):
    """Assign whole symbols to train/test by a seeded shuffle.

    All points of a symbol stay on the same side.  Raises ConfigError when
    either side would be empty.
    """
    s = _as_features(states)
    y = np.asarray(targets, dtype=np.float64)
    if len(y) != s.shape[0]:
        raise DimensionMismatch(
            f"states {s.shape} and targets {y.shape} are incompatible")
    if s.shape[0] % points_per_symbol != 0:
        raise DimensionMismatch(
            f"{s.shape[0]} points do not form whole symbols of {points_per_symbol}")
    if not (0.0 < train_fraction < 1.0):
        raise ConfigError(
            f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_symbols = s.shape[0] // points_per_symbol
    n_train = int(round(n_symbols * train_fraction))
    if n_train < 1 or n_train >= n_symbols:
        raise ConfigError(
            f"split of {n_symbols} symbols at fraction {train_fraction} "
            "leaves one side empty")
    perm = make_rng(seed).permutation(n_symbols)
    offsets = np.arange(points_per_symbol)

    def side(symbol_ids):
        # ascending point order, so metrics recomputed from serialized
        # outputs reproduce the in-memory reductions bit-exactly
        symbol_ids = np.sort(symbol_ids)
        idx = (symbol_ids[:, None] * points_per_symbol + offsets[None, :]).ravel()
        return Dataset(features=s[idx], targets=y[idx], point_index=idx)

    return side(perm[:n_train]), side(perm[n_train:])
