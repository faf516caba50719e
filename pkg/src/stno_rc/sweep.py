"""Parameter studies: bias-point maps and theta/amplitude curves.

Every map or curve cell is a self-contained work item: its seed is derived
from the run seed and the cell's coordinate values (not grid positions), so
results are reproducible in isolation, independent of evaluation order and
of grid subsetting.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NotOscillating
from .multiplexing import EncodingConfig, shift_for_mode
from .oscillator import (
    OscillatorParams,
    amplitude_noise,
    nonlinearity,
    relaxation_time,
    steady_state_amplitude,
)
from .pipeline import TaskConfig, run_pipeline
from .seeding import float_key, hash64


@dataclass(frozen=True)
class FieldMap:
    """Affine proxy mapping of the field axis onto model parameters.

    The field itself is a label; gamma_g, q_nl and sigma are scaled linearly
    from (1 - span) at the lowest field to (1 + span) at the highest.
    """

    field_grid: tuple
    base: OscillatorParams
    gamma_g_rel_span: float = 0.3
    q_nl_rel_span: float = 0.0
    sigma_rel_span: float = 0.0

    def __post_init__(self):
        grid = tuple(float(f) for f in self.field_grid)
        object.__setattr__(self, "field_grid", grid)
        if len(grid) < 1:
            raise ConfigError("field grid must be non-empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("field grid must be strictly increasing")
        for f in grid:
            self.params_at(f)  # validates the resulting parameters

    def params_at(self, field: float) -> OscillatorParams:
        lo, hi = self.field_grid[0], self.field_grid[-1]
        u = 0.0 if hi == lo else 2.0 * (field - lo) / (hi - lo) - 1.0
        return replace(
            self.base,
            gamma_g=self.base.gamma_g * (1.0 + self.gamma_g_rel_span * u),
            q_nl=self.base.q_nl * (1.0 + self.q_nl_rel_span * u),
            sigma=self.base.sigma * (1.0 + self.sigma_rel_span * u),
        )


@dataclass
class GridResult:
    """Matrix of scalar results over (field, i_dc); reasons mark flagged cells."""

    field_grid: tuple
    i_dc_grid: tuple
    cells: np.ndarray
    reasons: list | None = None

    def reason_at(self, row: int, col: int):
        if self.reasons is None:
            return None
        return self.reasons[row][col]


@dataclass
class CurveResult:
    x: list
    series: dict
    meta: dict


def _check_grid(grid, name: str) -> tuple:
    grid = tuple(float(v) for v in grid)
    if len(grid) < 1:
        raise ConfigError(f"{name} must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"{name} must be strictly increasing")
    return grid


def _grid_map(cell_fn, n_rows: int, n_cols: int, jobs: int = 1):
    """Evaluate cell_fn(row, col) for all cells; order-independent results."""
    cells = np.empty((n_rows, n_cols))
    reasons = [[None] * n_cols for _ in range(n_rows)]
    coords = [(r, c) for r in range(n_rows) for c in range(n_cols)]

    def work(coord):
        r, c = coord
        value, reason = cell_fn(r, c)
        cells[r, c] = value
        reasons[r][c] = reason

    if jobs <= 1:
        for coord in coords:
            work(coord)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, coords))
    if all(reason is None for row in reasons for reason in row):
        reasons = None
    return cells, reasons


def map_amplitude(fieldmap: FieldMap, i_dc_grid) -> GridResult:
    """Steady-state amplitude over the (field, i_dc) grid."""
    i_dc_grid = _check_grid(i_dc_grid, "i_dc grid")

    def cell(r, c):
        return steady_state_amplitude(fieldmap.params_at(fieldmap.field_grid[r]),
                                      i_dc_grid[c]), None

    cells, reasons = _grid_map(cell, len(fieldmap.field_grid), len(i_dc_grid))
    return GridResult(fieldmap.field_grid, i_dc_grid, cells, reasons)


def map_nonlinearity(fieldmap: FieldMap, i_dc_grid, h: float) -> GridResult:
    """Amplitude-curve curvature d2V/dI2 over the grid."""
    i_dc_grid = _check_grid(i_dc_grid, "i_dc grid")

    def cell(r, c):
        return nonlinearity(fieldmap.params_at(fieldmap.field_grid[r]),
                            i_dc_grid[c], h), None

    cells, reasons = _grid_map(cell, len(fieldmap.field_grid), len(i_dc_grid))
    return GridResult(fieldmap.field_grid, i_dc_grid, cells, reasons)


def map_noise(fieldmap: FieldMap, i_dc_grid, duration: float, dt: float,
              seed: int, jobs: int = 1) -> GridResult:
    """Steady-state envelope noise over the grid.

    Sub-threshold cells are recorded as 0 with a ``not_oscillating`` flag.
    Near threshold the relaxation time grows, so the per-cell duration is
    extended to keep at least 100 relaxation times and the per-cell dt
    refined to resolve the decay.
    """
    i_dc_grid = _check_grid(i_dc_grid, "i_dc grid")

    def cell(r, c):
        params = fieldmap.params_at(fieldmap.field_grid[r])
        i_dc = i_dc_grid[c]
        try:
            relax = relaxation_time(params, i_dc)
        except NotOscillating:
            return 0.0, "not_oscillating"
        cell_duration = max(duration, 100.0 * relax)
        cell_dt = min(dt, relax / 50.0)
        cell_seed = hash64(seed, float_key(fieldmap.field_grid[r]), float_key(i_dc))
        return amplitude_noise(params, i_dc, cell_duration, cell_dt, cell_seed), None

    cells, reasons = _grid_map(cell, len(fieldmap.field_grid), len(i_dc_grid), jobs)
    return GridResult(fieldmap.field_grid, i_dc_grid, cells, reasons)


def map_rms(fieldmap: FieldMap, i_dc_grid, task: TaskConfig,
            encoding: EncodingConfig, shift: int, seed: int,
            ridge="auto", jobs: int = 1) -> GridResult:
    """Test-set rms of the full classification pipeline per grid cell.

    Per-cell failures are recorded as NaN with the failure reason.
    """
    i_dc_grid = _check_grid(i_dc_grid, "i_dc grid")

    def cell(r, c):
        params = fieldmap.params_at(fieldmap.field_grid[r])
        enc = replace(encoding, i_dc=i_dc_grid[c])
        cell_seed = hash64(seed, float_key(fieldmap.field_grid[r]),
                           float_key(i_dc_grid[c]))
        try:
            result = run_pipeline(params, enc, task, shift, cell_seed, ridge)
        except Exception as exc:  # recorded, not raised: cells are independent
            return float("nan"), f"{type(exc).__name__}: {exc}"
        return result.test_report.rms, None

    cells, reasons = _grid_map(cell, len(fieldmap.field_grid), len(i_dc_grid), jobs)
    return GridResult(fieldmap.field_grid, i_dc_grid, cells, reasons)


def theta_curve(params: OscillatorParams, encoding: EncodingConfig,
                task: TaskConfig, theta_grid, shift_mode: str, seed: int,
                ridge="auto") -> CurveResult:
    """Test-set rms as a function of the sub-interval length theta.

    n_theta stays fixed, so tau = n_theta * theta varies with theta.
    """
    theta_grid = _check_grid(theta_grid, "theta grid")
    shift = shift_for_mode(shift_mode, encoding.n_theta)
    values = []
    for theta in theta_grid:
        enc = replace(encoding, theta=theta)
        cell_seed = hash64(seed, float_key(theta))
        values.append(run_pipeline(params, enc, task, shift, cell_seed,
                                   ridge).test_report.rms)
    return CurveResult(x=list(theta_grid), series={shift_mode: values},
                       meta={"shift_mode": shift_mode,
                             "n_theta": encoding.n_theta, "seed": seed})


def amplitude_curve(params: OscillatorParams, encoding: EncodingConfig,
                    task: TaskConfig, a_in_grid, theta: float,
                    shift_mode: str, seed: int, ridge="auto") -> CurveResult:
    """Test-set rms as a function of the input amplitude at fixed theta."""
    a_in_grid = _check_grid(a_in_grid, "a_in grid")
    if any(a < 0 for a in a_in_grid):
        raise ConfigError("a_in grid values must be >= 0")
    shift = shift_for_mode(shift_mode, encoding.n_theta)
    values = []
    for a_in in a_in_grid:
        enc = replace(encoding, theta=theta, a_in=a_in)
        cell_seed = hash64(seed, float_key(a_in))
        values.append(run_pipeline(params, enc, task, shift, cell_seed,
                                   ridge).test_report.rms)
    return CurveResult(x=list(a_in_grid), series={shift_mode: values},
                       meta={"shift_mode": shift_mode,
                             "n_theta": encoding.n_theta, "seed": seed,
                             "theta": theta})
