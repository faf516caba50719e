"""Command-line front end: config parsing, pipeline runs, sweeps, artifacts.

One JSON config document (strict schema, unknown keys rejected) drives the
four commands ``run``, ``map``, ``curve`` and ``validate``.  All artifacts
are deterministic byte-for-byte for a fixed config and seed; see FORMATS.md
for file layouts, units and the seed-derivation scheme.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__, defaults
from .errors import ConfigError, StnoRcError
from .multiplexing import SHIFT_MODES, EncodingConfig, shift_for_mode
from .oscillator import OscillatorParams, relaxation_time
from .pipeline import TaskConfig, run_pipeline
from .readout import EvalReport
from .sweep import (
    FieldMap,
    amplitude_curve,
    map_amplitude,
    map_noise,
    map_nonlinearity,
    map_rms,
    theta_curve,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

MAP_KINDS = ("amplitude", "nonlinearity", "noise", "rms")
CURVE_KINDS = ("theta", "amplitude")

# blocks that enter the config hash (execution knobs like the output
# directory do not affect results and are excluded)
_HASHED_BLOCKS = ("oscillator", "encoding", "task", "readout", "sweep")


def default_config() -> dict:
    """The calibrated default configuration as a plain dict."""
    return {
        "oscillator": {
            "gamma_g": defaults.DEFAULT_PARAMS.gamma_g,
            "q_nl": defaults.DEFAULT_PARAMS.q_nl,
            "sigma": defaults.DEFAULT_PARAMS.sigma,
            "kappa": defaults.DEFAULT_PARAMS.kappa,
            "v_offset": defaults.DEFAULT_PARAMS.v_offset,
            "noise_d": defaults.DEFAULT_PARAMS.noise_d,
        },
        "encoding": {
            "n_theta": defaults.DEFAULT_ENCODING.n_theta,
            "theta": defaults.DEFAULT_ENCODING.theta,
            "i_dc": defaults.DEFAULT_ENCODING.i_dc,
            "a_in": defaults.DEFAULT_ENCODING.a_in,
        },
        "task": {
            "n_symbols": defaults.DEFAULT_TASK.n_symbols,
            "seed": defaults.DEFAULT_SEED,
            "train_fraction": defaults.DEFAULT_TASK.train_fraction,
            "mask_seed": defaults.DEFAULT_TASK.mask_seed,
        },
        "readout": {
            "lambda": defaults.DEFAULT_RIDGE,
        },
        "sweep": {
            "i_dc_grid": list(defaults.DEFAULT_I_DC_GRID),
            "field_grid": list(defaults.DEFAULT_FIELD_GRID),
            "fieldmap": dict(defaults.DEFAULT_FIELDMAP_SPANS),
            "shift_mode": defaults.DEFAULT_SHIFT_MODE,
            "theta_grid": list(defaults.DEFAULT_THETA_GRID),
            "a_in_grid": list(defaults.DEFAULT_A_IN_GRID),
            "nonlinearity_h": defaults.DEFAULT_NONLINEARITY_H,
            "noise_duration": defaults.DEFAULT_NOISE_DURATION,
            "noise_dt": defaults.DEFAULT_NOISE_DT,
        },
        "output": {
            "directory": "out",
            "formats": ["csv", "json"],
        },
    }


@dataclass
class ResolvedConfig:
    resolved: dict
    params: OscillatorParams
    encoding: EncodingConfig
    task: TaskConfig
    ridge: object
    shift_mode: str
    fieldmap: FieldMap
    out_dir: str
    formats: tuple
    seed: int
    config_hash: str


class _Validator:
    """Collects key-anchored validation errors, with best-effort line numbers."""

    def __init__(self, raw_text: str, source: str):
        self.raw_text = raw_text
        self.source = source
        self.errors: list[str] = []

    def add(self, key_path: str, message: str):
        line = self._find_line(key_path.rsplit(".", 1)[-1])
        anchor = f"{self.source}:{line}: " if line else f"{self.source}: "
        self.errors.append(f"{anchor}{key_path}: {message}")

    def _find_line(self, key: str):
        needle = f'"{key}"'
        for number, line in enumerate(self.raw_text.splitlines(), start=1):
            if needle in line:
                return number
        return None

    def raise_if_any(self):
        if self.errors:
            raise ConfigError("\n".join(self.errors))


def _merge_strict(base: dict, user: dict, val: _Validator, path: str = ""):
    for key, value in user.items():
        key_path = f"{path}{key}"
        if key not in base:
            val.add(key_path, "unknown key")
            continue
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                val.add(key_path, f"expected an object, got {type(value).__name__}")
                continue
            _merge_strict(base[key], value, val, key_path + ".")
        else:
            base[key] = value


def _num(val: _Validator, block: dict, path: str, key: str, *,
         minimum=None, strict_min=None) -> float:
    value = block[key]
    key_path = f"{path}.{key}"
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        val.add(key_path, f"expected a number, got {value!r}")
        return float("nan")
    value = float(value)
    if strict_min is not None and not value > strict_min:
        val.add(key_path, f"must be > {strict_min}, got {value}")
    if minimum is not None and not value >= minimum:
        val.add(key_path, f"must be >= {minimum}, got {value}")
    return value


def _int(val: _Validator, block: dict, path: str, key: str, *, minimum=None) -> int:
    value = block[key]
    key_path = f"{path}.{key}"
    if isinstance(value, bool) or not isinstance(value, int):
        val.add(key_path, f"expected an integer, got {value!r}")
        return 0
    if minimum is not None and value < minimum:
        val.add(key_path, f"must be >= {minimum}, got {value}")
    return value


def _grid(val: _Validator, block: dict, path: str, key: str, *,
          strict_min=None) -> list:
    value = block[key]
    key_path = f"{path}.{key}"
    if not isinstance(value, list) or not value:
        val.add(key_path, "expected a non-empty array of numbers")
        return [1.0]
    out = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            val.add(key_path, f"expected numbers, got {item!r}")
            return [1.0]
        out.append(float(item))
    if any(b <= a for a, b in zip(out, out[1:])):
        val.add(key_path, "must be strictly increasing")
    if strict_min is not None and any(not v > strict_min for v in out):
        val.add(key_path, f"all values must be > {strict_min}")
    return out


def resolve_config(user: dict, raw_text: str, source: str,
                   seed_override: int | None = None) -> ResolvedConfig:
    val = _Validator(raw_text, source)
    resolved = default_config()
    if not isinstance(user, dict):
        raise ConfigError(f"{source}: top-level JSON value must be an object")
    _merge_strict(resolved, user, val)
    val.raise_if_any()

    if seed_override is not None:
        resolved["task"]["seed"] = seed_override

    osc = resolved["oscillator"]
    gamma_g = _num(val, osc, "oscillator", "gamma_g", strict_min=0.0)
    q_nl = _num(val, osc, "oscillator", "q_nl", minimum=0.0)
    sigma = _num(val, osc, "oscillator", "sigma", strict_min=0.0)
    kappa = _num(val, osc, "oscillator", "kappa", minimum=0.0)
    v_offset = _num(val, osc, "oscillator", "v_offset")
    noise_d = _num(val, osc, "oscillator", "noise_d", minimum=0.0)

    enc = resolved["encoding"]
    n_theta = _int(val, enc, "encoding", "n_theta", minimum=1)
    theta = _num(val, enc, "encoding", "theta", strict_min=0.0)
    i_dc = _num(val, enc, "encoding", "i_dc")
    a_in = _num(val, enc, "encoding", "a_in", minimum=0.0)

    task_block = resolved["task"]
    n_symbols = _int(val, task_block, "task", "n_symbols", minimum=1)
    seed = _int(val, task_block, "task", "seed", minimum=0)
    if isinstance(seed, int) and seed >= (1 << 64):
        val.add("task.seed", f"must be < 2**64, got {seed}")
    train_fraction = _num(val, task_block, "task", "train_fraction")
    if not (0.0 < train_fraction < 1.0):
        val.add("task.train_fraction", f"must lie in (0, 1), got {train_fraction}")
    mask_seed = _int(val, task_block, "task", "mask_seed", minimum=0)

    ridge = resolved["readout"]["lambda"]
    if ridge != "auto":
        if isinstance(ridge, bool) or not isinstance(ridge, (int, float)) or ridge < 0:
            val.add("readout.lambda", f'must be "auto" or a number >= 0, got {ridge!r}')
        else:
            ridge = float(ridge)

    swp = resolved["sweep"]
    i_dc_grid = _grid(val, swp, "sweep", "i_dc_grid")
    field_grid = _grid(val, swp, "sweep", "field_grid")
    fm = swp["fieldmap"]
    gamma_span = _num(val, fm, "sweep.fieldmap", "gamma_g_rel_span", minimum=0.0)
    q_span = _num(val, fm, "sweep.fieldmap", "q_nl_rel_span", minimum=0.0)
    sigma_span = _num(val, fm, "sweep.fieldmap", "sigma_rel_span", minimum=0.0)
    shift_mode = swp["shift_mode"]
    if shift_mode not in SHIFT_MODES:
        val.add("sweep.shift_mode", f"must be one of {SHIFT_MODES}, got {shift_mode!r}")
    theta_grid = _grid(val, swp, "sweep", "theta_grid", strict_min=0.0)
    a_in_grid = _grid(val, swp, "sweep", "a_in_grid")
    if any(a < 0 for a in a_in_grid):
        val.add("sweep.a_in_grid", "all values must be >= 0")
    nonlinearity_h = _num(val, swp, "sweep", "nonlinearity_h", strict_min=0.0)
    noise_duration = _num(val, swp, "sweep", "noise_duration", strict_min=0.0)
    noise_dt = _num(val, swp, "sweep", "noise_dt", strict_min=0.0)

    out_block = resolved["output"]
    out_dir = out_block["directory"]
    if not isinstance(out_dir, str) or not out_dir:
        val.add("output.directory", f"expected a non-empty string, got {out_dir!r}")
    formats = out_block["formats"]
    if (not isinstance(formats, list) or not formats
            or any(f not in ("csv", "json") for f in formats)):
        val.add("output.formats", f'expected a non-empty subset of ["csv", "json"], '
                                  f"got {formats!r}")
    val.raise_if_any()

    try:
        params = OscillatorParams(gamma_g=gamma_g, q_nl=q_nl, sigma=sigma,
                                  kappa=kappa, v_offset=v_offset, noise_d=noise_d)
        encoding = EncodingConfig(n_theta=n_theta, theta=theta, i_dc=i_dc, a_in=a_in)
        task = TaskConfig(n_symbols=n_symbols, train_fraction=train_fraction,
                          mask_seed=mask_seed)
        shift_for_mode(shift_mode, n_theta)  # rejects half_tau with odd n_theta
        fieldmap = FieldMap(field_grid=tuple(field_grid), base=params,
                            gamma_g_rel_span=gamma_span, q_nl_rel_span=q_span,
                            sigma_rel_span=sigma_span)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    hashed = {name: resolved[name] for name in _HASHED_BLOCKS}
    canonical = json.dumps(hashed, sort_keys=True, separators=(",", ":"))
    config_hash = hashlib.sha256(canonical.encode()).hexdigest()

    return ResolvedConfig(
        resolved=resolved, params=params, encoding=encoding, task=task,
        ridge=ridge, shift_mode=shift_mode, fieldmap=fieldmap,
        out_dir=out_dir, formats=tuple(formats), seed=seed,
        config_hash=config_hash)


def load_config(path: str, seed_override: int | None = None) -> ResolvedConfig:
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw_text = config_path.read_text()
    try:
        user = json.loads(raw_text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    return resolve_config(user, raw_text, str(path), seed_override)


# ---------------------------------------------------------------------------
# artifact writers


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _meta_lines(cfg: ResolvedConfig) -> list:
    return [f"# config_hash={cfg.config_hash}",
            f"# seed={cfg.seed}",
            f"# version={__version__}"]


def _write_csv(path: Path, cfg: ResolvedConfig, header, rows):
    lines = _meta_lines(cfg) + [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    with open(path, "w", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict):
    with open(path, "w", newline="\n") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2)
        handle.write("\n")


def _report_block(report: EvalReport) -> dict:
    return {"rms": report.rms,
            "point_error_rate": report.point_error_rate,
            "symbol_error_rate": report.symbol_error_rate}


# ---------------------------------------------------------------------------
# commands


def cmd_run(cfg: ResolvedConfig, out_dir: Path) -> int:
    shift = shift_for_mode(cfg.shift_mode, cfg.encoding.n_theta)
    result = run_pipeline(cfg.params, cfg.encoding, cfg.task, shift,
                          cfg.seed, cfg.ridge)
    split_of = np.full(result.waveform.n_points, "train", dtype=object)
    split_of[result.test_data.point_index] = "test"
    out_dir.mkdir(parents=True, exist_ok=True)

    if "csv" in cfg.formats:
        trace = result.trace
        _write_csv(out_dir / "trace.csv", cfg, ["t_s", "v_mV"],
                   ((trace.t0 + i * trace.dt, v) for i, v in enumerate(trace.values)))
        n_theta = cfg.encoding.n_theta
        state_header = ["k"] + [f"v_{i}" for i in range(1, n_theta + 1)] + ["bias"]
        _write_csv(out_dir / "states.csv", cfg, state_header,
                   ([k, *row] for k, row in enumerate(result.states.features)))
        _write_csv(out_dir / "outputs.csv", cfg,
                   ["k", "output", "target", "label", "predicted", "split"],
                   ([k, result.outputs[k], result.targets[k],
                     int(result.waveform.labels[k]),
                     int(result.outputs[k] >= 0.5), split_of[k]]
                    for k in range(result.waveform.n_points)))

    if "json" in cfg.formats:
        report = {
            "version": __version__,
            "config_hash": cfg.config_hash,
            "seed": cfg.seed,
            "config": {name: cfg.resolved[name] for name in _HASHED_BLOCKS},
            "derived": {
                "i_th_mA": cfg.params.i_th,
                "tau_s": cfg.encoding.tau,
                "dt_s": result.dt,
                "ridge": result.ridge,
                "shift": shift,
            },
            "train": _report_block(result.train_report),
            "test": _report_block(result.test_report),
        }
        _write_json(out_dir / "report.json", report)
    return EXIT_OK


def _grid_rows(grid_result, with_reason: bool):
    for r, field in enumerate(grid_result.field_grid):
        for c, i_dc in enumerate(grid_result.i_dc_grid):
            row = [field, i_dc, grid_result.cells[r][c]]
            if with_reason:
                row.append(grid_result.reason_at(r, c) or "")
            yield row


def cmd_map(cfg: ResolvedConfig, which: str, out_dir: Path, jobs: int) -> int:
    swp = cfg.resolved["sweep"]
    if which == "amplitude":
        result = map_amplitude(cfg.fieldmap, swp["i_dc_grid"])
    elif which == "nonlinearity":
        result = map_nonlinearity(cfg.fieldmap, swp["i_dc_grid"],
                                  swp["nonlinearity_h"])
    elif which == "noise":
        result = map_noise(cfg.fieldmap, swp["i_dc_grid"], swp["noise_duration"],
                           swp["noise_dt"], cfg.seed, jobs=jobs)
    elif which == "rms":
        shift = shift_for_mode(cfg.shift_mode, cfg.encoding.n_theta)
        result = map_rms(cfg.fieldmap, swp["i_dc_grid"], cfg.task, cfg.encoding,
                         shift, cfg.seed, cfg.ridge, jobs=jobs)
    else:
        raise ConfigError(f"unknown map kind {which!r}")
    with_reason = which in ("noise", "rms")
    header = ["field_mT", "i_dc_mA", "value"] + (["reason"] if with_reason else [])
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / f"map_{which}.csv", cfg, header,
               _grid_rows(result, with_reason))
    return EXIT_OK


def cmd_curve(cfg: ResolvedConfig, which: str, out_dir: Path) -> int:
    swp = cfg.resolved["sweep"]
    if which == "theta":
        x_name = "theta_s"
        x_values = swp["theta_grid"]
        columns = {}
        for a_in in swp["a_in_grid"]:
            encoding = replace(cfg.encoding, a_in=a_in)
            curve = theta_curve(cfg.params, encoding, cfg.task, x_values,
                                cfg.shift_mode, cfg.seed, cfg.ridge)
            columns[f"rms_a{a_in:g}mA"] = curve.series[cfg.shift_mode]
    elif which == "amplitude":
        x_name = "a_in_mA"
        x_values = swp["a_in_grid"]
        columns = {}
        for mode in SHIFT_MODES:
            curve = amplitude_curve(cfg.params, cfg.encoding, cfg.task, x_values,
                                    cfg.encoding.theta, mode, cfg.seed, cfg.ridge)
            columns[f"rms_{mode}"] = curve.series[mode]
    else:
        raise ConfigError(f"unknown curve kind {which!r}")
    header = [x_name] + list(columns)
    rows = ([x, *(columns[name][i] for name in columns)]
            for i, x in enumerate(x_values))
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / f"curve_{which}.csv", cfg, header, rows)
    return EXIT_OK


def cmd_validate(cfg: ResolvedConfig) -> int:
    print(f"config ok (hash {cfg.config_hash[:16]}, seed {cfg.seed})")
    print(f"i_th = {_fmt(cfg.params.i_th)} mA")
    print(f"tau = {_fmt(cfg.encoding.tau)} s")
    try:
        relax = relaxation_time(cfg.params, cfg.encoding.i_dc)
        print(f"relaxation time at bias = {_fmt(relax)} s")
    except StnoRcError:
        print("relaxation time at bias: not oscillating "
              f"(i_dc = {_fmt(cfg.encoding.i_dc)} mA <= i_th)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the JSON config")
    common.add_argument("--out", default=None,
                        help="output directory (default: config output.directory)")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config's task seed")
    common.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for sweep cells")
    parser = argparse.ArgumentParser(
        prog="stno-rc",
        description="Time-multiplexed reservoir computing benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common],
                   help="one full pipeline; writes trace/states/outputs/report")
    map_parser = sub.add_parser("map", parents=[common],
                                help="bias-point map over (field, i_dc)")
    map_parser.add_argument("which", choices=MAP_KINDS)
    curve_parser = sub.add_parser("curve", parents=[common],
                                  help="theta or input-amplitude curve")
    curve_parser.add_argument("which", choices=CURVE_KINDS)
    sub.add_parser("validate", parents=[common],
                   help="validate the config and print derived quantities")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out if args.out is not None else cfg.out_dir)
    try:
        if args.command == "run":
            return cmd_run(cfg, out_dir)
        if args.command == "map":
            return cmd_map(cfg, args.which, out_dir, args.jobs)
        if args.command == "curve":
            return cmd_curve(cfg, args.which, out_dir)
        if args.command == "validate":
            return cmd_validate(cfg)
        raise StnoRcError(f"unknown command {args.command!r}")
    except StnoRcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # unexpected runtime failure, still exit 3
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entrypoint():  # console-script shim
    sys.exit(main())
