import math
from dataclasses import replace

import numpy as np
import pytest

import stno_rc.sweep as sweep_module
from stno_rc import (
    ConfigError,
    FieldMap,
    amplitude_curve,
    amplitude_noise,
    map_amplitude,
    map_noise,
    map_nonlinearity,
    map_rms,
    nonlinearity,
    relaxation_time,
    run_pipeline,
    steady_state_amplitude,
    theta_curve,
)
from stno_rc.defaults import (
    DEFAULT_ENCODING,
    DEFAULT_FIELD_GRID,
    DEFAULT_I_DC_GRID,
    DEFAULT_PARAMS,
    DEFAULT_TASK,
)
from stno_rc.seeding import float_key, hash64

SMALL_TASK = replace(DEFAULT_TASK, n_symbols=16)
FIELDS3 = (400.0, 430.0, 460.0)


def small_fieldmap(**kwargs):
    return FieldMap(field_grid=FIELDS3, base=DEFAULT_PARAMS, **kwargs)


class TestFieldMap:
    def test_endpoint_scaling(self):
        fm = FieldMap(field_grid=(380.0, 470.0), base=DEFAULT_PARAMS,
                      gamma_g_rel_span=0.3)
        assert fm.params_at(380.0).gamma_g == pytest.approx(0.7 * DEFAULT_PARAMS.gamma_g)
        assert fm.params_at(470.0).gamma_g == pytest.approx(1.3 * DEFAULT_PARAMS.gamma_g)
        assert fm.params_at(425.0).gamma_g == pytest.approx(DEFAULT_PARAMS.gamma_g)
        assert fm.params_at(380.0).sigma == DEFAULT_PARAMS.sigma

    def test_single_point_grid_is_base(self):
        fm = FieldMap(field_grid=(447.0,), base=DEFAULT_PARAMS)
        assert fm.params_at(447.0) == DEFAULT_PARAMS

    def test_rejects_non_increasing_grid(self):
        with pytest.raises(ConfigError):
            FieldMap(field_grid=(400.0, 400.0), base=DEFAULT_PARAMS)

    def test_rejects_invalid_resulting_params(self):
        with pytest.raises(ConfigError):
            FieldMap(field_grid=(380.0, 470.0), base=DEFAULT_PARAMS,
                     gamma_g_rel_span=1.5)  # negative gamma at the low end


class TestMapAmplitude:
    def test_subthreshold_cells_at_offset(self):
        fm = small_fieldmap()
        result = map_amplitude(fm, [1.0, 2.0])
        assert np.all(result.cells == DEFAULT_PARAMS.v_offset)

    def test_degenerate_grid_matches_direct_call(self):
        fm = FieldMap(field_grid=(447.0,), base=DEFAULT_PARAMS)
        result = map_amplitude(fm, [8.0])
        assert result.cells.shape == (1, 1)
        assert result.cells[0, 0] == steady_state_amplitude(DEFAULT_PARAMS, 8.0)

    def test_rows_monotone_above_threshold(self):
        fm = FieldMap(field_grid=tuple(DEFAULT_FIELD_GRID), base=DEFAULT_PARAMS)
        result = map_amplitude(fm, DEFAULT_I_DC_GRID)
        for r, field in enumerate(result.field_grid):
            i_th = fm.params_at(field).i_th
            row = [v for c, v in enumerate(result.cells[r])
                   if result.i_dc_grid[c] >= i_th]
            assert all(b >= a for a, b in zip(row, row[1:]))


class TestMapNonlinearity:
    def test_flat_curve_gives_zero_map(self):
        fm = FieldMap(field_grid=FIELDS3, base=replace(DEFAULT_PARAMS, kappa=0.0))
        result = map_nonlinearity(fm, [5.0, 7.0, 9.0], h=0.05)
        assert np.all(result.cells == 0.0)

    def test_matches_pointwise_calls(self):
        fm = small_fieldmap()
        grid = [5.0, 7.0, 9.0]
        result = map_nonlinearity(fm, grid, h=0.05)
        for r, field in enumerate(FIELDS3):
            for c, i_dc in enumerate(grid):
                assert result.cells[r, c] == nonlinearity(fm.params_at(field),
                                                          i_dc, 0.05)

    def test_peak_sits_just_above_threshold(self):
        fm = FieldMap(field_grid=tuple(DEFAULT_FIELD_GRID), base=DEFAULT_PARAMS)
        result = map_nonlinearity(fm, DEFAULT_I_DC_GRID, h=0.05)
        for r, field in enumerate(result.field_grid):
            i_th = fm.params_at(field).i_th
            supra = [c for c, i in enumerate(result.i_dc_grid) if i > i_th]
            if len(supra) < 3:
                continue
            best = max(supra, key=lambda c: abs(result.cells[r, c]))
            assert best in supra[:2]


class TestMapNoise:
    def test_zero_diffusion_gives_zero_map(self):
        fm = FieldMap(field_grid=FIELDS3, base=replace(DEFAULT_PARAMS, noise_d=0.0))
        result = map_noise(fm, [2.0, 8.0], duration=5e-5, dt=5e-9, seed=1)
        assert np.all(np.abs(result.cells) < 1e-9)

    def test_subthreshold_cells_flagged(self):
        fm = small_fieldmap()
        result = map_noise(fm, [2.0, 9.0], duration=5e-5, dt=5e-9, seed=1)
        for r in range(len(FIELDS3)):
            assert result.cells[r, 0] == 0.0
            assert result.reason_at(r, 0) == "not_oscillating"
            assert result.reason_at(r, 1) is None

    def test_deterministic(self):
        fm = small_fieldmap()
        a = map_noise(fm, [8.0, 9.0], duration=5e-5, dt=5e-9, seed=7)
        b = map_noise(fm, [8.0, 9.0], duration=5e-5, dt=5e-9, seed=7)
        np.testing.assert_array_equal(a.cells, b.cells)

    def test_matches_isolated_cell(self):
        fm = small_fieldmap()
        duration, dt = 5e-5, 5e-9
        result = map_noise(fm, [8.0], duration=duration, dt=dt, seed=7)
        params = fm.params_at(FIELDS3[1])
        relax = relaxation_time(params, 8.0)
        cell_seed = hash64(7, float_key(FIELDS3[1]), float_key(8.0))
        direct = amplitude_noise(params, 8.0, max(duration, 100 * relax),
                                 min(dt, relax / 50), cell_seed)
        assert result.cells[1, 0] == direct


class TestMapRms:
    def test_deterministic_and_jobs_independent(self):
        fm = FieldMap(field_grid=(420.0, 450.0), base=DEFAULT_PARAMS)
        grid = [7.0, 8.0]
        a = map_rms(fm, grid, SMALL_TASK, DEFAULT_ENCODING, 12, seed=5)
        b = map_rms(fm, grid, SMALL_TASK, DEFAULT_ENCODING, 12, seed=5, jobs=3)
        np.testing.assert_array_equal(a.cells, b.cells)

    def test_subgrid_equals_full_grid_cells(self):
        fm = FieldMap(field_grid=(420.0, 450.0), base=DEFAULT_PARAMS)
        full = map_rms(fm, [7.0, 7.5, 8.0], SMALL_TASK, DEFAULT_ENCODING, 12, seed=5)
        sub = map_rms(fm, [7.0, 8.0], SMALL_TASK, DEFAULT_ENCODING, 12, seed=5)
        np.testing.assert_array_equal(sub.cells[:, 0], full.cells[:, 0])
        np.testing.assert_array_equal(sub.cells[:, 1], full.cells[:, 2])

    def test_subthreshold_cells_near_chance(self):
        fm = FieldMap(field_grid=(447.0,), base=DEFAULT_PARAMS)
        task = replace(DEFAULT_TASK, n_symbols=40)
        result = map_rms(fm, [1.0, 2.0], task, DEFAULT_ENCODING, 12, seed=5)
        assert np.all(result.cells > 0.35)
        assert np.all(result.cells < 0.65)

    def test_failures_recorded_as_nan_with_reason(self, monkeypatch):
        calls = {}

        def explode(params, encoding, task, shift, seed, ridge="auto", dt=None):
            if encoding.i_dc == 8.0:
                raise RuntimeError("boom")
            return real(params, encoding, task, shift, seed, ridge)

        real = sweep_module.run_pipeline
        monkeypatch.setattr(sweep_module, "run_pipeline", explode)
        fm = FieldMap(field_grid=(447.0,), base=DEFAULT_PARAMS)
        result = map_rms(fm, [7.0, 8.0], SMALL_TASK, DEFAULT_ENCODING, 12, seed=5)
        assert math.isnan(result.cells[0, 1])
        assert "RuntimeError: boom" == result.reason_at(0, 1)
        assert not math.isnan(result.cells[0, 0])
        assert result.reason_at(0, 0) is None

    def test_best_cell_of_default_grid(self):
        fm = FieldMap(field_grid=tuple(DEFAULT_FIELD_GRID), base=DEFAULT_PARAMS)
        result = map_rms(fm, DEFAULT_I_DC_GRID, DEFAULT_TASK, DEFAULT_ENCODING,
                         12, seed=5)
        assert np.nanmin(result.cells) < 0.25


class TestCurves:
    def test_theta_curve_deterministic(self):
        grid = [5e-8, 1e-7]
        a = theta_curve(DEFAULT_PARAMS, DEFAULT_ENCODING, SMALL_TASK, grid,
                        "half_tau", seed=3)
        b = theta_curve(DEFAULT_PARAMS, DEFAULT_ENCODING, SMALL_TASK, grid,
                        "half_tau", seed=3)
        assert a.series == b.series
        assert a.x == grid
        assert a.meta["n_theta"] == 24

    def test_theta_curve_cells_are_subset_stable(self):
        pair = theta_curve(DEFAULT_PARAMS, DEFAULT_ENCODING, SMALL_TASK,
                           [5e-8, 1e-7], "half_tau", seed=3)
        single = theta_curve(DEFAULT_PARAMS, DEFAULT_ENCODING, SMALL_TASK,
                             [1e-7], "half_tau", seed=3)
        assert pair.series["half_tau"][1] == single.series["half_tau"][0]

    def test_theta_curve_rejects_odd_half_tau(self):
        encoding = replace(DEFAULT_ENCODING, n_theta=23)
        with pytest.raises(ConfigError):
            theta_curve(DEFAULT_PARAMS, encoding, SMALL_TASK, [1e-7],
                        "half_tau", seed=3)

    def test_modes_share_underlying_traces(self):
        in_phase = run_pipeline(DEFAULT_PARAMS, DEFAULT_ENCODING, SMALL_TASK,
                                shift=0, seed=17)
        shifted = run_pipeline(DEFAULT_PARAMS, DEFAULT_ENCODING, SMALL_TASK,
                               shift=12, seed=17)
        assert np.array_equal(in_phase.trace.values, shifted.trace.values)

    def test_amplitude_curve_zero_input_near_chance(self):
        task = replace(DEFAULT_TASK, n_symbols=40)
        curve = amplitude_curve(DEFAULT_PARAMS, DEFAULT_ENCODING, task,
                                [0.0], theta=1e-7, shift_mode="half_tau", seed=6)
        value = curve.series["half_tau"][0]
        assert 0.35 < value < 0.65

    def test_amplitude_curve_deterministic(self):
        grid = [3.6, 6.0]
        a = amplitude_curve(DEFAULT_PARAMS, DEFAULT_ENCODING, SMALL_TASK, grid,
                            1e-7, "half_tau", seed=6)
        b = amplitude_curve(DEFAULT_PARAMS, DEFAULT_ENCODING, SMALL_TASK, grid,
                            1e-7, "half_tau", seed=6)
        assert a.series == b.series
        assert len(a.series["half_tau"]) == len(grid)

    def test_amplitude_curve_rejects_negative(self):
        with pytest.raises(ConfigError):
            amplitude_curve(DEFAULT_PARAMS, DEFAULT_ENCODING, SMALL_TASK,
                            [-1.0, 3.0], 1e-7, "half_tau", seed=6)
