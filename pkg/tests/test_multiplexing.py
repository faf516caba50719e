import math
from dataclasses import replace

import numpy as np
import pytest

from stno_rc import (
    AmplitudeTrace,
    ConfigError,
    DimensionMismatch,
    EncodingConfig,
    Mask,
    OutOfRange,
    POINTS_PER_SYMBOL,
    encode,
    generate_task,
    make_mask,
    prepend_warmup,
    sample_states,
    shift_for_mode,
    simulate,
    waveform_from_symbols,
)
from stno_rc.defaults import DEFAULT_ENCODING, DEFAULT_PARAMS

HALF_SQRT2 = math.sqrt(0.5)
SINE_EXPECTED = (0.0, HALF_SQRT2, 1.0, HALF_SQRT2, 0.0, -HALF_SQRT2, -1.0, -HALF_SQRT2)


class TestTask:
    def test_single_sine_points(self):
        wf = waveform_from_symbols([0])
        assert tuple(wf.points) == SINE_EXPECTED
        assert np.all(wf.labels == 0)

    def test_single_square_points(self):
        wf = waveform_from_symbols([1])
        assert tuple(wf.points) == (1.0,) * 4 + (-1.0,) * 4
        assert np.all(wf.labels == 1)

    def test_eighty_symbols_has_640_points(self):
        wf = generate_task(80, seed=11)
        assert wf.n_points == 640
        assert len(wf.labels) == 640
        assert wf.n_symbols == 80

    def test_extrema_are_ambiguous_without_memory(self):
        sine = waveform_from_symbols([0])
        square = waveform_from_symbols([1])
        assert sine.points[2] == 1.0 == square.points[0]
        assert sine.points[6] == -1.0 == square.points[4]

    def test_deterministic_and_both_classes(self):
        a = generate_task(200, seed=4)
        b = generate_task(200, seed=4)
        assert np.array_equal(a.symbols, b.symbols)
        assert set(np.unique(a.symbols)) == {0, 1}

    def test_rejects_empty_task(self):
        with pytest.raises(ConfigError):
            generate_task(0, seed=1)


class TestMask:
    def test_two_entry_masks(self):
        for seed in range(8):
            entries = tuple(make_mask(2, seed).entries)
            assert entries in ((1.0, -1.0), (-1.0, 1.0))

    def test_deterministic(self):
        assert np.array_equal(make_mask(24, 7).entries, make_mask(24, 7).entries)

    def test_24_entries_both_signs(self):
        mask = make_mask(24, seed=3)
        assert len(mask) == 24
        assert mask.entries.min() == -1.0 and mask.entries.max() == 1.0

    def test_rejects_single_neuron(self):
        with pytest.raises(ConfigError):
            make_mask(1, seed=0)

    def test_type_invariants(self):
        with pytest.raises(ConfigError):
            Mask(entries=np.array([1.0, 0.5]))
        with pytest.raises(ConfigError):
            Mask(entries=np.array([1.0, 1.0]))
        Mask(entries=np.array([1.0, 1.0]), allow_degenerate=True)
        Mask(entries=np.array([1.0]))  # single entry is allowed


class TestEncodingConfig:
    def test_tau_is_exact_product(self):
        cfg = EncodingConfig(n_theta=24, theta=1e-7, i_dc=7.0, a_in=6.0)
        assert cfg.tau == 24 * 1e-7

    @pytest.mark.parametrize("bad", [dict(n_theta=0), dict(theta=0.0),
                                     dict(a_in=-1.0)])
    def test_invalid_rejected(self, bad):
        fields = dict(n_theta=24, theta=1e-7, i_dc=7.0, a_in=6.0)
        fields.update(bad)
        with pytest.raises(ConfigError):
            EncodingConfig(**fields)


class TestEncode:
    def test_zero_input_point_stays_at_baseline(self):
        wf = waveform_from_symbols([0])  # first sine point is u = 0
        mask = make_mask(24, seed=2)
        drive = encode(wf, mask, DEFAULT_ENCODING)
        np.testing.assert_array_equal(drive.segments[:24],
                                      np.full(24, DEFAULT_ENCODING.i_dc))

    def test_uniform_mask_gives_constant_segment(self):
        wf = waveform_from_symbols([1])  # first point u = +1
        mask = Mask(entries=np.ones(24), allow_degenerate=True)
        drive = encode(wf, mask, DEFAULT_ENCODING)
        expected = DEFAULT_ENCODING.i_dc + DEFAULT_ENCODING.a_in
        np.testing.assert_array_equal(drive.segments[:24], np.full(24, expected))

    def test_segment_count(self):
        wf = generate_task(80, seed=1)
        drive = encode(wf, make_mask(24, seed=1), DEFAULT_ENCODING)
        assert drive.n_segments == 80 * POINTS_PER_SYMBOL * 24 == 15360

    def test_segment_values_elementwise(self):
        wf = waveform_from_symbols([0, 1])
        mask = make_mask(4, seed=9)
        cfg = EncodingConfig(n_theta=4, theta=1e-7, i_dc=7.0, a_in=6.0)
        drive = encode(wf, mask, cfg)
        for k, u in enumerate(wf.points):
            for i, m in enumerate(mask.entries):
                assert drive.segments[k * 4 + i] == 7.0 + 6.0 * u * m

    def test_mask_length_mismatch(self):
        wf = waveform_from_symbols([0])
        with pytest.raises(DimensionMismatch):
            encode(wf, make_mask(12, seed=1), DEFAULT_ENCODING)

    def test_warmup_prepends_baseline_segment(self):
        wf = waveform_from_symbols([1])
        drive = encode(wf, make_mask(24, seed=1), DEFAULT_ENCODING)
        warmed = prepend_warmup(drive, 24)
        assert warmed.n_segments == drive.n_segments + 24
        np.testing.assert_array_equal(warmed.segments[:24],
                                      np.full(24, drive.baseline))
        np.testing.assert_array_equal(warmed.segments[24:], drive.segments)


def synthetic_trace(n_points, n_theta, spp, theta):
    """Trace whose value at index i is i, covering warm-up plus n_points."""
    n = (n_points + 1) * n_theta * spp + 1
    return AmplitudeTrace(dt=theta / spp, values=np.arange(n, dtype=float))


class TestSampleStates:
    CFG = EncodingConfig(n_theta=6, theta=6e-8, i_dc=7.0, a_in=6.0)

    def test_in_phase_uses_own_segment(self):
        spp = 10
        trace = synthetic_trace(3, 6, spp, self.CFG.theta)
        states = sample_states(trace, self.CFG, n_points=3, shift=0)
        for k in range(3):
            expected = [((k * 6 + i + 6) * spp) - 1 for i in range(1, 7)]
            np.testing.assert_array_equal(states.features[k, :6], expected)
            assert states.features[k, 6] == 1.0

    def test_full_shift_uses_previous_segment(self):
        spp = 10
        trace = synthetic_trace(3, 6, spp, self.CFG.theta)
        shifted = sample_states(trace, self.CFG, n_points=3, shift=6)
        plain = sample_states(trace, self.CFG, n_points=3, shift=0)
        for k in range(1, 3):
            np.testing.assert_array_equal(shifted.features[k, :6],
                                          plain.features[k - 1, :6])

    def test_first_row_with_shift_reads_warmup(self):
        spp = 10
        trace = synthetic_trace(2, 6, spp, self.CFG.theta)
        states = sample_states(trace, self.CFG, n_points=2, shift=6)
        # global sub-intervals <= 0 fall into the warm-up block
        expected = [((i) * spp) - 1 for i in range(1, 7)]
        np.testing.assert_array_equal(states.features[0, :6], expected)

    def test_half_shift_straddles_boundary(self):
        spp = 10
        trace = synthetic_trace(3, 6, spp, self.CFG.theta)
        states = sample_states(trace, self.CFG, n_points=3, shift=3)
        plain = sample_states(trace, self.CFG, n_points=3, shift=0)
        k = 2
        np.testing.assert_array_equal(states.features[k, :3],
                                      plain.features[k - 1, 3:6])
        np.testing.assert_array_equal(states.features[k, 3:6],
                                      plain.features[k, :3])

    def test_index_exact_sampling(self):
        # sample for trace sub-interval j sits at t0 + j*theta - dt
        spp = 12
        trace = synthetic_trace(2, 6, spp, self.CFG.theta)
        states = sample_states(trace, self.CFG, n_points=2, shift=0)
        dt = trace.dt
        for k in range(2):
            for i in range(6):
                j = (k + 1) * 6 + i + 1  # trace sub-interval, 1-indexed
                t_sample = trace.t0 + j * self.CFG.theta - dt
                index = int(round((t_sample - trace.t0) / dt))
                assert states.features[k, i] == trace.values[index]

    def test_too_short_trace_raises(self):
        trace = synthetic_trace(2, 6, 10, self.CFG.theta)
        with pytest.raises(OutOfRange):
            sample_states(trace, self.CFG, n_points=3, shift=0)

    def test_bad_shift_raises(self):
        trace = synthetic_trace(2, 6, 10, self.CFG.theta)
        with pytest.raises(ConfigError):
            sample_states(trace, self.CFG, n_points=2, shift=7)

    def test_incompatible_dt_raises(self):
        trace = AmplitudeTrace(dt=7e-9, values=np.zeros(4000))
        with pytest.raises(ConfigError):
            sample_states(trace, self.CFG, n_points=2, shift=0)


class TestShiftForMode:
    def test_modes(self):
        assert shift_for_mode("in_phase", 24) == 0
        assert shift_for_mode("half_tau", 24) == 12

    def test_half_tau_requires_even(self):
        with pytest.raises(ConfigError):
            shift_for_mode("half_tau", 23)

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            shift_for_mode("quarter", 24)


class TestMemorylessCollapse:
    def test_ambiguous_rows_converge_without_noise(self):
        # relaxation << theta: time-rescaled node settles within every
        # sub-interval, so equal input values give equal feature rows
        params = replace(DEFAULT_PARAMS, gamma_g=DEFAULT_PARAMS.gamma_g * 100,
                         sigma=DEFAULT_PARAMS.sigma * 100, noise_d=0.0)
        wf = waveform_from_symbols([0, 1])
        mask = make_mask(24, seed=5)
        drive = prepend_warmup(encode(wf, mask, DEFAULT_ENCODING), 24)
        trace = simulate(params, drive, dt=DEFAULT_ENCODING.theta / 2000, seed=0)
        states = sample_states(trace, DEFAULT_ENCODING, wf.n_points, shift=0)
        sine_k2 = states.features[2]
        square_k0 = states.features[8]
        # exponentially decayed sub-threshold remnants (<< nV on a ~20 mV
        # scale) keep infinite memory at exactly zero noise; collapse is
        # asserted at physical resolution
        np.testing.assert_allclose(sine_k2, square_k0, atol=1e-4)
