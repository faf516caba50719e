"""Voltage-amplitude dynamics of a current-driven spin-torque oscillator.

The oscillator is reduced to one state variable, the normalized oscillation
power ``p``.  Its deterministic backbone is

    dp/dt = -2*gamma_g*(1 + q_nl*p)*p + 2*sigma*I*(1 - p)*p

whose nonzero fixed point above the threshold current ``i_th = gamma_g/sigma``
is ``p0 = (zeta - 1)/(zeta + q_nl)`` with supercriticality
``zeta = sigma*I/gamma_g``.  Thermal agitation enters as multiplicative noise
``sqrt(2*noise_d*p) dW`` together with the matching pump term ``+noise_d dt``
in the drift; the pump is what additive thermal noise on the underlying
complex oscillation amplitude induces on the power variable, and it keeps the
sub-threshold state on a small fluctuating noise floor instead of letting
``p = 0`` become absorbing.  With ``noise_d = 0`` the dynamics reduce exactly
to the backbone above.

Units: time s, current mA, voltage mV.  The measured envelope is
``V = v_offset + kappa*sqrt(p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from ._kernels import em_piecewise
from .errors import ConfigError, NotOscillating
from .seeding import make_rng

if TYPE_CHECKING:  # pragma: no cover
    from .multiplexing import DriveSignal

_RNG_CHUNK = 1 << 20


@dataclass(frozen=True)
class OscillatorParams:
    """Physical model constants (see module docstring for units)."""

    gamma_g: float          # damping rate (1/s)
    q_nl: float             # dimensionless nonlinear damping coefficient, >= 0
    sigma: float            # current-to-gain conversion (1/(s*mA))
    kappa: float            # power-to-voltage conversion (mV)
    v_offset: float         # additive voltage offset (mV)
    noise_d: float          # diffusion constant (1/s)
    i_th: float = field(init=False)  # derived threshold current (mA)

    def __post_init__(self):
        if not (self.gamma_g > 0):
            raise ConfigError(f"gamma_g must be > 0, got {self.gamma_g}")
        if not (self.sigma > 0):
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")
        if self.kappa < 0:
            raise ConfigError(f"kappa must be >= 0, got {self.kappa}")
        if self.noise_d < 0:
            raise ConfigError(f"noise_d must be >= 0, got {self.noise_d}")
        if self.q_nl < 0:
            raise ConfigError(f"q_nl must be >= 0, got {self.q_nl}")
        object.__setattr__(self, "i_th", self.gamma_g / self.sigma)


@dataclass(frozen=True)
class OscillatorState:
    """Instantaneous normalized power and time."""

    p: float
    t: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ConfigError(f"p must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class AmplitudeTrace:
    """Uniformly sampled envelope V(t); values[0] is the state at t0."""

    dt: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError(f"trace dt must be > 0, got {self.dt}")
        if len(self.values) == 0:
            raise ConfigError("trace must be non-empty")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))


def drift(params: OscillatorParams, p: float, i_now: float) -> float:
    """Deterministic drift of the power variable (thermal pump excluded)."""
    return (-2.0 * params.gamma_g * (1.0 + params.q_nl * p) * p
            + 2.0 * params.sigma * i_now * (1.0 - p) * p)


def drift_slope_bound(params: OscillatorParams, i_lo: float, i_hi: float) -> float:
    """Upper bound of |d(drift)/dp| over p in [0, 1] and I in [i_lo, i_hi].

    The slope is affine in p and in I, so the extremum sits at a corner.
    Used to pick explicit-Euler step sizes that are contractive over the
    whole clamp range.
    """
    if i_hi < i_lo:
        i_lo, i_hi = i_hi, i_lo
    corners = []
    for p in (0.0, 1.0):
        for i in (i_lo, i_hi):
            corners.append(abs(-2.0 * params.gamma_g * (1.0 + 2.0 * params.q_nl * p)
                               + 2.0 * params.sigma * i * (1.0 - 2.0 * p)))
    return max(corners)


def stable_steps(params: OscillatorParams, i_lo: float, i_hi: float,
                 theta: float, min_divisions: int = 20) -> int:
    """Steps per sub-interval for a non-expansive explicit-Euler integration.

    At least ``min_divisions``, and enough that dt * drift_slope_bound <= 1.
    """
    bound = drift_slope_bound(params, i_lo, i_hi)
    return max(min_divisions, int(math.ceil(theta * bound)))


def steady_state_power(params: OscillatorParams, i_dc: float) -> float:
    """Stable fixed point of the deterministic drift at constant current."""
    zeta = params.sigma * i_dc / params.gamma_g
    if zeta <= 1.0:
        return 0.0
    return min((zeta - 1.0) / (zeta + params.q_nl), 1.0)


def steady_state_amplitude(params: OscillatorParams, i_dc: float) -> float:
    """Envelope voltage at the steady state; v_offset below threshold."""
    return params.v_offset + params.kappa * math.sqrt(steady_state_power(params, i_dc))


def step(state: OscillatorState, params: OscillatorParams, i_now: float,
         dt: float, dw: float) -> OscillatorState:
    """One Euler-Maruyama step; p is clamped to [0, 1] afterwards.

    Deterministic given ``dw`` (a Gaussian increment of variance ``dt``).
    """
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    p = (state.p
         + (drift(params, state.p, i_now) + params.noise_d) * dt
         + math.sqrt(2.0 * params.noise_d * state.p) * dw)
    if p < 0.0:
        p = 0.0
    elif p > 1.0:
        p = 1.0
    return OscillatorState(p=p, t=state.t + dt)


def _integrate_constant(params: OscillatorParams, p_init: float, i_dc: float,
                        n_steps: int, dt: float, seed: int = 0) -> np.ndarray:
    """Power trajectory under constant current; powers[0] = p_init."""
    currents = np.array([float(i_dc)])
    powers = np.empty(n_steps + 1)
    powers[0] = p_init
    rng = make_rng(seed) if params.noise_d > 0 else None
    sqrt_dt = math.sqrt(dt)
    p = p_init
    for s0 in range(0, n_steps, _RNG_CHUNK):
        n = min(_RNG_CHUNK, n_steps - s0)
        dw = rng.standard_normal(n) * sqrt_dt if rng is not None else np.zeros(n)
        p = em_piecewise(p, currents, n_steps, dt, params.gamma_g, params.q_nl,
                         params.sigma, params.noise_d, dw, s0, powers)
    return powers


def simulate(params: OscillatorParams, drive: "DriveSignal", dt: float,
             seed: int) -> AmplitudeTrace:
    """Integrate the amplitude SDE over a piecewise-constant drive.

    The initial condition is the deterministic steady state at the drive's
    baseline current.  ``dt`` must divide the drive's sub-interval length
    theta with at least 10 steps per sub-interval.  The returned trace starts
    with the initial state at t0 = 0 and contains one value per integrator
    step; identical (params, drive, dt, seed) give a bit-identical trace.
    """
    theta = drive.theta
    spp = int(round(theta / dt))
    if spp < 10 or abs(theta - spp * dt) > 1e-9 * theta:
        raise ConfigError(
            f"dt = {dt} must divide theta = {theta} with at least 10 steps "
            "per sub-interval")
    currents = np.ascontiguousarray(drive.segments, dtype=np.float64)
    n_steps = len(currents) * spp
    powers = np.empty(n_steps + 1)
    p = steady_state_power(params, drive.baseline)
    powers[0] = p
    rng = make_rng(seed) if params.noise_d > 0 else None
    sqrt_dt = math.sqrt(dt)
    for s0 in range(0, n_steps, _RNG_CHUNK):
        n = min(_RNG_CHUNK, n_steps - s0)
        dw = rng.standard_normal(n) * sqrt_dt if rng is not None else np.zeros(n)
        p = em_piecewise(p, currents, spp, dt, params.gamma_g, params.q_nl,
                         params.sigma, params.noise_d, dw, s0, powers)
    values = params.v_offset + params.kappa * np.sqrt(powers)
    return AmplitudeTrace(dt=dt, values=values, t0=0.0)


def relaxation_time(params: OscillatorParams, i_dc: float) -> float:
    """Exponential recovery time of a small power perturbation at ``i_dc``.

    A 1 % perturbation of the steady state is integrated without noise and
    log|p(t) - p0| is fitted by least squares over the first decade of decay.
    Raises NotOscillating below (or at) the threshold current.
    """
    p0 = steady_state_power(params, i_dc)
    if p0 <= 0.0:
        raise NotOscillating(
            f"i_dc = {i_dc} mA is not above threshold i_th = {params.i_th} mA")
    h = 1e-6 * p0
    lam = (drift(params, p0 + h, i_dc) - drift(params, p0 - h, i_dc)) / (2.0 * h)
    if lam >= 0.0:
        raise NotOscillating(
            f"no attracting oscillating state at i_dc = {i_dc} mA")
    quiet = replace(params, noise_d=0.0)
    bound = drift_slope_bound(quiet, i_dc, i_dc)
    dt = min(0.5 / bound, 0.02 / abs(lam))
    n_steps = int(math.ceil(3.0 / (dt * abs(lam))))
    powers = _integrate_constant(quiet, p0 * 1.01, i_dc, n_steps, dt)
    delta = powers - p0
    inside = np.abs(delta) >= abs(delta[0]) / 10.0
    t = dt * np.arange(n_steps + 1)
    slope = np.polyfit(t[inside], np.log(np.abs(delta[inside])), 1)[0]
    return -1.0 / slope


def nonlinearity(params: OscillatorParams, i_dc: float, h: float) -> float:
    """Curvature d2V/dI2 of the steady-state amplitude (central stencil)."""
    if h <= 0:
        raise ConfigError(f"stencil width h must be > 0, got {h}")
    f = steady_state_amplitude
    return (f(params, i_dc + h) - 2.0 * f(params, i_dc) + f(params, i_dc - h)) / (h * h)


def amplitude_noise(params: OscillatorParams, i_dc: float, duration: float,
                    dt: float, seed: int) -> float:
    """Standard deviation of the envelope in the noisy steady state.

    Starts from the deterministic steady state, discards a warm-up of
    10 relaxation times, and returns the population std of the remaining
    envelope samples.  ``duration`` must cover at least 100 relaxation times.
    """
    relax = relaxation_time(params, i_dc)
    if duration < 100.0 * relax:
        raise ConfigError(
            f"duration = {duration} s must cover at least 100 relaxation "
            f"times (= {100.0 * relax} s)")
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    n_steps = int(round(duration / dt))
    n_warm = int(math.ceil(10.0 * relax / dt))
    powers = _integrate_constant(params, steady_state_power(params, i_dc),
                                 i_dc, n_steps, dt, seed)
    values = params.v_offset + params.kappa * np.sqrt(powers[n_warm + 1:])
    return float(np.std(values))
