"""Compiled inner loop of the stochastic amplitude integrator."""

import math

from numba import njit


@njit(cache=True, nogil=True)
def em_piecewise(p_start, currents, steps_per_seg, dt, gamma_g, q_nl, sigma,
                 noise_d, dw, step_offset, out):
    """Advance the Euler-Maruyama recursion over one chunk of global steps.

    ``out[g + 1]`` receives the power after global step ``g``; ``out[0]`` is
    the caller's initial condition.  ``currents`` holds one drive value per
    sub-interval of ``steps_per_seg`` steps.  The arithmetic here must stay in
    sync with ``oscillator.step``.
    """
    p = p_start
    for i in range(dw.shape[0]):
        g = step_offset + i
        i_now = currents[g // steps_per_seg]
        d = (-2.0 * gamma_g * (1.0 + q_nl * p) * p
             + 2.0 * sigma * i_now * (1.0 - p) * p
             + noise_d)
        p = p + d * dt + math.sqrt(2.0 * noise_d * p) * dw[i]
        if p < 0.0:
            p = 0.0
        elif p > 1.0:
            p = 1.0
        out[g + 1] = p
    return p
