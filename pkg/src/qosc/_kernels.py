"""Compiled integration kernels.

Everything here is a plain scalar loop jitted with numba. The kernels are
single-threaded on purpose: bit-identical trajectories are part of the
contract, and parallelism happens one level up, across independent runs
(the kernels release the GIL so a thread pool gets real concurrency).
"""
from __future__ import annotations

import numpy as np
from numba import njit

PI = np.pi


@njit(cache=True, nogil=True)
def rhs_acc(t, q, v, k, a0, wd, pd, eps_den):
    """Acceleration of the nondimensional oscillator.

    q'' = -q - k*v*(s-1)*cos^2(pi*s/2)/max(s^2, eps_den) + a0*sin(wd*t + pd)
    with s = v^2 + q^2 = 2E. The friction factor vanishes exactly on the
    half-integer energy levels (s an odd integer) and for v = 0.
    """
    s = v * v + q * q
    den = s * s
    if den < eps_den:
        den = eps_den
    c = np.cos(0.5 * PI * s)
    a = -q - k * v * (s - 1.0) * c * c / den
    if a0 != 0.0:
        a += a0 * np.sin(wd * t + pd)
    return a


@njit(cache=True, nogil=True)
def rk4_step(t, q, v, dt, k, a0, wd, pd, eps_den):
    """One classic fourth-order Runge-Kutta step of size dt."""
    k1q = v
    k1v = rhs_acc(t, q, v, k, a0, wd, pd, eps_den)
    k2q = v + 0.5 * dt * k1v
    k2v = rhs_acc(t + 0.5 * dt, q + 0.5 * dt * k1q, k2q, k, a0, wd, pd, eps_den)
    k3q = v + 0.5 * dt * k2v
    k3v = rhs_acc(t + 0.5 * dt, q + 0.5 * dt * k2q, k3q, k, a0, wd, pd, eps_den)
    k4q = v + dt * k3v
    k4v = rhs_acc(t + dt, q + dt * k3q, k4q, k, a0, wd, pd, eps_den)
    qn = q + dt * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0
    vn = v + dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
    return qn, vn


@njit(cache=True, nogil=True)
def integrate_record(q0, v0, t0, dt, n_steps, stride, k, a0, wd, pd, eps_den):
    """Fixed-step integration recording every stride-th state.

    Returns (t, q, v, t_fail). The initial state and the final step are
    always recorded. Times are index-based (t0 + i*dt) so repeated runs
    are bit-identical. On a non-finite state the trajectory is truncated
    and t_fail holds the time of the offending step, else t_fail is NaN.
    """
    n_rec = n_steps // stride + 1
    if n_steps % stride != 0:
        n_rec += 1
    ts = np.empty(n_rec)
    qs = np.empty(n_rec)
    vs = np.empty(n_rec)
    ts[0] = t0
    qs[0] = q0
    vs[0] = v0
    q, v = q0, v0
    j = 1
    for i in range(n_steps):
        q, v = rk4_step(t0 + i * dt, q, v, dt, k, a0, wd, pd, eps_den)
        if not (np.isfinite(q) and np.isfinite(v)):
            return ts[:j], qs[:j], vs[:j], t0 + (i + 1) * dt
        if (i + 1) % stride == 0 or i == n_steps - 1:
            ts[j] = t0 + (i + 1) * dt
            qs[j] = q
            vs[j] = v
            j += 1
    return ts[:j], qs[:j], vs[:j], np.nan


@njit(cache=True, nogil=True)
def relax_settle(q0, v0, dt, t_budget, k, eps_den, tol_above, eps_below, window_below):
    """Undriven relaxation until first settling on a level.

    The undriven flow is monotone in energy and cannot cross a level, so
    settling is detected one-sidedly: a level n >= 1 is reached when E
    enters [E_n, E_n + tol_above] from above, the ground level also when
    E enters [E_0 - tol_above, E_0] from below (pumping). A state parked
    just below an excited level (within eps_below, where the escape time
    dwarfs any plateau criterion) settles on that level after lingering
    for window_below time units; this covers collision energies landing
    a rounding error short of a level.

    Returns (n, t_settle), or (-1, t_budget) if the budget runs out.
    """
    q, v = q0, v0
    t = 0.0
    n_steps = int(round(t_budget / dt))
    below_n = -1
    below_t0 = 0.0
    for i in range(n_steps + 1):
        e = 0.5 * (v * v + q * q)
        m = int(np.ceil(e - 1.0))
        if m < 0:
            m = 0
        en = m + 0.5
        if 0.0 <= e - en <= tol_above:
            return m, t
        if m == 0 and 0.0 <= en - e <= tol_above:
            return 0, t
        nb = int(np.floor(e - 0.5)) + 1
        eb = nb + 0.5
        if 0.0 < eb - e <= eps_below:
            if below_n == nb:
                if t - below_t0 >= window_below:
                    return nb, t
            else:
                below_n = nb
                below_t0 = t
        else:
            below_n = -1
        if i == n_steps:
            break
        q, v = rk4_step(t, q, v, dt, k, 0.0, 0.0, 0.0, eps_den)
        t = (i + 1) * dt
    return -1, t


@njit(cache=True, nogil=True)
def depart_time(q0, v0, phi_d, en, dt, t_max, k, a0, wd, eps_den,
                exit_threshold, confirm_depth):
    """Lifetime of a driven plateau at level energy en.

    Departure is the first drop below en - exit_threshold that is later
    confirmed by reaching en - confirm_depth without re-entering the
    threshold band; unconfirmed candidates are jitter and are discarded.
    Returns the candidate time, or -1.0 if censored within t_max.
    """
    q, v = q0, v0
    t = 0.0
    t_cand = -1.0
    n_steps = int(round(t_max / dt))
    for i in range(n_steps):
        q, v = rk4_step(t, q, v, dt, k, a0, wd, phi_d, eps_den)
        t = (i + 1) * dt
        e = 0.5 * (v * v + q * q)
        if t_cand < 0.0:
            if e < en - exit_threshold:
                t_cand = t
        else:
            if e <= en - confirm_depth:
                return t_cand
            if e >= en - exit_threshold:
                t_cand = -1.0
    return -1.0


@njit(cache=True, nogil=True)
def time_to_reach(q0, v0, dt, e_stop, t_budget, k, eps_den):
    """Undriven time until E first drops to e_stop; -1.0 on budget exhaustion."""
    q, v = q0, v0
    t = 0.0
    n_steps = int(round(t_budget / dt))
    for i in range(n_steps):
        q, v = rk4_step(t, q, v, dt, k, 0.0, 0.0, 0.0, eps_den)
        t = (i + 1) * dt
        if 0.5 * (v * v + q * q) <= e_stop:
            return t
    return -1.0
