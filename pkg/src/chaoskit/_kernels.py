"""Hot numeric loops: right-hand sides, steppers, event localization, exponent loops.

Every function here is compiled with numba when it is importable; setting
``CHAOS_NO_NUMBA=1`` (or ``true``/``yes``/``on``) in the environment before
import forces the plain-Python fallback, which runs the identical code paths
through the interpreter.  Kernels take the system as a packed float64 vector
(see layout constants below) so the same machine code serves every form and
preset without boxing.
"""

import math
import os

import numpy as np


def _env_flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


NUMBA_DISABLED = _env_flag("CHAOS_NO_NUMBA")
NUMBA_ENABLED = False
if not NUMBA_DISABLED:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a hard dependency
        pass


def _jit(fn):
    if NUMBA_ENABLED:
        return _njit(cache=True, nogil=True)(fn)
    return fn


# Packed-spec layout.  FORM: 0 = A1, 1 = A2, 2 = B.  G_KIND: 0 = zero,
# 1 = linear, 2 = cubic, 3 = sine.  EPS_KIND: 0 = zero, 1 = constant,
# 2 = power law.  N is stored as a float but always holds an integer.
FORM = 0
ALPHA = 1
BETA = 2
GAMMA = 3
DELTA = 4
OMEGA = 5
Q = 6
N = 7
G_KIND = 8
G_K = 9
G_W = 10
EPS_KIND = 11
EPS_C = 12
EPS_P = 13
NPACKED = 14

# Run status codes shared with the integrator layer.
OK = 0
DIVERGED = 1
STEP_FAILURE = 2
DEGENERATE = 3


@_jit
def g_value(u, P):
    """Restoring force g(u) for the packed preset."""
    kind = int(P[G_KIND])
    if kind == 1:
        return P[G_K] * u
    if kind == 2:
        return P[G_K] * u * u * u
    if kind == 3:
        return P[G_K] * math.sin(P[G_W] * u)
    return 0.0


@_jit
def g_slope(u, P):
    """Derivative g'(u) for the packed preset."""
    kind = int(P[G_KIND])
    if kind == 1:
        return P[G_K]
    if kind == 2:
        return 3.0 * P[G_K] * u * u
    if kind == 3:
        return P[G_K] * P[G_W] * math.cos(P[G_W] * u)
    return 0.0


@_jit
def eps_value(t, P):
    """Regularization coefficient at time t."""
    kind = int(P[EPS_KIND])
    if kind == 1:
        return P[EPS_C]
    if kind == 2:
        return P[EPS_C] / t ** P[EPS_P]
    return 0.0


@_jit
def rhs(t, x, v, P):
    """Acceleration x'' for the packed system at state (t, x, v).

    Parameters
    ----------
    t, x, v : float
        Time, position, velocity.
    P : float64[:]
        Packed system vector (see module layout constants).

    Returns
    -------
    float
        The acceleration.  Singular times yield inf/NaN rather than raising;
        wrappers decide how to report those.
    """
    form = int(P[FORM])
    if form == 2:
        n = int(P[N])
        return -(
            P[ALPHA] * v
            + P[BETA] * x
            + P[GAMMA] * P[DELTA] * math.sin(P[OMEGA] * t) * x**n
            + eps_value(t, P)
        )
    tq = t ** P[Q]
    coup = P[GAMMA] + P[BETA] / tq
    if form == 0:
        u = x + coup * v
        return -(
            P[ALPHA] / tq * v
            + g_value(u, P)
            + eps_value(t, P) * x
            + P[DELTA] * math.sin(P[OMEGA] * x)
        )
    return -(
        P[ALPHA] / tq * v
        + g_value(x, P)
        + coup * v
        + eps_value(t, P) * x
        + P[DELTA] * math.sin(P[OMEGA] * x)
    )


@_jit
def rhs_tangent(t, x, v, dx, dv, P):
    """Directional derivative of rhs along (dx, dv) at state (t, x, v)."""
    form = int(P[FORM])
    if form == 2:
        n = int(P[N])
        ax = -(P[BETA] + P[GAMMA] * P[DELTA] * math.sin(P[OMEGA] * t) * n * x ** (n - 1))
        return ax * dx - P[ALPHA] * dv
    eps = eps_value(t, P)
    tq = t ** P[Q]
    coup = P[GAMMA] + P[BETA] / tq
    force_x = P[DELTA] * P[OMEGA] * math.cos(P[OMEGA] * x)
    if form == 0:
        gp = g_slope(x + coup * v, P)
        return -((gp + eps + force_x) * dx + (P[ALPHA] / tq + gp * coup) * dv)
    gp = g_slope(x, P)
    return -((gp + eps + force_x) * dx + (P[ALPHA] / tq + coup) * dv)


@_jit
def rhs_array(ts, xs, vs, P):
    """Vectorized rhs over parallel sample arrays."""
    out = np.empty_like(ts)
    for i in range(ts.shape[0]):
        out[i] = rhs(ts[i], xs[i], vs[i], P)
    return out


@_jit
def rk4_step(t, x, v, h, P):
    """One classical RK4 step of size h; returns (x, v) at t + h."""
    a1 = rhs(t, x, v, P)
    x2 = x + 0.5 * h * v
    v2 = v + 0.5 * h * a1
    a2 = rhs(t + 0.5 * h, x2, v2, P)
    x3 = x + 0.5 * h * v2
    v3 = v + 0.5 * h * a2
    a3 = rhs(t + 0.5 * h, x3, v3, P)
    x4 = x + h * v3
    v4 = v + h * a3
    a4 = rhs(t + h, x4, v4, P)
    xn = x + h * (v + 2.0 * v2 + 2.0 * v3 + v4) / 6.0
    vn = v + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
    return xn, vn


@_jit
def rk4_tangent_step(t, x, v, ux, uv, h, P):
    """One RK4 step of the trajectory with its tangent vector (ux, uv) attached."""
    a1 = rhs(t, x, v, P)
    b1 = rhs_tangent(t, x, v, ux, uv, P)
    x2 = x + 0.5 * h * v
    v2 = v + 0.5 * h * a1
    p2 = ux + 0.5 * h * uv
    q2 = uv + 0.5 * h * b1
    a2 = rhs(t + 0.5 * h, x2, v2, P)
    b2 = rhs_tangent(t + 0.5 * h, x2, v2, p2, q2, P)
    x3 = x + 0.5 * h * v2
    v3 = v + 0.5 * h * a2
    p3 = ux + 0.5 * h * q2
    q3 = uv + 0.5 * h * b2
    a3 = rhs(t + 0.5 * h, x3, v3, P)
    b3 = rhs_tangent(t + 0.5 * h, x3, v3, p3, q3, P)
    x4 = x + h * v3
    v4 = v + h * a3
    p4 = ux + h * q3
    q4 = uv + h * b3
    a4 = rhs(t + h, x4, v4, P)
    b4 = rhs_tangent(t + h, x4, v4, p4, q4, P)
    xn = x + h * (v + 2.0 * v2 + 2.0 * v3 + v4) / 6.0
    vn = v + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
    un = ux + h * (uv + 2.0 * q2 + 2.0 * q3 + q4) / 6.0
    wn = uv + h * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0
    return xn, vn, un, wn


@_jit
def _bad(x, v, blowup):
    return (
        not math.isfinite(x)
        or not math.isfinite(v)
        or abs(x) > blowup
        or abs(v) > blowup
    )


@_jit
def rk4_trajectory(P, t0, x0, v0, h, n_steps, sample_every, blowup, out_t, out_x, out_v):
    """Fixed-step RK4 run on the uniform grid t0 + i*h, i = 0..n_steps.

    Samples every ``sample_every``-th step plus the final state into the
    preallocated output arrays.  Returns ``(status, n_samples, fail_t)``.
    """
    t = t0
    x = x0
    v = v0
    out_t[0] = t
    out_x[0] = x
    out_v[0] = v
    if _bad(x, v, blowup):
        return DIVERGED, 1, t
    m = 1
    for i in range(n_steps):
        x, v = rk4_step(t, x, v, h, P)
        t = t0 + (i + 1) * h
        if _bad(x, v, blowup):
            return DIVERGED, m, t
        if (i + 1) % sample_every == 0 or i == n_steps - 1:
            out_t[m] = t
            out_x[m] = x
            out_v[m] = v
            m += 1
    return OK, m, 0.0


@_jit
def rkf45_trajectory(P, t0, x0, v0, t_end, h0, atol, rtol, sample_every, blowup, h_min):
    """Adaptive Fehlberg 4(5) run from t0 to t_end.

    Step control: per-component tolerance atol + rtol*|y|, acceptance when the
    worst error ratio is <= 1, growth factor 0.9*ratio^(-1/5) clamped to
    [0.2, 5].  The fifth-order solution is propagated.  Returns
    ``(status, t, x, v, fail_t)`` with sample arrays trimmed to length.
    """
    cap = 4096
    ts = np.empty(cap)
    xs = np.empty(cap)
    vs = np.empty(cap)
    t = t0
    x = x0
    v = v0
    ts[0] = t
    xs[0] = x
    vs[0] = v
    m = 1
    if _bad(x, v, blowup):
        return DIVERGED, ts[:m], xs[:m], vs[:m], t
    h = h0
    accepted = 0
    while t < t_end:
        last = h >= t_end - t
        if last:
            h = t_end - t
        k1x = v
        k1v = rhs(t, x, v, P)
        x2 = x + h * 0.25 * k1x
        v2 = v + h * 0.25 * k1v
        k2x = v2
        k2v = rhs(t + 0.25 * h, x2, v2, P)
        x3 = x + h * (3.0 / 32.0 * k1x + 9.0 / 32.0 * k2x)
        v3 = v + h * (3.0 / 32.0 * k1v + 9.0 / 32.0 * k2v)
        k3x = v3
        k3v = rhs(t + 0.375 * h, x3, v3, P)
        x4 = x + h * (1932.0 / 2197.0 * k1x - 7200.0 / 2197.0 * k2x + 7296.0 / 2197.0 * k3x)
        v4 = v + h * (1932.0 / 2197.0 * k1v - 7200.0 / 2197.0 * k2v + 7296.0 / 2197.0 * k3v)
        k4x = v4
        k4v = rhs(t + 12.0 / 13.0 * h, x4, v4, P)
        x5 = x + h * (
            439.0 / 216.0 * k1x - 8.0 * k2x + 3680.0 / 513.0 * k3x - 845.0 / 4104.0 * k4x
        )
        v5 = v + h * (
            439.0 / 216.0 * k1v - 8.0 * k2v + 3680.0 / 513.0 * k3v - 845.0 / 4104.0 * k4v
        )
        k5x = v5
        k5v = rhs(t + h, x5, v5, P)
        x6 = x + h * (
            -8.0 / 27.0 * k1x
            + 2.0 * k2x
            - 3544.0 / 2565.0 * k3x
            + 1859.0 / 4104.0 * k4x
            - 11.0 / 40.0 * k5x
        )
        v6 = v + h * (
            -8.0 / 27.0 * k1v
            + 2.0 * k2v
            - 3544.0 / 2565.0 * k3v
            + 1859.0 / 4104.0 * k4v
            - 11.0 / 40.0 * k5v
        )
        k6x = v6
        k6v = rhs(t + 0.5 * h, x6, v6, P)
        xn = x + h * (
            16.0 / 135.0 * k1x
            + 6656.0 / 12825.0 * k3x
            + 28561.0 / 56430.0 * k4x
            - 9.0 / 50.0 * k5x
            + 2.0 / 55.0 * k6x
        )
        vn = v + h * (
            16.0 / 135.0 * k1v
            + 6656.0 / 12825.0 * k3v
            + 28561.0 / 56430.0 * k4v
            - 9.0 / 50.0 * k5v
            + 2.0 / 55.0 * k6v
        )
        ex = h * (
            1.0 / 360.0 * k1x
            - 128.0 / 4275.0 * k3x
            - 2197.0 / 75240.0 * k4x
            + 1.0 / 50.0 * k5x
            + 2.0 / 55.0 * k6x
        )
        ev = h * (
            1.0 / 360.0 * k1v
            - 128.0 / 4275.0 * k3v
            - 2197.0 / 75240.0 * k4v
            + 1.0 / 50.0 * k5v
            + 2.0 / 55.0 * k6v
        )
        ok = math.isfinite(xn) and math.isfinite(vn) and math.isfinite(ex) and math.isfinite(ev)
        if ok:
            tol_x = atol + rtol * max(abs(x), abs(xn))
            tol_v = atol + rtol * max(abs(v), abs(vn))
            ratio = max(abs(ex) / tol_x, abs(ev) / tol_v)
        else:
            ratio = 2.0
        if ratio <= 1.0:
            t = t_end if last else t + h
            x = xn
            v = vn
            accepted += 1
            if abs(x) > blowup or abs(v) > blowup:
                return DIVERGED, ts[:m], xs[:m], vs[:m], t
            if accepted % sample_every == 0 or t >= t_end:
                if m == cap:
                    cap2 = cap * 2
                    ts2 = np.empty(cap2)
                    xs2 = np.empty(cap2)
                    vs2 = np.empty(cap2)
                    ts2[:cap] = ts
                    xs2[:cap] = xs
                    vs2[:cap] = vs
                    ts = ts2
                    xs = xs2
                    vs = vs2
                    cap = cap2
                ts[m] = t
                xs[m] = x
                vs[m] = v
                m += 1
            if ratio > 0.0:
                fac = 0.9 * ratio ** -0.2
            else:
                fac = 5.0
            h = h * min(5.0, max(0.2, fac))
        else:
            h = h * max(0.2, 0.9 * ratio ** -0.2)
            if h < h_min:
                return STEP_FAILURE, ts[:m], xs[:m], vs[:m], t
    return OK, ts[:m], xs[:m], vs[:m], 0.0


@_jit
def rk4_events_strobo(
    P,
    t0,
    x0,
    v0,
    h,
    n_steps,
    sample_every,
    blowup,
    period,
    phase,
    out_t,
    out_x,
    out_v,
    ev_t,
    ev_x,
    ev_v,
):
    """RK4 run that also records the state at times phase + k*period.

    Each event state is reached by a single RK4 substep from the grid point
    on its left, so event times are exact (no interpolation error in t).
    Returns ``(status, n_samples, n_events, fail_t)``.
    """
    t = t0
    x = x0
    v = v0
    out_t[0] = t
    out_x[0] = x
    out_v[0] = v
    if _bad(x, v, blowup):
        return DIVERGED, 1, 0, t
    m = 1
    ne = 0
    tiny = 1e-9 * period
    k = int(math.ceil((t0 - phase) / period - 1e-9))
    te = phase + k * period
    if te <= t0 + tiny:
        if te >= t0 - tiny:
            ev_t[ne] = te
            ev_x[ne] = x
            ev_v[ne] = v
            ne += 1
        k += 1
        te = phase + k * period
    for i in range(n_steps):
        t_next = t0 + (i + 1) * h
        while te <= t_next + 1e-9 * h:
            xe, ve = rk4_step(t, x, v, te - t, P)
            ev_t[ne] = te
            ev_x[ne] = xe
            ev_v[ne] = ve
            ne += 1
            k += 1
            te = phase + k * period
        x, v = rk4_step(t, x, v, h, P)
        t = t_next
        if _bad(x, v, blowup):
            return DIVERGED, m, ne, t
        if (i + 1) % sample_every == 0 or i == n_steps - 1:
            out_t[m] = t
            out_x[m] = x
            out_v[m] = v
            m += 1
    return OK, m, ne, 0.0


@_jit
def rk4_events_vzero(
    P,
    t0,
    x0,
    v0,
    h,
    n_steps,
    sample_every,
    blowup,
    direction,
    out_t,
    out_x,
    out_v,
    ev_t,
    ev_x,
    ev_v,
):
    """RK4 run recording zero crossings of the velocity.

    direction: +1 rising (v goes - to +), -1 falling, 0 either.  A candidate
    time comes from linear interpolation across the bracketing step followed
    by one secant refinement; the state there is an RK4 substep from the left
    grid point.  Events closer than one step to the previous one are dropped.
    Grid points with v exactly zero count, classified by the acceleration.
    Returns ``(status, n_samples, n_events, fail_t)``.
    """
    t = t0
    x = x0
    v = v0
    out_t[0] = t
    out_x[0] = x
    out_v[0] = v
    if _bad(x, v, blowup):
        return DIVERGED, 1, 0, t
    m = 1
    ne = 0
    last_ev = t0 - 2.0 * h
    if v == 0.0:
        a0 = rhs(t, x, v, P)
        if direction == 0 or (direction > 0 and a0 > 0.0) or (direction < 0 and a0 < 0.0):
            ev_t[ne] = t
            ev_x[ne] = x
            ev_v[ne] = 0.0
            ne += 1
            last_ev = t
    for i in range(n_steps):
        t_prev = t
        x_prev = x
        v_prev = v
        x, v = rk4_step(t, x, v, h, P)
        t = t0 + (i + 1) * h
        if _bad(x, v, blowup):
            return DIVERGED, m, ne, t
        if v_prev * v < 0.0:
            hit = direction == 0 or (direction > 0 and v_prev < 0.0) or (direction < 0 and v_prev > 0.0)
            if hit:
                tau = t_prev + h * v_prev / (v_prev - v)
                xe, ve = rk4_step(t_prev, x_prev, v_prev, tau - t_prev, P)
                if ve != v_prev:
                    tau2 = tau - ve * (tau - t_prev) / (ve - v_prev)
                else:
                    tau2 = tau
                if tau2 < t_prev:
                    tau2 = t_prev
                elif tau2 > t:
                    tau2 = t
                xe, ve = rk4_step(t_prev, x_prev, v_prev, tau2 - t_prev, P)
                if tau2 - last_ev >= h:
                    ev_t[ne] = tau2
                    ev_x[ne] = xe
                    ev_v[ne] = ve
                    ne += 1
                    last_ev = tau2
        elif v == 0.0 and v_prev != 0.0:
            a = rhs(t, x, v, P)
            hit = direction == 0 or (direction > 0 and a > 0.0) or (direction < 0 and a < 0.0)
            if hit and t - last_ev >= h:
                ev_t[ne] = t
                ev_x[ne] = x
                ev_v[ne] = 0.0
                ne += 1
                last_ev = t
        if (i + 1) % sample_every == 0 or i == n_steps - 1:
            out_t[m] = t
            out_x[m] = x
            out_v[m] = v
            m += 1
    return OK, m, ne, 0.0


@_jit
def benettin(
    P,
    t0,
    x0,
    v0,
    h,
    n_steps,
    renorm_every,
    transient_steps,
    d0,
    blowup,
    conv_t,
    conv_lam,
):
    """Largest-exponent estimate from a reference/companion trajectory pair.

    The companion starts offset by d0 in x.  Every ``renorm_every`` steps the
    phase-space separation d is measured, log(d/d0) is accumulated once the
    transient has passed, and the companion is pulled back to distance d0
    along the current separation direction.  conv_t/conv_lam receive the
    running estimate at each post-transient epoch.  Returns
    ``(status, lam, n_conv, fail_t, acc_start_t)``.
    """
    t = t0
    x1 = x0
    v1 = v0
    x2 = x0 + d0
    v2 = v0
    if _bad(x1, v1, blowup):
        return DIVERGED, 0.0, 0, t, t0
    sum_logs = 0.0
    nconv = 0
    acc = transient_steps == 0
    t_acc = t0
    for i in range(n_steps):
        x1, v1 = rk4_step(t, x1, v1, h, P)
        x2, v2 = rk4_step(t, x2, v2, h, P)
        t = t0 + (i + 1) * h
        if _bad(x1, v1, blowup) or _bad(x2, v2, blowup):
            return DIVERGED, 0.0, nconv, t, t_acc
        if (i + 1) % renorm_every == 0 or i == n_steps - 1:
            dx = x2 - x1
            dv = v2 - v1
            d = math.sqrt(dx * dx + dv * dv)
            if d == 0.0:
                return DEGENERATE, 0.0, nconv, t, t_acc
            if acc:
                sum_logs += math.log(d / d0)
                conv_t[nconv] = t
                conv_lam[nconv] = sum_logs / (t - t_acc)
                nconv += 1
            elif (i + 1) >= transient_steps:
                acc = True
                t_acc = t
            s = d0 / d
            x2 = x1 + dx * s
            v2 = v1 + dv * s
    lam = conv_lam[nconv - 1] if nconv > 0 else 0.0
    return OK, lam, nconv, 0.0, t_acc


@_jit
def variational(
    P,
    t0,
    x0,
    v0,
    ux0,
    uv0,
    h,
    n_steps,
    renorm_every,
    transient_steps,
    blowup,
    conv_t,
    conv_lam,
):
    """Largest-exponent estimate from the linearized (tangent) flow.

    Integrates the trajectory together with a tangent vector, accumulating
    log growth of the tangent norm at each renormalization epoch after the
    transient.  Returns ``(status, lam, n_conv, fail_t, acc_start_t)``.
    """
    t = t0
    x = x0
    v = v0
    nrm = math.sqrt(ux0 * ux0 + uv0 * uv0)
    ux = ux0 / nrm
    uv = uv0 / nrm
    if _bad(x, v, blowup):
        return DIVERGED, 0.0, 0, t, t0
    sum_logs = 0.0
    nconv = 0
    acc = transient_steps == 0
    t_acc = t0
    for i in range(n_steps):
        x, v, ux, uv = rk4_tangent_step(t, x, v, ux, uv, h, P)
        t = t0 + (i + 1) * h
        if _bad(x, v, blowup):
            return DIVERGED, 0.0, nconv, t, t_acc
        if not (math.isfinite(ux) and math.isfinite(uv)):
            return STEP_FAILURE, 0.0, nconv, t, t_acc
        if (i + 1) % renorm_every == 0 or i == n_steps - 1:
            g = math.sqrt(ux * ux + uv * uv)
            if g == 0.0:
                return DEGENERATE, 0.0, nconv, t, t_acc
            if acc:
                sum_logs += math.log(g)
                conv_t[nconv] = t
                conv_lam[nconv] = sum_logs / (t - t_acc)
                nconv += 1
            elif (i + 1) >= transient_steps:
                acc = True
                t_acc = t
            ux /= g
            uv /= g
    lam = conv_lam[nconv - 1] if nconv > 0 else 0.0
    return OK, lam, nconv, 0.0, t_acc
