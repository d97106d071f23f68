"""Trajectory integration: fixed-step RK4, adaptive RKF45, event recording.

RK4 runs on the uniform grid obtained by snapping dt so that an integer
number of steps lands exactly on t_end.  RKF45 adapts its step from the
paired fourth/fifth-order error estimate.  Divergence (|x| or |v| beyond the
blowup threshold, or a non-finite value) and step-size underflow are reported
through the trajectory status, not as exceptions, so sweeps can treat escape
as data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import ValidationError
from .model import State, SystemSpec, _check_time, pack_spec, validate

COMPLETED = "completed"
DIVERGED = "diverged"
STEP_FAILURE = "step_failure"

_STATUS_NAMES = {_k.OK: COMPLETED, _k.DIVERGED: DIVERGED, _k.STEP_FAILURE: STEP_FAILURE}

METHODS = ("rk4", "rkf45")


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    dt is the RK4 grid step and the initial RKF45 step.  Tolerances apply to
    RKF45 only.  sample_every keeps every k-th accepted point (the initial
    and final states are always kept).  A trajectory whose |x| or |v| exceeds
    blowup_threshold is marked diverged.
    """

    method: str = "rk4"
    dt: float = 1e-3
    t_end: float = 100.0
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    sample_every: int = 1
    blowup_threshold: float = 1e8

    def __post_init__(self):
        msgs = []
        if self.method not in METHODS:
            msgs.append(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.dt > 0.0:
            msgs.append(f"dt must be > 0, got {self.dt}")
        if not self.abs_tol > 0.0:
            msgs.append(f"abs_tol must be > 0, got {self.abs_tol}")
        if not self.rel_tol > 0.0:
            msgs.append(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.sample_every < 1:
            msgs.append(f"sample_every must be >= 1, got {self.sample_every}")
        if not self.blowup_threshold > 0.0:
            msgs.append(f"blowup_threshold must be > 0, got {self.blowup_threshold}")
        if msgs:
            raise ValidationError(msgs)


@dataclass(frozen=True)
class Stroboscopic:
    """Record the state at times phase + k*period."""

    period: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.period > 0.0:
            raise ValidationError([f"stroboscopic period must be > 0, got {self.period}"])


@dataclass(frozen=True)
class VelocityZeroCrossing:
    """Record states where the velocity crosses zero.

    direction: "rising" (v goes negative to positive), "falling", or "any".
    """

    direction: str = "any"

    def __post_init__(self):
        if self.direction not in ("rising", "falling", "any"):
            raise ValidationError(
                [f"direction must be rising, falling or any, got {self.direction!r}"]
            )


@dataclass(frozen=True)
class EventRecord:
    """Event hits as parallel arrays (times strictly increasing)."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution with its termination status.

    status is one of "completed", "diverged", "step_failure"; for the latter
    two, status_time records when the run stopped and the samples end at the
    last admissible state.
    """

    spec: SystemSpec
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    status: str
    status_time: float | None = None

    def __len__(self):
        return len(self.t)

    @property
    def final(self) -> State:
        return State(float(self.t[-1]), float(self.x[-1]), float(self.v[-1]))


def grid_steps(t0: float, t_end: float, dt: float) -> tuple[int, float]:
    """Snap dt to the span: the largest n with span/n >= dt (at least 1)."""
    span = t_end - t0
    n = max(1, int(math.ceil(span / dt - 1e-9)))
    return n, span / n


def _check_run(spec, initial, cfg):
    _check_time(spec, initial.t)
    validate(spec)
    if not cfg.dt < cfg.t_end - initial.t:
        raise ValidationError(
            [f"dt = {cfg.dt} must be smaller than the span t_end - t0 = {cfg.t_end - initial.t}"]
        )


def integrate(spec: SystemSpec, initial: State, cfg: IntegratorConfig) -> Trajectory:
    """Integrate from the initial state to cfg.t_end.

    The first sample is the initial state and, for a completed run, the last
    sample sits exactly at t_end.  Divergence at the initial state itself is
    reported as a diverged trajectory holding that single sample.
    """
    _check_run(spec, initial, cfg)
    P = pack_spec(spec)
    if cfg.method == "rk4":
        n, h = grid_steps(initial.t, cfg.t_end, cfg.dt)
        nalloc = n // cfg.sample_every + 3
        out_t = np.empty(nalloc)
        out_x = np.empty(nalloc)
        out_v = np.empty(nalloc)
        status, m, fail_t = _k.rk4_trajectory(
            P,
            initial.t,
            initial.x,
            initial.v,
            h,
            n,
            cfg.sample_every,
            cfg.blowup_threshold,
            out_t,
            out_x,
            out_v,
        )
        t, x, v = out_t[:m].copy(), out_x[:m].copy(), out_v[:m].copy()
    else:
        status, t, x, v, fail_t = _k.rkf45_trajectory(
            P,
            initial.t,
            initial.x,
            initial.v,
            cfg.t_end,
            cfg.dt,
            cfg.abs_tol,
            cfg.rel_tol,
            cfg.sample_every,
            cfg.blowup_threshold,
            1e-12 * cfg.dt,
        )
        t, x, v = t.copy(), x.copy(), v.copy()
    if status == _k.OK:
        t[-1] = cfg.t_end
    return Trajectory(
        spec,
        t,
        x,
        v,
        _STATUS_NAMES[int(status)],
        None if status == _k.OK else float(fail_t),
    )


_DIRECTIONS = {"rising": 1, "falling": -1, "any": 0}


def integrate_with_events(
    spec: SystemSpec, initial: State, cfg: IntegratorConfig, event
) -> tuple[Trajectory, EventRecord]:
    """Integrate while localizing section events.

    event is a Stroboscopic or VelocityZeroCrossing instance.  Event states
    are reached by an RK4 substep from the grid point to their left, so this
    requires the rk4 method; the adaptive integrator does not carry the
    uniform grid the localization leans on.
    """
    if cfg.method != "rk4":
        raise ValidationError(["event recording requires the rk4 method"])
    _check_run(spec, initial, cfg)
    P = pack_spec(spec)
    n, h = grid_steps(initial.t, cfg.t_end, cfg.dt)
    nalloc = n // cfg.sample_every + 3
    out_t = np.empty(nalloc)
    out_x = np.empty(nalloc)
    out_v = np.empty(nalloc)
    if isinstance(event, Stroboscopic):
        ne_cap = int((cfg.t_end - initial.t) / event.period) + 3
        ev_t = np.empty(ne_cap)
        ev_x = np.empty(ne_cap)
        ev_v = np.empty(ne_cap)
        status, m, ne, fail_t = _k.rk4_events_strobo(
            P,
            initial.t,
            initial.x,
            initial.v,
            h,
            n,
            cfg.sample_every,
            cfg.blowup_threshold,
            event.period,
            event.phase,
            out_t,
            out_x,
            out_v,
            ev_t,
            ev_x,
            ev_v,
        )
    elif isinstance(event, VelocityZeroCrossing):
        ne_cap = n + 2
        ev_t = np.empty(ne_cap)
        ev_x = np.empty(ne_cap)
        ev_v = np.empty(ne_cap)
        status, m, ne, fail_t = _k.rk4_events_vzero(
            P,
            initial.t,
            initial.x,
            initial.v,
            h,
            n,
            cfg.sample_every,
            cfg.blowup_threshold,
            _DIRECTIONS[event.direction],
            out_t,
            out_x,
            out_v,
            ev_t,
            ev_x,
            ev_v,
        )
    else:
        raise TypeError(f"unsupported event type {type(event).__name__}")
    t, x, v = out_t[:m].copy(), out_x[:m].copy(), out_v[:m].copy()
    if status == _k.OK:
        t[-1] = cfg.t_end
    traj = Trajectory(
        spec,
        t,
        x,
        v,
        _STATUS_NAMES[int(status)],
        None if status == _k.OK else float(fail_t),
    )
    events = EventRecord(ev_t[:ne].copy(), ev_x[:ne].copy(), ev_v[:ne].copy())
    return traj, events
