"""Stability diagnostics: energy functionals, linearized spectra, exponents.

The energy trace evaluates several candidate Lyapunov functions along a
completed trajectory.  ``V_dot_exact`` is the chain-rule derivative of
V = (v^2 + x^2)/2 and is what actually holds along solutions;
``V_dot_paper`` is the classical dissipation expression obtained after
substituting the equation of motion, kept separate because the two only
agree where the cross terms cancel.  ``V_reg`` adds the running integral of
the regularization so that its derivative stays nonpositive on the regulated
linear system, and ``E`` is the coupling-weighted functional whose decay
tracks the g-coupled forms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import DegenerateSeparation, DivergedTrajectory, NonFinite, SingularTime
from .integrate import COMPLETED, IntegratorConfig, Trajectory, grid_steps
from .model import (
    FORM_B,
    State,
    SystemSpec,
    accel_array,
    pack_spec,
    validate,
    with_param,
)

RENORM_STEPS_DEFAULT = 100
D0_MIN = 1e-10
D0_MAX = 1e-6


@dataclass(frozen=True)
class EnergyTrace:
    """Energy functionals sampled along a trajectory."""

    spec: SystemSpec
    t: np.ndarray
    V: np.ndarray
    V_dot_exact: np.ndarray
    V_dot_paper: np.ndarray
    V_reg: np.ndarray
    E: np.ndarray


def energy_trace(traj: Trajectory) -> EnergyTrace:
    """Evaluate the energy functionals on a completed trajectory."""
    if traj.status != COMPLETED:
        raise ValueError(f"energy trace requires a completed trajectory, got {traj.status!r}")
    spec = traj.spec
    p = spec.params
    t, x, v = traj.t, traj.x, traj.v
    a = accel_array(spec, t, x, v)
    eps = spec.epsilon.value(t)
    if not isinstance(eps, np.ndarray):
        eps = np.full_like(t, eps)
    V = 0.5 * (v * v + x * x)
    V_dot_exact = v * a + x * v
    if spec.form == FORM_B:
        f = p.delta * np.sin(p.omega * t) * x**p.n
        V_dot_paper = -p.alpha * v * v - p.gamma * f * v
        with np.errstate(divide="ignore"):
            coup = p.gamma + p.beta / t**p.q
    else:
        with np.errstate(divide="ignore"):
            tq = t**p.q
            V_dot_paper = -(p.alpha / tq) * v * v - eps * x * x - p.delta * np.sin(p.omega * x) * v
            coup = p.gamma + p.beta / tq
    V_reg = 0.5 * v * v + 0.5 * p.beta * x * x + spec.epsilon.integral(t[0], t)
    g_x = spec.nonlinearity.value(x)
    if not isinstance(g_x, np.ndarray):
        g_x = np.full_like(x, g_x)
    E = 0.5 * (g_x + coup * v) - g_x.min() + 0.5 * eps * x * x + 0.5 * v * v
    return EnergyTrace(spec, t, V, V_dot_exact, V_dot_paper, V_reg, E)


@dataclass(frozen=True)
class EigenReport:
    """Eigenvalues of the linearization about the origin.

    The companion matrix is [[0, 1], [-beta_eff, -alpha_eff]], so the
    eigenvalues solve lam^2 + alpha_eff*lam + beta_eff = 0.  Sorted by
    descending real part, then descending imaginary part.
    """

    spec: SystemSpec
    at_time: float
    alpha_eff: float
    beta_eff: float
    matrix: np.ndarray
    eigenvalues: tuple[complex, complex]
    max_real_part: float


def linearized_eigen(spec: SystemSpec, at_time: float = 1.0) -> EigenReport:
    """Eigenvalues of the flow linearized at x = v = 0.

    Form B is autonomous in its linear part, so alpha_eff = alpha and
    beta_eff = beta.  The A forms carry 1/t^q coefficients; they are frozen
    at ``at_time``, which must be positive.
    """
    validate(spec)
    p = spec.params
    if spec.form == FORM_B:
        a_eff, b_eff = p.alpha, p.beta
    else:
        if at_time <= 0.0:
            raise SingularTime(f"forms A1/A2 must be frozen at a time > 0, got {at_time}")
        P = pack_spec(spec)
        b_eff = -float(_k.rhs_tangent(at_time, 0.0, 0.0, 1.0, 0.0, P))
        a_eff = -float(_k.rhs_tangent(at_time, 0.0, 0.0, 0.0, 1.0, P))
    disc = a_eff * a_eff - 4.0 * b_eff
    root = cmath.sqrt(complex(disc, 0.0))
    l1 = (-a_eff + root) / 2.0
    l2 = (-a_eff - root) / 2.0
    eig = tuple(sorted((l1, l2), key=lambda z: (z.real, z.imag), reverse=True))
    return EigenReport(
        spec=spec,
        at_time=at_time,
        alpha_eff=a_eff,
        beta_eff=b_eff,
        matrix=np.array([[0.0, 1.0], [-b_eff, -a_eff]]),
        eigenvalues=eig,
        max_real_part=max(l1.real, l2.real),
    )


def hopf_scan(
    spec: SystemSpec,
    axis: str,
    lo: float,
    hi: float,
    steps: int = 41,
    at_time: float = 1.0,
    resolution: float = 1e-6,
) -> list[float]:
    """Parameter values where the leading eigenvalue's real part changes sign.

    Scans ``steps`` evenly spaced values of the named parameter, then bisects
    each bracketing pair down to ``resolution``.  Parameter constraints are
    not enforced on scanned values, so axes may sweep through regions a
    strict validate would reject.
    """

    def max_real(val):
        s = with_param(spec, axis, val)
        p = s.params
        if s.form == FORM_B:
            a_eff, b_eff = p.alpha, p.beta
        else:
            P = pack_spec(s)
            b_eff = -float(_k.rhs_tangent(at_time, 0.0, 0.0, 1.0, 0.0, P))
            a_eff = -float(_k.rhs_tangent(at_time, 0.0, 0.0, 0.0, 1.0, P))
        disc = a_eff * a_eff - 4.0 * b_eff
        root = cmath.sqrt(complex(disc, 0.0))
        return max(((-a_eff + root) / 2.0).real, ((-a_eff - root) / 2.0).real)

    if spec.form != FORM_B and at_time <= 0.0:
        raise SingularTime(f"forms A1/A2 must be frozen at a time > 0, got {at_time}")
    values = np.linspace(lo, hi, steps)
    f = [max_real(val) for val in values]
    crossings = [float(values[i]) for i in range(steps) if f[i] == 0.0]
    for i in range(steps - 1):
        if f[i] * f[i + 1] < 0.0:
            a, b = float(values[i]), float(values[i + 1])
            fa = f[i]
            while b - a > resolution:
                mid = 0.5 * (a + b)
                fm = max_real(mid)
                if fm == 0.0:
                    a = b = mid
                    break
                if (fm > 0.0) == (fa > 0.0):
                    a, fa = mid, fm
                else:
                    b = mid
            crossings.append(0.5 * (a + b))
    crossings.sort()
    deduped: list[float] = []
    for c in crossings:
        if not deduped or c - deduped[-1] > resolution:
            deduped.append(c)
    return deduped


@dataclass(frozen=True)
class LyapunovEstimate:
    """Largest-exponent estimate with its convergence history.

    ``convergence`` holds the running estimate at each renormalization epoch
    after the transient; ``lam`` is its final entry.  ``transient_skipped``
    is the time span discarded before accumulation started.
    """

    spec: SystemSpec
    lam: float
    method: str
    transient_skipped: float
    convergence_t: np.ndarray
    convergence: np.ndarray

    def to_dict(self):
        return {
            "lambda": self.lam,
            "method": self.method,
            "transient_skipped": self.transient_skipped,
            "convergence": [
                [float(t), float(l)] for t, l in zip(self.convergence_t, self.convergence)
            ],
        }


def _lyapunov_grid(spec, initial, cfg, renorm_interval, transient_fraction):
    validate(spec)
    if cfg.method != "rk4":
        raise ValueError("exponent estimation runs on the fixed rk4 grid; method must be rk4")
    if not 0.0 <= transient_fraction < 1.0:
        raise ValueError(f"transient_fraction must be in [0, 1), got {transient_fraction}")
    n, h = grid_steps(initial.t, cfg.t_end, cfg.dt)
    if renorm_interval is None:
        renorm_steps = RENORM_STEPS_DEFAULT
    else:
        renorm_steps = int(round(renorm_interval / h))
    renorm_steps = min(max(renorm_steps, 1), n)
    transient_steps = int(round(transient_fraction * n))
    # keep at least one accumulation epoch
    transient_steps = min(transient_steps, n - renorm_steps)
    return n, h, renorm_steps, max(transient_steps, 0)


def _finish(spec, initial, method, status, lam, nconv, fail_t, t_acc, conv_t, conv_lam):
    if status == _k.DIVERGED:
        raise DivergedTrajectory(fail_t)
    if status == _k.DEGENERATE:
        raise DegenerateSeparation(
            "separation collapsed to exactly zero; the pair cannot be renormalized"
        )
    if status == _k.STEP_FAILURE:
        raise NonFinite(f"tangent vector overflowed at t = {fail_t:.6g}")
    return LyapunovEstimate(
        spec=spec,
        lam=float(lam),
        method=method,
        transient_skipped=float(t_acc - initial.t),
        convergence_t=conv_t[:nconv].copy(),
        convergence=conv_lam[:nconv].copy(),
    )


def lyapunov_two_trajectory(
    spec: SystemSpec,
    initial: State,
    cfg: IntegratorConfig,
    d0: float = 1e-8,
    renorm_interval: float | None = None,
    transient_fraction: float = 0.1,
) -> LyapunovEstimate:
    """Benettin-style estimate from a reference/companion pair.

    The companion starts offset by d0 in position; d0 must lie in
    [1e-10, 1e-6] so the pair stays in the linear regime without drowning in
    roundoff.  renorm_interval is a time span (default: 100 grid steps).
    """
    if not D0_MIN <= d0 <= D0_MAX:
        raise ValueError(f"d0 must lie in [{D0_MIN:g}, {D0_MAX:g}], got {d0:g}")
    n, h, renorm_steps, transient_steps = _lyapunov_grid(
        spec, initial, cfg, renorm_interval, transient_fraction
    )
    ncap = n // renorm_steps + 2
    conv_t = np.empty(ncap)
    conv_lam = np.empty(ncap)
    status, lam, nconv, fail_t, t_acc = _k.benettin(
        pack_spec(spec),
        initial.t,
        initial.x,
        initial.v,
        h,
        n,
        renorm_steps,
        transient_steps,
        d0,
        cfg.blowup_threshold,
        conv_t,
        conv_lam,
    )
    return _finish(
        spec, initial, "two_trajectory", status, lam, nconv, fail_t, t_acc, conv_t, conv_lam
    )


def lyapunov_variational(
    spec: SystemSpec,
    initial: State,
    cfg: IntegratorConfig,
    renorm_interval: float | None = None,
    transient_fraction: float = 0.1,
    tangent0: tuple[float, float] = (1.0, 0.0),
) -> LyapunovEstimate:
    """Estimate from the linearized flow along the trajectory.

    Integrates the tangent dynamics alongside the state and renormalizes the
    tangent vector to unit length at each epoch.
    """
    ux0, uv0 = float(tangent0[0]), float(tangent0[1])
    if ux0 == 0.0 and uv0 == 0.0:
        raise ValueError("tangent0 must be a nonzero vector")
    n, h, renorm_steps, transient_steps = _lyapunov_grid(
        spec, initial, cfg, renorm_interval, transient_fraction
    )
    ncap = n // renorm_steps + 2
    conv_t = np.empty(ncap)
    conv_lam = np.empty(ncap)
    status, lam, nconv, fail_t, t_acc = _k.variational(
        pack_spec(spec),
        initial.t,
        initial.x,
        initial.v,
        ux0,
        uv0,
        h,
        n,
        renorm_steps,
        transient_steps,
        cfg.blowup_threshold,
        conv_t,
        conv_lam,
    )
    return _finish(
        spec, initial, "variational", status, lam, nconv, fail_t, t_acc, conv_t, conv_lam
    )
