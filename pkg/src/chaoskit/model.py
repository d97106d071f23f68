"""System family definition: parameters, presets, right-hand side evaluation.

Three forms of the damped oscillator x'' = a(t, x, x') are supported:

* ``A1`` couples the decaying velocity term into the argument of the
  restoring force g,
* ``A2`` keeps the same terms but applies g to x alone and adds the
  coupling term separately,
* ``B`` is the polynomially forced form
  x'' = -(alpha x' + beta x + gamma delta sin(omega t) x^n + eps(t)).

Forms A1/A2 carry 1/t^q factors and are therefore only defined for t > 0
when q > 0.  The regularization schedule eps(t) is additive in form B and
multiplies x in the A forms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import _kernels as _k
from .errors import InvalidAxis, NonFinite, SingularTime, ValidationError

FORM_A1 = "A1"
FORM_A2 = "A2"
FORM_B = "B"
FORMS = (FORM_A1, FORM_A2, FORM_B)

_G_KINDS = {"Zero": 0, "Linear": 1, "Cubic": 2, "Sine": 3}
_EPS_KINDS = {"Zero": 0, "Constant": 1, "PowerLaw": 2}


@dataclass(frozen=True)
class Params:
    """Scalar coefficients shared by every form.

    alpha : damping strength, >= 0
    beta  : stiffness (form B) or decaying-coupling weight (A forms), >= 0
    gamma : coupling weight (A forms) or forcing weight (form B), >= 0
    delta : forcing amplitude
    omega : forcing frequency, must be > 0 whenever delta != 0
    q     : decay exponent of the 1/t^q terms, >= 0
    p     : default decay exponent for power-law regularization, >= 0
    n     : integer degree of the form-B polynomial forcing, >= 1
    """

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    omega: float = 1.0
    q: float = 0.0
    p: float = 2.0
    n: int = 2


PARAM_NAMES = tuple(f.name for f in fields(Params))


@dataclass(frozen=True)
class Nonlinearity:
    """Restoring-force preset g(u).  Every preset has g(0) = 0 and an
    analytic slope, which the tangent dynamics rely on."""

    variant: str = "Zero"
    k: float = 1.0
    w: float = 1.0

    @classmethod
    def zero(cls):
        return cls("Zero")

    @classmethod
    def linear(cls, k):
        return cls("Linear", k=float(k))

    @classmethod
    def cubic(cls, k):
        return cls("Cubic", k=float(k))

    @classmethod
    def sine(cls, k, w):
        return cls("Sine", k=float(k), w=float(w))

    def value(self, u):
        """g(u); accepts scalars or arrays."""
        if self.variant == "Linear":
            return self.k * u
        if self.variant == "Cubic":
            return self.k * u**3
        if self.variant == "Sine":
            return self.k * np.sin(self.w * u)
        return np.zeros_like(u) if isinstance(u, np.ndarray) else 0.0

    def slope(self, u):
        """g'(u); accepts scalars or arrays."""
        if self.variant == "Linear":
            return np.full_like(u, self.k) if isinstance(u, np.ndarray) else self.k
        if self.variant == "Cubic":
            return 3.0 * self.k * u**2
        if self.variant == "Sine":
            return self.k * self.w * np.cos(self.w * u)
        return np.zeros_like(u) if isinstance(u, np.ndarray) else 0.0

    def to_dict(self):
        d = {"variant": self.variant}
        if self.variant in ("Linear", "Cubic", "Sine"):
            d["k"] = self.k
        if self.variant == "Sine":
            d["w"] = self.w
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["variant"], k=float(d.get("k", 1.0)), w=float(d.get("w", 1.0)))


@dataclass(frozen=True)
class EpsilonSchedule:
    """Regularization coefficient eps(t).

    Zero, a nonnegative constant, or the power law c/t^p with c > 0 and
    p >= 0.  The power law is singular at t = 0 and supplies its running
    integral in closed form.
    """

    variant: str = "Zero"
    c: float = 0.0
    p: float = 2.0

    @classmethod
    def zero(cls):
        return cls("Zero")

    @classmethod
    def constant(cls, value):
        return cls("Constant", c=float(value))

    @classmethod
    def power_law(cls, c, p):
        return cls("PowerLaw", c=float(c), p=float(p))

    def value(self, t):
        """eps(t); accepts scalars or arrays."""
        if self.variant == "Constant":
            return np.full_like(t, self.c) if isinstance(t, np.ndarray) else self.c
        if self.variant == "PowerLaw":
            return self.c / t**self.p
        return np.zeros_like(t) if isinstance(t, np.ndarray) else 0.0

    def integral(self, t0, t):
        """Integral of eps from t0 to t, in closed form."""
        if self.variant == "Constant":
            return self.c * (t - t0)
        if self.variant == "PowerLaw":
            if self.p == 1.0:
                return self.c * np.log(t / t0)
            return self.c * (t ** (1.0 - self.p) - t0 ** (1.0 - self.p)) / (1.0 - self.p)
        return np.zeros_like(t) if isinstance(t, np.ndarray) else 0.0

    def to_dict(self):
        d = {"variant": self.variant}
        if self.variant == "Constant":
            d["value"] = self.c
        elif self.variant == "PowerLaw":
            d["c"] = self.c
            d["p"] = self.p
        return d

    @classmethod
    def from_dict(cls, d):
        variant = d["variant"]
        if variant == "Constant":
            return cls.constant(d["value"])
        if variant == "PowerLaw":
            return cls.power_law(d["c"], d.get("p", 2.0))
        return cls.zero()


@dataclass(frozen=True)
class State:
    """Instantaneous state (t, x, v).  Fields must be finite; a diverging
    trajectory is reported through its status, never stored as a state."""

    t: float
    x: float
    v: float

    def __post_init__(self):
        for name in ("t", "x", "v"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"state field {name} must be finite")


@dataclass(frozen=True)
class SystemSpec:
    """A fully specified member of the oscillator family."""

    form: str = FORM_B
    params: Params = field(default_factory=Params)
    nonlinearity: Nonlinearity = field(default_factory=Nonlinearity)
    epsilon: EpsilonSchedule = field(default_factory=EpsilonSchedule)

    def to_dict(self):
        return {
            "form": self.form,
            "params": {
                "alpha": self.params.alpha,
                "beta": self.params.beta,
                "gamma": self.params.gamma,
                "delta": self.params.delta,
                "omega": self.params.omega,
                "q": self.params.q,
                "p": self.params.p,
                "n": self.params.n,
            },
            "nonlinearity": self.nonlinearity.to_dict(),
            "epsilon": self.epsilon.to_dict(),
        }

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        pd = d.get("params", {})
        params = Params(
            alpha=float(pd.get("alpha", 0.0)),
            beta=float(pd.get("beta", 0.0)),
            gamma=float(pd.get("gamma", 0.0)),
            delta=float(pd.get("delta", 0.0)),
            omega=float(pd.get("omega", 1.0)),
            q=float(pd.get("q", 0.0)),
            p=float(pd.get("p", 2.0)),
            n=int(pd.get("n", 2)),
        )
        nl = Nonlinearity.from_dict(d["nonlinearity"]) if "nonlinearity" in d else Nonlinearity()
        eps = EpsilonSchedule.from_dict(d["epsilon"]) if "epsilon" in d else EpsilonSchedule()
        return cls(form=d.get("form", FORM_B), params=params, nonlinearity=nl, epsilon=eps)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def with_param(spec: SystemSpec, name: str, value: float) -> SystemSpec:
    """Copy of spec with one scalar parameter replaced.

    The axis name must be a Params field; anything else raises InvalidAxis.
    """
    if name not in PARAM_NAMES:
        raise InvalidAxis(f"unknown parameter axis {name!r}; expected one of {PARAM_NAMES}")
    if name == "n":
        value = int(value)
    else:
        value = float(value)
    return replace(spec, params=replace(spec.params, **{name: value}))


def pack_spec(spec: SystemSpec) -> np.ndarray:
    """Flatten a spec into the float64 vector the kernels consume."""
    P = np.zeros(_k.NPACKED)
    P[_k.FORM] = FORMS.index(spec.form)
    P[_k.ALPHA] = spec.params.alpha
    P[_k.BETA] = spec.params.beta
    P[_k.GAMMA] = spec.params.gamma
    P[_k.DELTA] = spec.params.delta
    P[_k.OMEGA] = spec.params.omega
    P[_k.Q] = spec.params.q
    P[_k.N] = spec.params.n
    P[_k.G_KIND] = _G_KINDS[spec.nonlinearity.variant]
    P[_k.G_K] = spec.nonlinearity.k
    P[_k.G_W] = spec.nonlinearity.w
    P[_k.EPS_KIND] = _EPS_KINDS[spec.epsilon.variant]
    P[_k.EPS_C] = spec.epsilon.c
    P[_k.EPS_P] = spec.epsilon.p
    return P


def _check_time(spec: SystemSpec, t: float):
    if spec.form != FORM_B and spec.params.q > 0.0 and t <= 0.0:
        raise SingularTime(f"form {spec.form} with q > 0 is singular at t = {t:.6g}")
    if spec.epsilon.variant == "PowerLaw" and spec.epsilon.p > 0.0 and t <= 0.0:
        raise SingularTime(f"power-law regularization is singular at t = {t:.6g}")


def accel(spec: SystemSpec, s: State) -> float:
    """Acceleration x'' at state s.

    Raises SingularTime when a 1/t^q or 1/t^p factor blows up at s.t, and
    NonFinite when the evaluation overflows.
    """
    _check_time(spec, s.t)
    a = float(_k.rhs(s.t, s.x, s.v, pack_spec(spec)))
    if not math.isfinite(a):
        raise NonFinite(f"acceleration is not finite at t = {s.t:.6g}")
    return a


def tangent_accel(spec: SystemSpec, s: State, ds) -> float:
    """Directional derivative of the acceleration along ds = (dx, dv) at s."""
    _check_time(spec, s.t)
    dx, dv = ds
    a = float(_k.rhs_tangent(s.t, s.x, s.v, float(dx), float(dv), pack_spec(spec)))
    if not math.isfinite(a):
        raise NonFinite(f"tangent acceleration is not finite at t = {s.t:.6g}")
    return a


def accel_array(spec: SystemSpec, t, x, v) -> np.ndarray:
    """Acceleration over parallel sample arrays (vectorized kernel loop)."""
    t = np.ascontiguousarray(t, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    return _k.rhs_array(t, x, v, pack_spec(spec))


def validate(spec: SystemSpec, t0: float | None = None, theorem_mode: bool = False) -> SystemSpec:
    """Check every parameter constraint and return the spec unchanged.

    All violations are collected into a single ValidationError (attribute
    ``messages``).  ``t0`` lets callers reject start times where the system
    is singular; ``theorem_mode`` additionally enforces the conditions under
    which the decay guarantee for form B holds (n >= 2 and, for power-law
    regularization, p > q + 1).
    """
    msgs = []
    p = spec.params
    if spec.form not in FORMS:
        msgs.append(f"unknown form {spec.form!r}; expected one of {FORMS}")
    if p.alpha < 0.0:
        msgs.append(f"alpha must be >= 0, got {p.alpha}")
    if p.beta < 0.0:
        msgs.append(f"beta must be >= 0, got {p.beta}")
    if p.gamma < 0.0:
        msgs.append(f"gamma must be >= 0, got {p.gamma}")
    if p.delta != 0.0 and not p.omega > 0.0:
        msgs.append(f"omega must be > 0 when delta != 0, got {p.omega}")
    if p.q < 0.0:
        msgs.append(f"q must be >= 0, got {p.q}")
    if p.p < 0.0:
        msgs.append(f"p must be >= 0, got {p.p}")
    if int(p.n) != p.n or p.n < 1:
        msgs.append(f"n must be an integer >= 1, got {p.n}")
    if theorem_mode and p.n < 2:
        msgs.append(f"the decay guarantee needs n >= 2, got {p.n}")
    if spec.nonlinearity.variant not in _G_KINDS:
        msgs.append(f"unknown nonlinearity variant {spec.nonlinearity.variant!r}")
    if spec.form == FORM_B and spec.nonlinearity.variant != "Zero":
        msgs.append("form B fixes its nonlinearity; the preset must be Zero")
    eps = spec.epsilon
    if eps.variant not in _EPS_KINDS:
        msgs.append(f"unknown regularization variant {eps.variant!r}")
    elif eps.variant == "Constant" and eps.c < 0.0:
        msgs.append(f"constant regularization must be >= 0, got {eps.c}")
    elif eps.variant == "PowerLaw":
        if not eps.c > 0.0:
            msgs.append(f"power-law regularization needs c > 0, got {eps.c}")
        if eps.p < 0.0:
            msgs.append(f"power-law regularization needs p >= 0, got {eps.p}")
        if theorem_mode and not eps.p > p.q + 1.0:
            msgs.append(
                f"the decay guarantee needs the regularization to fade faster than "
                f"the damping: p > q + 1, got p = {eps.p}, q = {p.q}"
            )
    if t0 is not None:
        if spec.form in (FORM_A1, FORM_A2) and p.q > 0.0 and t0 <= 0.0:
            msgs.append(
                f"forms A1/A2 with q > 0 are singular at t <= 0; start time {t0} is invalid"
            )
        if eps.variant == "PowerLaw" and eps.p > 0.0 and t0 <= 0.0:
            msgs.append(
                f"power-law regularization is singular at t <= 0; start time {t0} is invalid"
            )
    if msgs:
        raise ValidationError(msgs)
    return spec
