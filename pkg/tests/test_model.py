"""System definitions: accelerations, tangent partials, schedules, validation.

Tangent partials are checked against central finite differences of the
acceleration itself, so the Jacobian code has an independent oracle.
"""

import json
import math

import numpy as np
import pytest

from chaoskit import (
    FORM_A1,
    FORM_A2,
    FORM_B,
    EpsilonSchedule,
    InvalidAxis,
    Nonlinearity,
    Params,
    SingularTime,
    State,
    SystemSpec,
    ValidationError,
    accel,
    accel_array,
    tangent_accel,
    validate,
    with_param,
)
from chaoskit.model import PARAM_NAMES, pack_spec
from chaoskit._kernels import ALPHA, BETA, EPS_C, EPS_KIND, FORM, G_KIND, NPACKED


def _fd_partials(spec, t, x, v, h=1e-6):
    dax = (accel(spec, State(t, x + h, v)) - accel(spec, State(t, x - h, v))) / (2 * h)
    dav = (accel(spec, State(t, x, v + h)) - accel(spec, State(t, x, v - h))) / (2 * h)
    return dax, dav


A1_SPEC = SystemSpec(
    form=FORM_A1,
    params=Params(alpha=0.7, beta=0.3, gamma=0.2, delta=0.4, omega=3.0, q=1.5),
    nonlinearity=Nonlinearity.cubic(0.8),
    epsilon=EpsilonSchedule.power_law(0.5, 2.0),
)
A2_SPEC = SystemSpec(
    form=FORM_A2,
    params=Params(alpha=0.7, beta=0.3, gamma=0.2, delta=0.4, omega=3.0, q=1.5),
    nonlinearity=Nonlinearity.sine(0.8, 2.5),
    epsilon=EpsilonSchedule.power_law(0.5, 2.0),
)
B_SPEC = SystemSpec(
    form=FORM_B,
    params=Params(alpha=0.5, beta=1.2, gamma=0.6, delta=0.9, omega=2.0, n=3),
    epsilon=EpsilonSchedule.constant(0.25),
)


def test_accel_b_hand_value():
    # a = -(alpha*v + beta*x + gamma*delta*sin(omega*t)*x^n + eps)
    t, x, v = 0.5, 1.5, -0.5
    expected = -(0.5 * v + 1.2 * x + 0.6 * 0.9 * math.sin(2.0 * 0.5) * x**3 + 0.25)
    assert accel(B_SPEC, State(t, x, v)) == pytest.approx(expected, rel=1e-15)


def test_accel_a1_hand_value():
    # coupled argument u = x + (gamma + beta/t^q) * v
    t, x, v = 2.0, 0.8, 0.3
    p = A1_SPEC.params
    c = p.gamma + p.beta / t**p.q
    u = x + c * v
    expected = -(
        p.alpha / t**p.q * v
        + 0.8 * u**3
        + (0.5 / t**2.0) * x
        + p.delta * math.sin(p.omega * x)
    )
    assert accel(A1_SPEC, State(t, x, v)) == pytest.approx(expected, rel=1e-14)


def test_accel_a2_hand_value():
    # additive damping: nonlinearity takes x alone, (gamma + beta/t^q) multiplies v
    t, x, v = 2.0, 0.8, 0.3
    p = A2_SPEC.params
    expected = -(
        p.alpha / t**p.q * v
        + 0.8 * math.sin(2.5 * x)
        + (p.gamma + p.beta / t**p.q) * v
        + (0.5 / t**2.0) * x
        + p.delta * math.sin(p.omega * x)
    )
    assert accel(A2_SPEC, State(t, x, v)) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("spec", [A1_SPEC, A2_SPEC, B_SPEC])
@pytest.mark.parametrize("point", [(1.3, 0.9, -0.4), (2.7, -1.1, 0.6), (5.0, 0.2, 0.0)])
def test_tangent_matches_finite_differences(spec, point):
    t, x, v = point
    s = State(t, x, v)
    dax = tangent_accel(spec, s, (1.0, 0.0))
    dav = tangent_accel(spec, s, (0.0, 1.0))
    fdx, fdv = _fd_partials(spec, t, x, v)
    assert dax == pytest.approx(fdx, rel=1e-7, abs=1e-7)
    assert dav == pytest.approx(fdv, rel=1e-7, abs=1e-7)
    # directional derivative is linear in ds
    both = tangent_accel(spec, s, (0.5, -2.0))
    assert both == pytest.approx(0.5 * dax - 2.0 * dav, rel=1e-12, abs=1e-12)


def test_accel_array_matches_scalar():
    t = np.array([1.0, 2.0, 3.5])
    x = np.array([0.5, -0.2, 1.1])
    v = np.array([0.0, 0.3, -0.7])
    a = accel_array(A2_SPEC, t, x, v)
    for i in range(3):
        assert a[i] == pytest.approx(accel(A2_SPEC, State(t[i], x[i], v[i])), rel=1e-15)


@pytest.mark.parametrize(
    "g",
    [
        Nonlinearity.zero(),
        Nonlinearity.linear(0.7),
        Nonlinearity.cubic(-0.4),
        Nonlinearity.sine(1.2, 3.0),
    ],
)
def test_nonlinearity_slope_matches_finite_differences(g):
    h = 1e-6
    for u in (-1.4, 0.0, 0.9):
        fd = (g.value(u + h) - g.value(u - h)) / (2 * h)
        assert g.slope(u) == pytest.approx(fd, abs=1e-8)


def test_epsilon_integral_matches_quadrature():
    for eps in (
        EpsilonSchedule.constant(0.3),
        EpsilonSchedule.power_law(0.5, 2.0),
        EpsilonSchedule.power_law(0.4, 1.0),  # log branch
        EpsilonSchedule.power_law(0.2, 0.0),
    ):
        t = np.linspace(1.0, 6.0, 20001)
        quad = np.concatenate([[0.0], np.cumsum((eps.value(t[1:]) + eps.value(t[:-1])) / 2 * np.diff(t))])
        closed = eps.integral(1.0, t)
        assert np.allclose(closed, quad, atol=1e-8)


def test_spec_json_round_trip():
    for spec in (A1_SPEC, A2_SPEC, B_SPEC):
        again = SystemSpec.from_json(spec.to_json())
        assert again == spec
    doc = json.loads(B_SPEC.to_json())
    assert set(doc) == {"form", "params", "nonlinearity", "epsilon"}
    assert doc["form"] == "B"
    assert doc["params"]["alpha"] == 0.5


def test_with_param_swaps_one_field():
    s = with_param(B_SPEC, "gamma", 2.5)
    assert s.params.gamma == 2.5
    assert s.params.alpha == B_SPEC.params.alpha
    assert with_param(B_SPEC, "n", 4.0).params.n == 4
    with pytest.raises(InvalidAxis):
        with_param(B_SPEC, "zeta", 1.0)
    assert set(PARAM_NAMES) >= {"alpha", "beta", "gamma", "delta", "omega", "q", "p", "n"}


def test_state_rejects_non_finite():
    with pytest.raises(ValueError):
        State(0.0, float("nan"), 0.0)
    with pytest.raises(ValueError):
        State(float("inf"), 0.0, 0.0)


def test_validate_collects_all_violations():
    bad = SystemSpec(
        form=FORM_B,
        params=Params(alpha=-1.0, beta=1.0, gamma=-0.5, delta=1.0, omega=0.0, n=3),
    )
    with pytest.raises(ValidationError) as err:
        validate(bad)
    assert len(err.value.messages) >= 3  # alpha, gamma, omega each reported


def test_validate_form_b_requires_zero_preset():
    bad = SystemSpec(form=FORM_B, params=Params(alpha=0.1, beta=1.0), nonlinearity=Nonlinearity.cubic(1.0))
    with pytest.raises(ValidationError):
        validate(bad)


def test_validate_theorem_mode_requires_fast_decay():
    # p must exceed q + 1 for the regularization to fade faster than the damping
    spec = SystemSpec(
        form=FORM_A2,
        params=Params(alpha=0.4, beta=1.0, q=1.0, p=1.5),
        epsilon=EpsilonSchedule.power_law(0.4, 1.5),
    )
    with pytest.raises(ValidationError):
        validate(spec, theorem_mode=True)
    ok = SystemSpec(
        form=FORM_A2,
        params=Params(alpha=0.4, beta=1.0, q=1.0, p=2.5, n=2),
        epsilon=EpsilonSchedule.power_law(0.4, 2.5),
    )
    validate(ok, theorem_mode=True)


def test_validate_flags_singular_start():
    with pytest.raises(ValidationError):
        validate(A1_SPEC, t0=0.0)
    validate(A1_SPEC, t0=1.0)


def test_accel_raises_at_singular_time():
    with pytest.raises(SingularTime):
        accel(A1_SPEC, State(0.0, 1.0, 0.0))


def test_pack_spec_layout():
    packed = pack_spec(B_SPEC)
    assert packed.shape == (NPACKED,)
    assert packed[FORM] == 2.0
    assert packed[ALPHA] == 0.5
    assert packed[BETA] == 1.2
    assert packed[G_KIND] == 0.0  # Zero preset
    assert packed[EPS_KIND] == 1.0  # Constant
    assert packed[EPS_C] == 0.25
