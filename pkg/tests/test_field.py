import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgtube.dispersion import DomainError, SpacetimePoint, WaveguideParams
from kgtube.field import (
    FieldMethod,
    FieldSettings,
    evaluate,
    field_far_asymptotic,
    field_near_asymptotic,
    field_saddle_height_loop,
    field_spectral_line,
    field_steepest_descent,
    field_tube_loop,
    loop_height,
)
from kgtube.specfun import bessel_j0, exact_field


def ex(t, x, params):
    return exact_field(SpacetimePoint(t, x), params)


def test_method_parse():
    assert FieldMethod.parse("tubeloop") is FieldMethod.TUBE_LOOP
    assert FieldMethod.parse("STEEPEST_DESCENT") is FieldMethod.STEEPEST_DESCENT
    with pytest.raises(DomainError):
        FieldMethod.parse("residues")


def test_tube_loop_examples(unit):
    before = field_tube_loop(SpacetimePoint(0.5, 1.0), unit)
    assert before.value == 0 and before.error_estimate == 0 and before.validity_note
    s = field_tube_loop(SpacetimePoint(5, 3), unit, n_nodes=256)
    assert abs(s.value - (-0.5 * bessel_j0(4.0))) <= 1e-12
    for T in (0.3, 7.0, 33.0):
        assert abs(field_tube_loop(SpacetimePoint(T, 0), unit).value + 0.5 * bessel_j0(T)) <= 1e-12
    assert field_tube_loop(SpacetimePoint(2, 2), unit).value == -0.5


def test_tube_loop_lifted_vs_real_axis(unit):
    p = SpacetimePoint(8, 4)
    assert loop_height(p, unit) == 0.0
    a = field_tube_loop(p, unit, height=0.0).value
    b = field_tube_loop(p, unit, height=0.3).value
    assert abs(a - b) < 1e-12
    far = SpacetimePoint(40, 38)
    assert loop_height(far, unit) > 0
    assert abs(field_tube_loop(far, unit).value - ex(40, 38, unit)) < 1e-12


def test_saddle_height_loop_examples(unit):
    p = SpacetimePoint(5, 3)
    assert abs(field_saddle_height_loop(p, unit).value - field_tube_loop(p, unit).value) < 1e-10
    for t, x in [(1.05, 1.0), (100.0, 0.0)]:
        assert abs(field_saddle_height_loop(SpacetimePoint(t, x), unit).value - ex(t, x, unit)) < 1e-9
    with pytest.raises(DomainError):
        field_saddle_height_loop(SpacetimePoint(1, 1), unit)


def test_spectral_line_examples(unit):
    s = field_spectral_line(SpacetimePoint(5, 0), unit, epsilon=0.1)
    assert abs(s.value - ex(5, 0, unit)) <= 1e-4
    assert s.converged
    b = field_spectral_line(SpacetimePoint(0.5, 1), unit)
    assert abs(b.value) <= 1e-3
    p = SpacetimePoint(10, 5)
    lo = field_spectral_line(p, unit, epsilon=0.05)
    hi = field_spectral_line(p, unit, epsilon=0.2)
    assert abs(lo.value - hi.value) <= lo.error_estimate + hi.error_estimate
    with pytest.raises(DomainError):
        field_spectral_line(p, unit, epsilon=0.0)


def test_far_asymptotic_examples(unit):
    for z in (20.0, 200.0):
        # on-axis points with |J0| comfortably away from zero
        t = z
        while abs(bessel_j0(t)) <= 0.05:
            t += 0.5
        s = field_far_asymptotic(SpacetimePoint(t, 0), unit)
        rel = abs(s.value - ex(t, 0, unit)) / abs(ex(t, 0, unit))
        assert rel <= (0.05 if z == 20 else 0.005)
        assert abs(s.value.imag) < 1e-15
    assert "outside" in field_far_asymptotic(SpacetimePoint(2, 0), unit).validity_note


def test_near_asymptotic_examples(unit):
    assert field_near_asymptotic(SpacetimePoint(3, 1), unit).value == -0.5
    assert field_near_asymptotic(SpacetimePoint(3, 1), WaveguideParams(2, 1)).value == -0.25
    for z in (1e-4, 1e-2, 0.05, 0.1):
        s = field_near_asymptotic(SpacetimePoint(z, 0), unit)
        assert abs(s.value - ex(z, 0, unit)) <= 1.1 * z * z / 8


def test_steepest_descent_examples(unit):
    s = field_steepest_descent(SpacetimePoint(10, 5), unit)
    assert abs(s.value + 0.5 * bessel_j0(math.sqrt(75))) <= 1e-6
    s = field_steepest_descent(SpacetimePoint(4, 3.6), unit)
    assert abs(s.value - ex(4, 3.6, unit)) <= 1e-5
    assert s.error_estimate < 1e-8
    with pytest.raises(DomainError):
        field_steepest_descent(SpacetimePoint(4, 0), unit)


def test_steepest_descent_close_to_far_asymptotic(unit):
    for t, x in [(40, 20), (100, 30)]:
        p = SpacetimePoint(t, x)
        z = p.interval(unit)
        sd = field_steepest_descent(p, unit).value
        far = field_far_asymptotic(p, unit).value
        amp = 0.5 * math.sqrt(2 / (math.pi * z))
        assert abs(sd - far) <= 2 * amp / z


@settings(max_examples=60, deadline=None)
@given(c=st.sampled_from([0.5, 1.0, 3.0]), a=st.sampled_from([0.5, 2.0]),
       t=st.floats(0.1, 30), frac=st.floats(0, 0.99))
def test_tube_loop_matches_exact(c, a, t, frac):
    params = WaveguideParams(c, a)
    p = SpacetimePoint(t, frac * c * t)
    s = evaluate(p, params, FieldMethod.TUBE_LOOP)
    assert abs(s.value - exact_field(p, params)) <= 1e-10
    assert abs(s.value.imag) <= s.error_estimate + 1e-15


@settings(max_examples=60, deadline=None)
@given(c=st.sampled_from([0.5, 1.0, 3.0]), a=st.sampled_from([0.5, 2.0]),
       x=st.floats(0.01, 50), lag=st.floats(1e-6, 1.0))
def test_causality(c, a, x, lag):
    params = WaveguideParams(c, a)
    p = SpacetimePoint((1 - lag) * x / c, x)
    for m in (FieldMethod.EXACT, FieldMethod.TUBE_LOOP):
        assert evaluate(p, params, m).value == 0


def test_front_jump(unit):
    # zero just ahead of the front, -1/(2c) just behind it
    params = WaveguideParams(2.0, 1.0)
    x = 6.0
    ahead = evaluate(SpacetimePoint(x / 2 - 1e-9, x), params, FieldMethod.TUBE_LOOP).value
    behind = evaluate(SpacetimePoint(x / 2 + 1e-9, x), params, FieldMethod.TUBE_LOOP).value
    assert ahead == 0 and abs(behind + 0.25) < 1e-8


def test_ringing_zero_spacing(unit):
    # on axis the field rings at the cut-off: zero spacing tends to pi/omega_co
    params = WaveguideParams(1.0, 2.0)
    ts = np.linspace(50, 80, 3001)
    u = np.array([exact_field(SpacetimePoint(t, 0), params) for t in ts])
    idx = np.nonzero(np.sign(u[1:]) != np.sign(u[:-1]))[0]
    zeros = ts[idx] - u[idx] * (ts[idx + 1] - ts[idx]) / (u[idx + 1] - u[idx])
    spacing = np.diff(zeros)
    assert np.allclose(spacing, math.pi / 2.0, rtol=2e-3)


def test_evaluate_dispatch_and_reality(unit):
    p = SpacetimePoint(6, 2)
    ref = exact_field(p, unit)
    fs = FieldSettings(n_nodes=256)
    for m, tol in [(FieldMethod.EXACT, 0), (FieldMethod.TUBE_LOOP, 1e-10),
                   (FieldMethod.SADDLE_HEIGHT_LOOP, 1e-9), (FieldMethod.SPECTRAL_LINE, 1e-4),
                   (FieldMethod.STEEPEST_DESCENT, 1e-5)]:
        s = evaluate(p, unit, m.value, fs)
        assert s.method is m
        assert abs(s.value - ref) <= tol
        assert abs(s.value.imag) <= max(s.error_estimate, 1e-14)
    assert evaluate(SpacetimePoint(1, 3), unit, FieldMethod.EXACT).value == 0
    assert evaluate(p, unit, FieldMethod.NEAR_ASYMPTOTIC).value == -0.5


@pytest.mark.parametrize("x,c", [(3.0, 1.0), (7.5, 2.0)])
def test_front_speed(x, c):
    params = WaveguideParams(c, 1.5)
    ts = np.linspace(0, 2 * x / c, 2001)
    dt = ts[1] - ts[0]
    for m in (FieldMethod.EXACT, FieldMethod.TUBE_LOOP):
        first = next(t for t in ts if abs(evaluate(SpacetimePoint(t, x), params, m).value) > 1e-6)
        assert x / c <= first <= x / c + dt


def test_height_invariance_random_points(rng):
    # real-axis loop and saddle-height loop agree where the real-axis integrand stays moderate
    params = WaveguideParams(1.0, 1.0)
    for _ in range(100):
        x = rng.uniform(0, 5)
        t = x + rng.uniform(1e-3, 30)
        p = SpacetimePoint(t, x)
        a = field_tube_loop(p, params, height=0.0).value
        b = field_saddle_height_loop(p, params).value
        assert abs(a - b) <= 1e-10
