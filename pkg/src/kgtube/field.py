"""Green's function ``u(t, x)`` of the Klein-Gordon waveguide, by several routes.

Every route returns a :class:`FieldSample`; the value is complex so that a
spurious imaginary part can serve as an error indicator (the true field is
real).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .contour import (
    DEFAULT_TRACE,
    HorizontalLine,
    QuadSettings,
    TraceSettings,
    TubeLoop,
    integrate,
    sheet_lift,
    trace_descent,
)
from .dispersion import (
    DomainError,
    Region,
    SpacetimePoint,
    WaveguideParams,
    saddle_points,
    spacetime_to_hyperbolic,
)
from .specfun import DEFAULT_BESSEL, BesselSettings, exact_field

# largest exponent (in e-folds) tolerated on a tube loop before it is lifted
LOOP_EXPONENT_BUDGET = 5.0
FAR_WARN_BELOW = 5.0
NEAR_WARN_ABOVE = 0.3


class FieldMethod(Enum):
    EXACT = "Exact"
    TUBE_LOOP = "TubeLoop"
    SADDLE_HEIGHT_LOOP = "SaddleHeightLoop"
    SPECTRAL_LINE = "SpectralLine"
    FAR_ASYMPTOTIC = "FarAsymptotic"
    NEAR_ASYMPTOTIC = "NearAsymptotic"
    STEEPEST_DESCENT = "SteepestDescent"

    @classmethod
    def parse(cls, name: str) -> "FieldMethod":
        for m in cls:
            if name.replace("_", "").lower() in (m.value.lower(), m.name.replace("_", "").lower()):
                return m
        raise DomainError(f"unknown method {name!r}; choose from {[m.value for m in cls]}")


@dataclass(frozen=True)
class FieldSample:
    point: SpacetimePoint
    value: complex
    method: FieldMethod
    error_estimate: float
    validity_note: str | None = None
    converged: bool = True


SPECTRAL_QUAD = QuadSettings(abs_tol=1e-9, rel_tol=1e-10)
DESCENT_QUAD = QuadSettings(abs_tol=1e-12, rel_tol=1e-11)


@dataclass(frozen=True)
class FieldSettings:
    n_nodes: int = 512
    loop_height: float | None = None
    epsilon: float | None = None
    spectral_quad: QuadSettings = SPECTRAL_QUAD
    descent_quad: QuadSettings = DESCENT_QUAD
    trace: TraceSettings = DEFAULT_TRACE
    bessel: BesselSettings = DEFAULT_BESSEL


DEFAULT_FIELD = FieldSettings()


def _front_value(p: SpacetimePoint, params: WaveguideParams, method: FieldMethod):
    region = p.region(params)
    if region is Region.BEFORE_FRONT:
        return FieldSample(p, 0j, method, 0.0,
                           "before the front the loop closes to a contour homologous to zero")
    if region is Region.ON_FRONT:
        return FieldSample(p, complex(-0.5 / params.c), method, 0.0, "front value (left limit)")
    return None


def _require_after_front(p: SpacetimePoint, params: WaveguideParams, what: str) -> None:
    if p.region(params) is not Region.AFTER_FRONT:
        raise DomainError(f"{what} needs t > x/c, got t={p.t}, x={p.x}")


def _loop_integral(p, params, height, n_nodes, method, note):
    hyp = spacetime_to_hyperbolic(p, params)
    z = params.omega_co * hyp.r
    eta = hyp.eta
    res = integrate(lambda xi: np.exp(1j * z * np.cos(xi - eta)), TubeLoop(height),
                    QuadSettings(n_nodes=n_nodes))
    scale = 1.0 / (4.0 * math.pi * params.c)
    return FieldSample(p, -scale * res.value, method, scale * res.error_estimate,
                       f"{note}; loop height {height:.17g}", res.converged)


def loop_height(p: SpacetimePoint, params: WaveguideParams) -> float:
    """Lowest loop height whose integrand stays within the exponent budget.

    On the real axis of the tube the integrand reaches ``exp(omega_co x / c)``,
    so far from the source the loop is raised toward ``Im eta`` where the
    integrand has unit modulus.
    """
    hyp = spacetime_to_hyperbolic(p, params)
    z = params.omega_co * hyp.r
    theta = hyp.eta.imag
    if params.omega_co * p.x / params.c <= LOOP_EXPONENT_BUDGET:
        return 0.0
    return theta - math.asinh(LOOP_EXPONENT_BUDGET / z)


def field_tube_loop(p: SpacetimePoint, params: WaveguideParams, n_nodes: int = 512,
                    height: float | None = None) -> FieldSample:
    """Closed loop around the tube, evaluated with the periodic trapezoid rule.

    ``height=None`` uses the real axis of the tube unless round-off would
    swamp the result, see :func:`loop_height`; pass ``height=0.0`` to force
    the real axis.
    """
    front = _front_value(p, params, FieldMethod.TUBE_LOOP)
    if front is not None:
        return front
    h = loop_height(p, params) if height is None else float(height)
    return _loop_integral(p, params, h, n_nodes, FieldMethod.TUBE_LOOP, "tube loop")


def field_saddle_height_loop(p: SpacetimePoint, params: WaveguideParams,
                             n_nodes: int = 512) -> FieldSample:
    """Loop through both saddle points, ``Im xi = Im eta``."""
    _require_after_front(p, params, "saddle-height loop")
    theta = spacetime_to_hyperbolic(p, params).eta.imag
    return _loop_integral(p, params, theta, n_nodes, FieldMethod.SADDLE_HEIGHT_LOOP,
                          "loop through the saddle points")


def _spectral_integrand(t, x, params):
    c, a = params.c, params.omega_co

    def f(w):
        k = 1j * np.sqrt((a - w) * (a + w)) / c
        return np.exp(1j * (k * x - w * t)) / (c * k)

    return f


def field_spectral_line(p: SpacetimePoint, params: WaveguideParams, epsilon: float | None = None,
                        quad: QuadSettings = SPECTRAL_QUAD) -> FieldSample:
    """Frequency integral along ``Im omega = epsilon`` after the residue in ``k``.

    The integrand decays like ``1/|omega|`` only; tails beyond the core are
    summed in half-period panels and extrapolated by repeated averaging.
    """
    if not p.t > 0:
        raise DomainError("spectral line needs t > 0")
    eps = 0.1 * params.omega_co if epsilon is None else float(epsilon)
    if not eps > 0:
        raise DomainError("epsilon must be positive")
    T = 200.0 * max(params.omega_co, 1.0 / p.t)
    tau = p.t - p.x / params.c
    panel = math.pi / abs(tau) if tau != 0 else T / 20.0
    settings = replace(quad, tail_panel=panel)
    res = integrate(_spectral_integrand(p.t, p.x, params), HorizontalLine(eps, T), settings)
    scale = 1.0 / (4.0 * math.pi * params.c)
    note = f"epsilon={eps:.6g}; core half-width {T:.6g}; tail panel {panel:.6g}"
    return FieldSample(p, -1j * scale * res.value, FieldMethod.SPECTRAL_LINE,
                       scale * res.error_estimate, note, res.converged)


def _regime_note(z: float, regime: str) -> str:
    if regime == "far":
        flag = " (outside far-field regime)" if z < FAR_WARN_BELOW else ""
    else:
        flag = " (outside near-field regime)" if z > NEAR_WARN_ABOVE else ""
    return f"omega_co*r={z:.6g}{flag}"


def field_far_asymptotic(p: SpacetimePoint, params: WaveguideParams) -> FieldSample:
    """Sum of the two saddle contributions at ``+omega*`` and ``-omega*``."""
    _require_after_front(p, params, "far-field asymptotics")
    z = params.omega_co * p.interval(params)
    amp = -0.5 / (params.c * math.sqrt(2.0 * math.pi * z))
    plus = amp * np.exp(-1j * z + 0.25j * math.pi)
    minus = amp * np.exp(1j * z - 0.25j * math.pi)
    # size of the first neglected term of the expansion
    err = abs(amp) * 2.0 / (8.0 * z)
    return FieldSample(p, complex(plus + minus), FieldMethod.FAR_ASYMPTOTIC, err,
                       _regime_note(z, "far"))


def field_near_asymptotic(p: SpacetimePoint, params: WaveguideParams) -> FieldSample:
    _require_after_front(p, params, "near-field asymptotics")
    z = params.omega_co * p.interval(params)
    return FieldSample(p, complex(-0.5 / params.c), FieldMethod.NEAR_ASYMPTOTIC,
                       z * z / (8.0 * params.c), _regime_note(z, "near"))


def field_steepest_descent(p: SpacetimePoint, params: WaveguideParams,
                           trace: TraceSettings = DEFAULT_TRACE,
                           quad: QuadSettings = DESCENT_QUAD) -> FieldSample:
    """Frequency integral deformed onto the descent paths through ``+-omega*``."""
    if not (p.x > 0 and p.region(params) is Region.AFTER_FRONT):
        raise DomainError(f"steepest descent needs x > 0 and t > x/c, got t={p.t}, x={p.x}")
    V = p.x / p.t
    saddle = saddle_points(V, params)
    settings = replace(trace, length_scale=p.x)
    c, t, x = params.c, p.t, p.x

    def f(w, hint):
        k = sheet_lift(w, hint, params)
        return np.exp(1j * (k * x - w * t)) / (c * k)

    total, err, ok = 0j, 0.0, True
    residual = 0.0
    for sign in (1, -1):
        tr = trace_descent(saddle, sign, params, settings)
        res = integrate(f, tr.nodes, quad)
        total += res.value
        ok = ok and res.converged
        residual = max(residual, tr.phase_residual)
        # tails past the truncation decay at rate x|h'| along the path
        for end in (0, -1):
            w_end, k_end = tr.nodes.nodes[end], tr.nodes.lift[end]
            slope = abs(w_end / (c * c * k_end) - 1.0 / V) * x
            err += abs(f(np.array([w_end]), np.array([k_end]))[0]) / max(slope, 1e-300)
        err += res.error_estimate
    scale = 1.0 / (4.0 * math.pi * c)
    note = f"V={V:.6g}; max |Re h - const| = {residual:.3e}"
    return FieldSample(p, -1j * scale * total, FieldMethod.STEEPEST_DESCENT, scale * err, note, ok)


def field_exact(p: SpacetimePoint, params: WaveguideParams,
                bessel: BesselSettings = DEFAULT_BESSEL) -> FieldSample:
    value = exact_field(p, params, bessel)
    return FieldSample(p, complex(value), FieldMethod.EXACT,
                       bessel.target_abs_error / (2.0 * params.c))


def evaluate(p: SpacetimePoint, params: WaveguideParams, method: FieldMethod | str,
             settings: FieldSettings = DEFAULT_FIELD) -> FieldSample:
    if isinstance(method, str):
        method = FieldMethod.parse(method)
    if method is FieldMethod.EXACT:
        return field_exact(p, params, settings.bessel)
    if method is FieldMethod.TUBE_LOOP:
        return field_tube_loop(p, params, settings.n_nodes, settings.loop_height)
    if method is FieldMethod.SADDLE_HEIGHT_LOOP:
        return field_saddle_height_loop(p, params, settings.n_nodes)
    if method is FieldMethod.SPECTRAL_LINE:
        return field_spectral_line(p, params, settings.epsilon, settings.spectral_quad)
    if method is FieldMethod.FAR_ASYMPTOTIC:
        return field_far_asymptotic(p, params)
    if method is FieldMethod.NEAR_ASYMPTOTIC:
        return field_near_asymptotic(p, params)
    if method is FieldMethod.STEEPEST_DESCENT:
        return field_steepest_descent(p, params, settings.trace, settings.descent_quad)
    raise DomainError(f"unsupported method {method}")
