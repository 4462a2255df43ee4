"""Contour paths, quadrature along them, and steepest-descent tracing.

Paths are parametrized by a real ``s``; every path exposes vectorized
``position(s)`` and ``derivative(s)``. :func:`integrate` dispatches on the
path type: periodic trapezoid for tube loops, adaptive Gauss-Kronrod (7/15)
otherwise, with Euler-accelerated oscillatory tails for infinite lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dispersion import (
    DomainError,
    SaddleData,
    WaveguideParams,
    wavenumber_branch,
    wavenumber_continued,
)

EPS = np.finfo(float).eps

# Kronrod 15-point rule with embedded 7-point Gauss rule on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5, 13, 11, 9]] = np.concatenate([_WG[:3], _WG[:3]])
GAUSS_WEIGHTS[7] = _WG[3]


class NonConvergenceError(ArithmeticError):
    def __init__(self, message: str, result: "QuadratureResult | None" = None):
        super().__init__(message)
        self.result = result


class TraceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    evaluations: int
    converged: bool = True


@dataclass(frozen=True)
class QuadSettings:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_intervals: int = 200_000
    n_nodes: int = 256
    tail_panel: float | None = None
    tail_panels: int = 64
    euler_passes: int = 24
    strict: bool = False


DEFAULT_QUAD = QuadSettings()


# --------------------------------------------------------------------------- paths


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex

    @property
    def interval(self) -> tuple[float, float]:
        return 0.0, 1.0

    def position(self, s):
        return self.start + np.asarray(s) * (self.end - self.start)

    def derivative(self, s):
        return np.full(np.shape(s), self.end - self.start, dtype=complex)

    def reversed(self) -> "Segment":
        return Segment(self.end, self.start)


@dataclass(frozen=True)
class HorizontalLine:
    """The line ``Im z = epsilon`` run left to right; ``half_width`` marks the core."""

    epsilon: float
    half_width: float
    direction: int = 1

    @property
    def interval(self) -> tuple[float, float]:
        return -self.half_width, self.half_width

    def position(self, s):
        return self.direction * np.asarray(s, dtype=float) + 1j * self.epsilon

    def derivative(self, s):
        return np.full(np.shape(s), complex(self.direction))

    def reversed(self) -> "HorizontalLine":
        return HorizontalLine(self.epsilon, self.half_width, -self.direction)


@dataclass(frozen=True)
class TubeLoop:
    """One full turn around the tube at constant ``Im xi = height``."""

    height: float = 0.0
    direction: int = 1

    @property
    def interval(self) -> tuple[float, float]:
        return -0.5 * math.pi, 1.5 * math.pi

    def position(self, s):
        s = np.asarray(s, dtype=float)
        if self.direction < 0:
            s = math.pi - s
        return s + 1j * self.height

    def derivative(self, s):
        return np.full(np.shape(s), complex(self.direction))

    def reversed(self) -> "TubeLoop":
        return TubeLoop(self.height, -self.direction)


@dataclass(frozen=True)
class TracedPolyline:
    """Polyline through ``nodes``, parametrized by arclength.

    ``lift`` optionally carries a continuous companion value per node (for
    example the wavenumber on the right sheet); integrands then receive its
    linear interpolation as a second argument.
    """

    nodes: np.ndarray
    lift: np.ndarray | None = None
    arclength: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=complex)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("a polyline needs at least two nodes")
        object.__setattr__(self, "nodes", nodes)
        if self.lift is not None:
            object.__setattr__(self, "lift", np.asarray(self.lift, dtype=complex))
        s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(nodes)))])
        object.__setattr__(self, "arclength", s)

    @property
    def interval(self) -> tuple[float, float]:
        return 0.0, float(self.arclength[-1])

    def _locate(self, s):
        s = np.asarray(s, dtype=float)
        j = np.clip(np.searchsorted(self.arclength, s, side="right") - 1, 0, self.nodes.size - 2)
        ds = self.arclength[j + 1] - self.arclength[j]
        frac = np.where(ds > 0, (s - self.arclength[j]) / np.where(ds > 0, ds, 1.0), 0.0)
        return j, frac, ds

    def position(self, s):
        j, frac, _ = self._locate(s)
        return self.nodes[j] + frac * (self.nodes[j + 1] - self.nodes[j])

    def derivative(self, s):
        j, _, ds = self._locate(s)
        return (self.nodes[j + 1] - self.nodes[j]) / np.where(ds > 0, ds, 1.0)

    def lift_at(self, s):
        j, frac, _ = self._locate(s)
        return self.lift[j] + frac * (self.lift[j + 1] - self.lift[j])

    def reversed(self) -> "TracedPolyline":
        lift = None if self.lift is None else self.lift[::-1]
        return TracedPolyline(self.nodes[::-1], lift)


ContourPath = Segment | HorizontalLine | TubeLoop | TracedPolyline


# ---------------------------------------------------------------------- quadrature


def _gk_panels(g, lo, hi, owner):
    """One Kronrod/Gauss pass over many panels at once."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    s = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
    vals = g(s, owner[:, None])
    k = half * (vals @ KRONROD_WEIGHTS)
    gss = half * (vals @ GAUSS_WEIGHTS)
    roundoff = 50 * EPS * np.abs(half) * (np.abs(vals) @ KRONROD_WEIGHTS)
    return k, np.abs(k - gss) + roundoff


def adaptive_gk(g, lo, hi, owner=None, n_owner=None, abs_tol=1e-12, rel_tol=1e-10,
                max_intervals=200_000):
    """Globally adaptive 7/15 Gauss-Kronrod over a batch of panels.

    ``g(s, owner)`` must be vectorized; ``owner`` labels each panel so that
    results can be summed per original panel. Returns per-owner values and
    errors, the evaluation count and a convergence flag.
    """
    lo = np.asarray(lo, dtype=float).ravel()
    hi = np.asarray(hi, dtype=float).ravel()
    owner = np.arange(lo.size) if owner is None else np.asarray(owner).ravel()
    n_owner = lo.size if n_owner is None else n_owner
    val, err = _gk_panels(g, lo, hi, owner)
    evaluations = 15 * lo.size
    converged = False
    while True:
        total = val.sum()
        tol = max(abs_tol, rel_tol * abs(total))
        total_err = err.sum()
        if total_err <= tol:
            converged = True
            break
        if lo.size >= max_intervals:
            break
        split = err > tol / lo.size
        if not split.any():
            split = err >= err.max()
        mid = 0.5 * (lo[split] + hi[split])
        if np.any((mid <= lo[split]) | (mid >= hi[split])):
            break
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_owner = np.concatenate([owner[split], owner[split]])
        nv, ne = _gk_panels(g, new_lo, new_hi, new_owner)
        evaluations += 15 * new_lo.size
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        owner = np.concatenate([owner[keep], new_owner])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
    per_val = np.bincount(owner, weights=val.real, minlength=n_owner) + 1j * np.bincount(
        owner, weights=val.imag, minlength=n_owner)
    per_err = np.bincount(owner, weights=err, minlength=n_owner)
    return per_val, per_err, evaluations, converged


def periodic_trapezoid(f, path: TubeLoop, n_nodes: int) -> QuadratureResult:
    """Equispaced rule over one period; spectrally accurate for analytic integrands."""
    if n_nodes < 4 or n_nodes % 2:
        raise DomainError("periodic trapezoid needs an even node count >= 4")
    lo, hi = path.interval
    s = lo + (hi - lo) * np.arange(n_nodes) / n_nodes
    vals = np.asarray(f(path.position(s)), dtype=complex) * path.derivative(s)
    h = (hi - lo) / n_nodes
    full = h * vals.sum()
    coarse = 2 * h * vals[::2].sum()
    roundoff = 10 * EPS * h * np.abs(vals).sum() * math.sqrt(n_nodes)
    # the coarse/full difference bounds the error of the coarse sum, so it is conservative
    err = min(abs(full - coarse), abs(full)) + roundoff
    return QuadratureResult(complex(full), float(err), n_nodes)


def _euler_limit(partial: np.ndarray, passes: int) -> tuple[complex, float]:
    """Limit of an alternating partial-sum sequence by repeated averaging."""
    seq = np.asarray(partial, dtype=complex)
    history = [seq[-1]]
    for _ in range(min(passes, seq.size - 2)):
        seq = 0.5 * (seq[1:] + seq[:-1])
        history.append(seq[-1])
    best = history[-1]
    err = abs(history[-1] - history[-2]) + abs(seq[-1] - seq[-2])
    return complex(best), float(err)


def _wrap(f, path):
    if isinstance(path, TracedPolyline) and path.lift is not None:
        return lambda s, owner: f(path.position(s), path.lift_at(s)) * path.derivative(s)
    return lambda s, owner: f(path.position(s)) * path.derivative(s)


def _finish(value, err, evaluations, converged, settings, what):
    res = QuadratureResult(complex(value), float(err), int(evaluations), bool(converged))
    if not converged and settings.strict:
        raise NonConvergenceError(f"{what}: error estimate {err:.3e} above tolerance", res)
    return res


def _integrate_line(f, path: HorizontalLine, settings: QuadSettings) -> QuadratureResult:
    T = path.half_width
    width = settings.tail_panel if settings.tail_panel else T / 20.0
    g = lambda s, owner: f(path.position(s)) * path.derivative(s)  # noqa: E731
    # core: panels no wider than half the tail panel so oscillations are resolved from the start
    n_core = max(2, int(math.ceil(2 * T / (0.5 * width))))
    edges = np.linspace(-T, T, n_core + 1)
    cv, ce, n_core_eval, ok_core = adaptive_gk(
        g, edges[:-1], edges[1:], abs_tol=settings.abs_tol, rel_tol=settings.rel_tol,
        max_intervals=settings.max_intervals)
    core = cv.sum()
    core_err = ce.sum()
    n = settings.tail_panels
    j = np.arange(n)
    r_lo, r_hi = T + j * width, T + (j + 1) * width
    lo = np.concatenate([r_lo, -r_hi])
    hi = np.concatenate([r_hi, -r_lo])
    owner = np.concatenate([j, j])
    tv, te, n_tail_eval, ok_tail = adaptive_gk(
        g, lo, hi, owner=owner, n_owner=n, abs_tol=settings.abs_tol, rel_tol=settings.rel_tol,
        max_intervals=settings.max_intervals)
    partial = core + np.cumsum(tv)
    value, euler_err = _euler_limit(partial, settings.euler_passes)
    err = core_err + te.sum() + euler_err
    tol = max(settings.abs_tol, settings.rel_tol * abs(value))
    # the tail extrapolation is the accuracy bottleneck; judge it on a looser scale
    converged = ok_core and ok_tail and euler_err <= max(100 * tol, 1e-8 * abs(value) + 1e-9)
    return _finish(value, err, n_core_eval + n_tail_eval, converged, settings, "spectral line")


def integrate(f: Callable, path, settings: QuadSettings = DEFAULT_QUAD) -> QuadratureResult:
    """Approximate the contour integral of ``f`` along ``path``.

    ``f`` is vectorized over complex arrays. For a :class:`TracedPolyline`
    carrying ``lift`` values it is called as ``f(z, lift)``.
    """
    if isinstance(path, TubeLoop):
        return periodic_trapezoid(f, path, settings.n_nodes)
    if isinstance(path, HorizontalLine):
        return _integrate_line(f, path, settings)
    if isinstance(path, TracedPolyline):
        s = path.arclength
        keep = np.diff(s) > 0
        lo, hi = s[:-1][keep], s[1:][keep]
    elif isinstance(path, Segment):
        lo, hi = np.array([0.0]), np.array([1.0])
    else:
        raise TypeError(f"unsupported path {type(path).__name__}")
    vals, errs, evaluations, ok = adaptive_gk(
        _wrap(f, path), lo, hi, abs_tol=settings.abs_tol, rel_tol=settings.rel_tol,
        max_intervals=settings.max_intervals)
    return _finish(vals.sum(), errs.sum(), evaluations, ok, settings, type(path).__name__)


# ----------------------------------------------------------------- descent tracing


@dataclass(frozen=True)
class TraceSettings:
    depth: float = 30.0
    length_scale: float = 1.0
    offset: float = 1e-6
    step_tol: float = 1e-10
    initial_step: float = 1e-3
    max_steps: int = 20_000


DEFAULT_TRACE = TraceSettings()


@dataclass(frozen=True)
class DescentTrace:
    """A steepest-descent path through ``branch_sign * omega*``.

    ``nodes`` runs through the saddle in the direction of increasing
    ``Re omega``; its ``lift`` holds the wavenumber on the correct sheet.
    ``saddle_index`` locates the saddle node.
    """

    saddle: SaddleData
    branch_sign: int
    nodes: TracedPolyline
    phase_const: float
    saddle_index: int
    imag_phase: np.ndarray

    @property
    def phase_residual(self) -> float:
        k = self.nodes.lift
        h = k - self.nodes.nodes / self.saddle.V
        return float(np.max(np.abs(h.real - self.phase_const)))


def _pick_sheet(omega, k_ref, params):
    k1 = wavenumber_continued(omega, params)
    return k1 if abs(k1 - k_ref) <= abs(k1 + k_ref) else -k1


class _Tracer:
    def __init__(self, params: WaveguideParams, V: float, C: float):
        self.params, self.V, self.C = params, V, C
        self.a = params.omega_co

    def h(self, omega, k):
        return k - omega / self.V

    def dh(self, omega, k):
        return omega / (self.params.c**2 * k) - 1.0 / self.V

    def lift(self, omega, omega_ref, k_ref):
        k_pred = k_ref + omega_ref / (self.params.c**2 * k_ref) * (omega - omega_ref)
        return _pick_sheet(omega, k_pred, self.params)

    def flow(self, omega, omega_ref, k_ref):
        k = self.lift(omega, omega_ref, k_ref)
        d = self.dh(omega, k)
        return 1j * d.conjugate() / abs(d)

    def rk4(self, omega, k, ds):
        k1 = self.flow(omega, omega, k)
        k2 = self.flow(omega + 0.5 * ds * k1, omega, k)
        k3 = self.flow(omega + 0.5 * ds * k2, omega, k)
        k4 = self.flow(omega + ds * k3, omega, k)
        return omega + ds * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0

    def project(self, omega, omega_ref, k_ref):
        k = self.lift(omega, omega_ref, k_ref)
        for _ in range(4):
            d = self.dh(omega, k)
            miss = self.h(omega, k).real - self.C
            if abs(miss) <= 1e-15 * max(1.0, abs(self.C)):
                break
            omega = omega - miss * d.conjugate() / abs(d) ** 2
            k = self.lift(omega, omega_ref, k_ref)
        return omega, k

    def max_step(self, omega, k):
        dist = min(abs(omega - self.a), abs(omega + self.a))
        scale = max(self.a, abs(omega))
        # the sheet choice relies on short steps next to the branch points
        return min(0.05 * scale, 0.25 * dist)


def _trace_arm(tr: _Tracer, omega0, k0, direction, settings: TraceSettings, target):
    omega = omega0 + settings.offset * tr.a * direction
    k = tr.lift(omega, omega0, k0)
    omega, k = tr.project(omega, omega0, k0)
    nodes, lifts = [omega], [k]
    ds = settings.initial_step * tr.a
    floor = 1e-13 * tr.a
    for _ in range(settings.max_steps):
        if (tr.h(omega, k).imag - tr.h(omega0, k0).imag) >= target:
            return nodes, lifts
        ds = min(ds, tr.max_step(omega, k))
        if ds < floor:
            raise TraceError(f"step size underflow near omega={omega:.6g}")
        full = tr.rk4(omega, k, ds)
        half = tr.rk4(omega, k, 0.5 * ds)
        k_half = tr.lift(half, omega, k)
        two = tr.rk4(half, k_half, 0.5 * ds)
        if abs(full - two) > settings.step_tol * max(tr.a, abs(omega)):
            ds *= 0.5
            continue
        new, k_new = tr.project(two, omega, k)
        if tr.h(new, k_new).imag <= tr.h(omega, k).imag:
            ds *= 0.5
            continue
        omega, k = new, k_new
        nodes.append(omega)
        lifts.append(k)
        ds *= 1.5
    raise TraceError("descent trace did not reach the requested depth")


def trace_descent(saddle: SaddleData, branch_sign: int, params: WaveguideParams,
                  settings: TraceSettings = DEFAULT_TRACE) -> DescentTrace:
    """Trace the level set ``Re[k(omega) - omega/V] = const`` through a saddle.

    Both arms follow the unit-speed flow ``d omega/ds = i conj(h')/|h'|`` which
    keeps ``Re h`` fixed and raises ``Im h``; after each Runge-Kutta step a
    Newton correction transverse to the path restores ``Re h``. Arms stop once
    ``length_scale * (Im h - Im h(omega*))`` reaches ``depth``. The wavenumber
    is continued across the cut ``[-omega_co, omega_co]`` onto the second sheet
    where the path demands it.
    """
    V = saddle.V
    if not (0 < V < params.c):
        raise DomainError(f"descent tracing needs 0 < V < c, got V={V}")
    if branch_sign not in (1, -1):
        raise DomainError("branch_sign must be +1 or -1")
    omega0 = complex(branch_sign * saddle.omega_star.real, 0.0)
    k0 = wavenumber_branch(omega0, params)
    C = (k0 - omega0 / V).real
    tr = _Tracer(params, V, C)
    a = params.omega_co
    h2 = -(a**2) / (params.c**4 * k0**3)
    d = np.sqrt(1j / h2)
    d = d / abs(d)
    if d.real < 0:
        d = -d
    target = settings.depth / settings.length_scale
    fwd, fwd_k = _trace_arm(tr, omega0, k0, d, settings, target)
    bwd, bwd_k = _trace_arm(tr, omega0, k0, -d, settings, target)
    nodes = np.array(bwd[::-1] + [omega0] + fwd, dtype=complex)
    lift = np.array(bwd_k[::-1] + [k0] + fwd_k, dtype=complex)
    imag_phase = (lift - nodes / V).imag
    return DescentTrace(saddle=saddle, branch_sign=branch_sign,
                        nodes=TracedPolyline(nodes, lift), phase_const=C,
                        saddle_index=len(bwd), imag_phase=imag_phase)


def sheet_lift(omega, hint, params: WaveguideParams):
    """Vectorized sheet choice: the root of the dispersion relation nearest ``hint``."""
    k1 = wavenumber_continued(omega, params)
    return np.where(np.abs(k1 - hint) <= np.abs(k1 + hint), k1, -k1)
