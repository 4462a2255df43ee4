"""Dispersion relation of the scalar Klein-Gordon waveguide and its complex geometry.

The dispersion function is ``D(omega, k) = omega**2 - c**2 k**2 - omega_co**2``.
Its zero set is a complex curve that is parametrized without square roots by a
point ``xi`` on a tube (a vertical strip of width 2*pi with glued edges)::

    omega = omega_co * sin(xi),    k = 1j * (omega_co / c) * cos(xi)

Complex quantities are plain Python ``complex`` values throughout.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi
STRIP_LO = -0.5 * math.pi
STRIP_HI = 1.5 * math.pi

MANIFOLD_RTOL = 1e-9
SADDLE_RTOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


def _check_finite(*values: complex) -> None:
    for v in values:
        if not cmath.isfinite(v):
            raise DomainError(f"non-finite input {v!r}")


@dataclass(frozen=True)
class WaveguideParams:
    """Limiting velocity ``c`` and cut-off angular frequency ``omega_co``."""

    c: float = 1.0
    omega_co: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c) and self.c > 0):
            raise DomainError(f"c must be positive and finite, got {self.c}")
        if not (math.isfinite(self.omega_co) and self.omega_co > 0):
            raise DomainError(f"omega_co must be positive and finite, got {self.omega_co}")


def normalize_strip(re: float) -> float:
    """Map a real part into the half-open strip ``[-pi/2, 3pi/2)``."""
    v = (re - STRIP_LO) % TWO_PI + STRIP_LO
    # fmod rounding can land exactly on the excluded edge
    if v >= STRIP_HI:
        v -= TWO_PI
    return v


@dataclass(frozen=True)
class TubeCoordinate:
    """Point on the tube; the real part is kept in ``[-pi/2, 3pi/2)``."""

    xi: complex

    def __post_init__(self) -> None:
        xi = complex(self.xi)
        _check_finite(xi)
        object.__setattr__(self, "xi", complex(normalize_strip(xi.real), xi.imag))

    @property
    def sheet(self) -> int:
        """+1 for the physical sheet (Im xi > 0), -1 for the second sheet, 0 on the cut."""
        return int(np.sign(self.xi.imag))


class Region(Enum):
    BEFORE_FRONT = "BeforeFront"
    ON_FRONT = "OnFront"
    AFTER_FRONT = "AfterFront"


@dataclass(frozen=True)
class SpacetimePoint:
    """Observation point; negative ``x`` is folded by the x -> -x symmetry."""

    t: float
    x: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise DomainError(f"non-finite point ({self.t}, {self.x})")
        if self.t < 0:
            raise DomainError(f"t must be >= 0, got {self.t}")
        object.__setattr__(self, "x", abs(float(self.x)))
        object.__setattr__(self, "t", float(self.t))

    def region(self, params: WaveguideParams) -> Region:
        front = self.x / params.c
        if self.t > front:
            return Region.AFTER_FRONT
        if self.t == front:
            return Region.ON_FRONT
        return Region.BEFORE_FRONT

    def interval(self, params: WaveguideParams) -> float:
        """Proper time ``r = sqrt(t^2 - x^2/c^2)``; zero outside the future cone."""
        tau = self.t - self.x / params.c
        if tau <= 0:
            return 0.0
        # factored form avoids cancellation near the front
        return math.sqrt(tau * (self.t + self.x / params.c))


@dataclass(frozen=True)
class HyperbolicCoords:
    r: float
    eta: complex


@dataclass(frozen=True)
class SaddleData:
    V: float
    omega_star: complex
    xi_star: TubeCoordinate
    residual: float = 0.0


@dataclass(frozen=True)
class DiagramSample:
    omega: float
    k: complex
    W: float
    K: float
    branch: str


def dispersion_residual(omega: complex, k: complex, params: WaveguideParams) -> complex:
    _check_finite(omega, k)
    return omega * omega - params.c**2 * k * k - params.omega_co**2


def wavenumber_branch(omega: complex, params: WaveguideParams) -> complex:
    """Causal wavenumber ``k(omega) = (i/c) sqrt(omega_co^2 - omega^2)``.

    Uses the principal square root, which is continuous on the upper half
    plane and gives ``Im k > 0`` there. A real ``omega`` is treated as the
    limit from above, so ``k(omega) = sign(omega) sqrt(omega^2 - omega_co^2)/c``
    on the propagating part of the real axis.
    """
    omega = complex(omega)
    _check_finite(omega)
    a = params.omega_co
    arg = (a - omega) * (a + omega)
    if omega.imag == 0.0:
        u = omega.real
        if abs(u) > a:
            return complex(math.copysign(math.sqrt(-arg.real), u) / params.c, 0.0)
        return complex(0.0, math.sqrt(arg.real) / params.c)
    return 1j * cmath.sqrt(arg) / params.c


def wavenumber_continued(omega, params: WaveguideParams):
    """Physical sheet of ``k(omega)`` with the cut moved onto ``[-omega_co, omega_co]``.

    Agrees with :func:`wavenumber_branch` on the closed upper half plane and
    continues it analytically across the propagating parts of the real axis.
    Accepts scalars or arrays.
    """
    a = params.omega_co
    w = np.asarray(omega, dtype=complex)
    # signed zero keeps points on the cut on the upper shore
    w = np.where(w.imag == 0.0, w.real + 0.0j, w)
    k = np.sqrt(w - a) * np.sqrt(w + a) / params.c
    return k if k.ndim else complex(k)


def dk_domega(omega: complex, k: complex, params: WaveguideParams) -> complex:
    """Derivative along the curve, from implicit differentiation of D = 0."""
    return omega / (params.c**2 * k)


def group_velocity(omega: float, params: WaveguideParams) -> float:
    if not math.isfinite(omega) or omega <= params.omega_co:
        raise DomainError(f"group velocity needs omega > omega_co, got {omega}")
    a = params.omega_co
    return params.c * math.sqrt((omega - a) * (omega + a)) / omega


def tube_to_plane(xi: TubeCoordinate | complex, params: WaveguideParams) -> tuple[complex, complex]:
    z = xi.xi if isinstance(xi, TubeCoordinate) else complex(xi)
    a = params.omega_co
    return a * cmath.sin(z), 1j * (a / params.c) * cmath.cos(z)


def tube_derivatives(xi: complex, params: WaveguideParams) -> tuple[complex, complex]:
    """``(d omega/d xi, d k/d xi)``; never both zero."""
    a = params.omega_co
    return a * cmath.cos(xi), -1j * (a / params.c) * cmath.sin(xi)


def plane_to_tube(omega: complex, k: complex, params: WaveguideParams,
                  rtol: float = MANIFOLD_RTOL) -> TubeCoordinate:
    """Inverse of :func:`tube_to_plane` via ``exp(i xi) = i (omega - c k)/omega_co``."""
    omega, k = complex(omega), complex(k)
    res = dispersion_residual(omega, k, params)
    scale = max(params.omega_co**2, abs(omega) ** 2, (params.c * abs(k)) ** 2)
    if abs(res) > rtol * scale:
        raise DomainError(f"({omega}, {k}) is not on the dispersion curve (residual {abs(res):.3e})")
    w = 1j * (omega - params.c * k) / params.omega_co
    return TubeCoordinate(-1j * cmath.log(w))


def spacetime_to_hyperbolic(p: SpacetimePoint, params: WaveguideParams) -> HyperbolicCoords:
    if p.region(params) is not Region.AFTER_FRONT:
        raise DomainError(f"hyperbolic coordinates need t > x/c, got t={p.t}, x={p.x}")
    beta = p.x / (params.c * p.t)
    return HyperbolicCoords(r=p.interval(params), eta=complex(-0.5 * math.pi, math.atanh(beta)))


def saddle_points(V: float, params: WaveguideParams, rtol: float = SADDLE_RTOL) -> SaddleData:
    """Stationary point ``omega*`` of ``k(omega) - omega/V`` on the positive real axis.

    The mirror saddle is ``-omega*``. ``xi_star`` is the tube image of
    ``+omega*``; for ``V = 0`` it degenerates to the cut-off point ``pi/2``.
    """
    c, a = params.c, params.omega_co
    if not math.isfinite(V) or V < 0 or V >= c:
        raise DomainError(f"saddle points need 0 <= V < c, got V={V}")
    if V == 0:
        return SaddleData(V=0.0, omega_star=complex(a, 0.0), xi_star=TubeCoordinate(0.5 * math.pi))
    beta = V / c
    omega_star = a / math.sqrt((1.0 - beta) * (1.0 + beta))
    # k* = (a/c) beta/sqrt(1-beta^2) directly; the branch formula cancels for small beta
    k_star = (a / c) * beta / math.sqrt((1.0 - beta) * (1.0 + beta))
    residual = abs(dk_domega(omega_star, k_star, params) - 1.0 / V)
    if residual > rtol * (1.0 / c) * max(1.0, 1.0 / beta):
        raise ArithmeticError(f"saddle residual {residual:.3e} above tolerance for V={V}")
    xi_star = TubeCoordinate(complex(0.5 * math.pi, math.atanh(beta)))
    return SaddleData(V=float(V), omega_star=complex(omega_star, 0.0), xi_star=xi_star, residual=residual)


def sample_diagram(params: WaveguideParams, omega_max: float, n: int) -> list[DiagramSample]:
    """Real samples of both diagram branches on ``[-omega_max, omega_max]``.

    Propagating samples carry real ``k`` (upper-shore sign), evanescent ones
    carry ``k = i|k|``. The cut-off points are always included.
    """
    if not (omega_max > 0) or n < 2:
        raise DomainError("sample_diagram needs omega_max > 0 and n >= 2")
    a, c = params.omega_co, params.c
    grid = set(np.linspace(-omega_max, omega_max, n).tolist())
    if omega_max >= a:
        grid.update((-a, a))
    out = []
    for w in sorted(grid):
        k = wavenumber_branch(w, params)
        K = (w * w - a * a) / c**2
        branch = "propagating" if abs(w) >= a else "evanescent"
        out.append(DiagramSample(omega=w, k=k, W=w * w, K=K, branch=branch))
    return out
