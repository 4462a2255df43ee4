"""Bessel function J0 for real non-negative arguments, and the closed-form field.

Three regimes keep the absolute error near 1e-15:

* ascending power series for small arguments,
* Miller's backward recurrence normalized by ``J0 + 2 sum J_2k = 1`` in the
  middle range, where the series suffers cancellation and the asymptotic
  series has not yet reached double precision,
* the Hankel asymptotic expansion for large arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dispersion import DomainError, Region, SpacetimePoint, WaveguideParams


@dataclass(frozen=True)
class BesselSettings:
    series_cutoff: float = 8.0
    asymptotic_cutoff: float = 25.0
    target_abs_error: float = 1e-13

    def __post_init__(self) -> None:
        if not (self.series_cutoff > 0 and self.asymptotic_cutoff >= self.series_cutoff):
            raise DomainError("need 0 < series_cutoff <= asymptotic_cutoff")
        if not self.target_abs_error > 0:
            raise DomainError("target_abs_error must be positive")


DEFAULT_BESSEL = BesselSettings()


def j0_series(z: float, tol: float = 1e-17) -> float:
    """Sum of ``(-z^2/4)^m / (m!)^2``."""
    q = -0.25 * z * z
    term, total, m = 1.0, 1.0, 0
    while True:
        m += 1
        term *= q / (m * m)
        total += term
        if abs(term) <= tol * max(1.0, abs(total)) and m > -q:
            return total


def j0_miller(z: float) -> float:
    if z == 0.0:
        return 1.0
    start = 2 * ((int(z) + 20 + int(4.0 * math.sqrt(z + 1.0))) // 2)
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    for n in range(start, 0, -1):
        j_prev = (2.0 * n / z) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
    return j_cur / (norm + j_cur)


def j0_asymptotic(z: float, tol: float = 1e-17) -> float:
    """Hankel expansion, truncated at the smallest term."""
    p = q = 0.0
    term = 1.0
    k = 0
    last = math.inf
    while True:
        mag = abs(term)
        if mag > last or k > 60:
            break
        if k % 2 == 0:
            p += term if k % 4 == 0 else -term
        else:
            q += term if k % 4 == 1 else -term
        if mag < tol:
            break
        last = mag
        k += 1
        # a_k(0) / z^k with a_k(0) = (-1)^k prod (2j-1)^2 / (k! 8^k)
        term *= -((2 * k - 1) ** 2) / (k * 8.0 * z)
    chi = z - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * z)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j0(z: float, settings: BesselSettings = DEFAULT_BESSEL) -> float:
    if not math.isfinite(z) or z < 0:
        raise DomainError(f"bessel_j0 needs finite z >= 0, got {z}")
    if z <= settings.series_cutoff:
        return j0_series(z)
    if z <= settings.asymptotic_cutoff:
        return j0_miller(z)
    return j0_asymptotic(z)


def exact_field(p: SpacetimePoint, params: WaveguideParams,
                settings: BesselSettings = DEFAULT_BESSEL) -> float:
    """Green's function ``-J0(omega_co r)/(2c)`` behind the front, zero ahead of it.

    On the front itself the left limit ``-1/(2c)`` is returned.
    """
    region = p.region(params)
    if region is Region.BEFORE_FRONT:
        return 0.0
    if region is Region.ON_FRONT:
        return -0.5 / params.c
    return -0.5 * bessel_j0(params.omega_co * p.interval(params), settings) / params.c
