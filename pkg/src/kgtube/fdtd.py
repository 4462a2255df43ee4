"""Leapfrog finite-difference simulation of the anchored cord.

The impulsive source is replaced by the equivalent initial-value problem
``u(0, x) = 0``, ``u_t(0, x) = -delta(x)``. Dirichlet ends are placed far
enough out that no reflection reaches the probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dispersion import DomainError, SpacetimePoint, WaveguideParams
from .specfun import exact_field


@dataclass(frozen=True)
class FdtdConfig:
    """Grid and model parameters; ``omega_co = 0`` gives the plain wave equation."""

    c: float = 1.0
    omega_co: float = 1.0
    dx: float = 2e-3
    cfl: float = 0.9
    domain_half_width: float | None = None
    t_end: float = 20.0
    source_width: float | None = None

    def __post_init__(self) -> None:
        if not (self.c > 0 and self.omega_co >= 0 and self.dx > 0 and self.t_end > 0):
            raise DomainError("need c > 0, omega_co >= 0, dx > 0, t_end > 0")
        if not 0 < self.cfl <= 1:
            raise DomainError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.source_width is not None and self.source_width < 0:
            raise DomainError("source_width must be >= 0")
        reach = self.c * self.t_end + self.source_support
        if self.domain_half_width is None:
            object.__setattr__(self, "domain_half_width", reach + 4 * self.dx)
        if not self.domain_half_width > reach + 2 * self.dx:
            raise DomainError("domain_half_width must exceed c*t_end + source support + 2*dx")

    @property
    def dt(self) -> float:
        return self.cfl * self.dx / self.c

    @property
    def params(self) -> WaveguideParams:
        return WaveguideParams(self.c, self.omega_co)

    @property
    def sigma(self) -> float:
        """Width of the regularized impulse, ``2 sqrt(dx * l)`` by default.

        ``l`` is the cut-off length ``c/omega_co`` (or ``c*t_end`` for the
        wave equation). A width of order ``sqrt(dx)`` keeps grid-scale
        wavenumbers, which the stencil propagates at the wrong speed, out of
        the solution while the smoothing error stays ``O(dx)``.
        """
        if self.source_width is not None:
            return self.source_width
        scale = self.c / max(self.omega_co, 1.0 / self.t_end)
        return 2.0 * math.sqrt(self.dx * scale)

    @property
    def source_support(self) -> float:
        return self.dx * (self.source_weights().size // 2)

    def source_weights(self) -> np.ndarray:
        """Discrete impulse on nodes ``-m..m``, summing to ``1/dx``."""
        sigma = self.sigma
        if sigma == 0:
            w = np.array([0.25, 0.5, 0.25])
        else:
            m = max(1, int(math.ceil(10 * sigma / self.dx)))
            j = np.arange(-m, m + 1)
            w = np.exp(-0.5 * (j * self.dx / sigma) ** 2)
            w /= w.sum()
        return w / self.dx


@dataclass
class FdtdResult:
    config: FdtdConfig
    probes: list[tuple[SpacetimePoint, float]]
    snapshots: list[tuple[float, np.ndarray]]
    max_abs: float


def reference_field(p: SpacetimePoint, c: float, omega_co: float) -> float:
    if omega_co == 0:
        return -0.5 / c if p.t >= p.x / c else 0.0
    return exact_field(p, WaveguideParams(c, omega_co))


def simulate(config: FdtdConfig, probes, snapshot_times=()) -> FdtdResult:
    """Run the leapfrog scheme and sample ``probes`` by bilinear interpolation.

    The impulse is a normalized Gaussian of width ``config.sigma`` sampled
    on the grid (``source_width=0`` selects the three-node 1/4, 1/2, 1/4
    stencil). Either choice has equal weight on even and odd nodes, which
    keeps the odd-even mode quiet and makes the ``cfl = 1`` wave-equation
    run exact behind the front.
    """
    points = [p if isinstance(p, SpacetimePoint) else SpacetimePoint(*p) for p in probes]
    limit = config.domain_half_width - config.source_support - 2 * config.dx
    for p in points:
        # beyond the stencil cone the discrete solution is exactly zero, grid or no grid
        if p.t > config.t_end or (p.x > limit and p.x <= stencil_cone(config, p.t)):
            raise DomainError(f"probe ({p.t}, {p.x}) outside the simulated region")
    dx, dt, c, a = config.dx, config.dt, config.c, config.omega_co
    half = int(math.ceil(config.domain_half_width / dx))
    n = 2 * half + 1
    mid = half
    courant2 = (c * dt / dx) ** 2
    mass2 = (a * dt) ** 2
    n_steps = int(math.ceil(config.t_end / dt)) + 1

    w = config.source_weights()
    m = w.size // 2
    v0 = np.zeros(n)
    v0[mid - m: mid + m + 1] = -w
    prev = np.zeros(n)
    # Taylor start; the dt^2 term vanishes because u^0 = 0
    cur = dt * v0

    # probe bookkeeping: step index below each probe time
    order = sorted(range(len(points)), key=lambda i: points[i].t)
    values = [0.0] * len(points)
    snaps = sorted(snapshot_times)
    snapshots: list[tuple[float, np.ndarray]] = []
    max_abs = float(np.max(np.abs(cur)))

    def sample(u, x):
        pos = mid + x / dx
        if pos >= n - 1:
            return 0.0
        j = min(int(math.floor(pos)), n - 2)
        f = pos - j
        return (1 - f) * u[j] + f * u[j + 1]

    queue = list(order)
    # time levels held: prev at step-1, cur at step
    step = 1
    while queue or snaps:
        t_cur = step * dt
        t_prev = (step - 1) * dt
        while queue and points[queue[0]].t <= t_cur:
            i = queue.pop(0)
            p = points[i]
            w = (p.t - t_prev) / dt
            values[i] = (1 - w) * sample(prev, p.x) + w * sample(cur, p.x)
        while snaps and snaps[0] <= t_cur:
            snapshots.append((t_cur, cur.copy()))
            snaps.pop(0)
        if not queue and not snaps:
            break
        if step >= n_steps:
            raise DomainError("probe time beyond t_end")
        # only nodes inside the numerical cone can be non-zero
        lo = max(1, mid - m - step - 2)
        hi = min(n - 1, mid + m + step + 3)
        nxt = np.zeros(n)
        u = cur[lo - 1: hi + 1]
        core = u[1:-1]
        nxt[lo:hi] = (2.0 - mass2) * core - prev[lo:hi] + courant2 * (u[2:] - 2.0 * core + u[:-2])
        prev, cur = cur, nxt
        step += 1
        max_abs = max(max_abs, float(np.max(np.abs(cur[lo:hi]))))
    probes_out = [(points[i], values[i]) for i in range(len(points))]
    return FdtdResult(config, probes_out, snapshots, max_abs)


def stencil_cone(config: FdtdConfig, t: float) -> float:
    """Distance beyond which the discrete solution is identically zero at time ``t``."""
    steps = int(math.ceil(t / config.dt))
    return (steps + config.source_weights().size // 2 + 2) * config.dx


# errors below this fraction of the front amplitude 1/(2c) count as round-off
ROUNDOFF_FLOOR = 1e-9


def errors_decrease(errors, c: float = 1.0) -> bool:
    """Strict decrease level to level, ignoring levels already at round-off."""
    floor = ROUNDOFF_FLOOR * 0.5 / c
    return all(b < a or max(a, b) <= floor for a, b in zip(errors, errors[1:]))


def convergence_study(base: FdtdConfig, probes, n_levels: int = 3):
    """Halve ``dx`` per level at fixed CFL; report max probe error and observed order."""
    if n_levels < 3:
        raise DomainError("a convergence study needs at least 3 levels")
    points = [p if isinstance(p, SpacetimePoint) else SpacetimePoint(*p) for p in probes]
    rows = []
    for level in range(n_levels):
        dx = base.dx / 2**level
        cfg = replace(base, dx=dx, domain_half_width=None)
        res = simulate(cfg, points)
        err = max(abs(v - reference_field(p, base.c, base.omega_co)) for p, v in res.probes)
        order = None
        if rows and err > 0 and rows[-1]["error"] > 0:
            order = math.log2(rows[-1]["error"] / err)
        rows.append({"level": level, "dx": dx, "error": err, "order": order, "result": res})
    return rows
