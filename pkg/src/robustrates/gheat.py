"""Explicit finite-difference solver for the nonlinear band heat equation.

Solves ``du/dt = g(d2u/dx2)`` with ``g`` the band generator (worst-case
half-variance), forward in time from ``u(0, x) = phi(x)``.  The scheme is
the classical explicit stencil with a bang-bang diffusion coefficient:
``sigma_hi^2`` where the second difference is nonnegative, ``sigma_lo^2``
where it is negative.  Under the stability bound
``sigma_hi^2 * dt / dx^2 <= 1`` the scheme is monotone, which is what makes
it converge to the (viscosity) solution of this fully nonlinear equation.

``u(t, 0)`` computed here is the exact upper expectation of ``phi`` of the
driver at time ``t``, so this module is the deterministic cross-check for
the Monte Carlo estimator on terminal-value payoffs.

Boundary treatment: the second derivative is taken as zero at the two edge
nodes (payoffs of at most linear growth), so edge values stay frozen; the
auto-sized grids keep the boundary several diffusion widths away from the
evaluation point.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, sqrt
from typing import Callable, Optional, TextIO, Union

import numpy as np

from .band import VolBand
from .errors import NumericalError, ValidationError


@dataclass(frozen=True)
class Grid1D:
    """Space-time box for the solver.  Build through :meth:`with_cfl` to get
    ``nt`` raised automatically until the stability bound holds."""

    x_min: float
    x_max: float
    nx: int
    t_final: float
    nt: int

    def __post_init__(self):
        if not (self.x_min < self.x_max):
            raise ValidationError("need x_min < x_max")
        if self.nx < 3:
            raise ValidationError("need nx >= 3")
        if not (self.t_final > 0):
            raise ValidationError("need t_final > 0")
        if self.nt < 1:
            raise ValidationError("need nt >= 1")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dt(self) -> float:
        return self.t_final / self.nt

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    def cfl_number(self, band: VolBand) -> float:
        return band.sigma_hi**2 * self.dt / self.dx**2

    @classmethod
    def with_cfl(
        cls,
        band: VolBand,
        x_min: float,
        x_max: float,
        nx: int,
        t_final: float,
        nt: int = 1,
        cfl: float = 0.5,
    ) -> "Grid1D":
        """Grid with ``nt`` raised until ``sigma_hi^2 dt / dx^2 <= cfl``."""
        if not (0 < cfl <= 1.0):
            raise ValidationError("cfl must be in (0, 1]")
        dx = (x_max - x_min) / (nx - 1)
        nt_min = ceil(band.sigma_hi**2 * t_final / (cfl * dx**2))
        return cls(x_min, x_max, nx, t_final, max(nt, nt_min, 1))


@dataclass
class Solution1D:
    """Stored time slices of the solution; level 0 is always the sampled
    initial condition and the last stored slice is the final time."""

    grid: Grid1D
    times: np.ndarray
    u: np.ndarray  # shape (n_stored, nx)

    @property
    def final(self) -> np.ndarray:
        return self.u[-1]

    def value_at(self, x0: float) -> float:
        """Final-time value at ``x0`` by linear interpolation."""
        x = self.grid.x
        if not (x[0] <= x0 <= x[-1]):
            raise ValidationError(f"x0={x0} outside the grid")
        return float(np.interp(x0, x, self.u[-1]))

    def write_csv(self, fh: TextIO) -> None:
        fh.write("t,x,u\n")
        x = self.grid.x
        for row, t in enumerate(self.times):
            for i in range(x.size):
                fh.write(f"{t:.17g},{x[i]:.17g},{self.u[row, i]:.17g}\n")


PayoffLike = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def solve_gheat(
    phi: PayoffLike,
    band: VolBand,
    grid: Grid1D,
    store_every: Optional[int] = None,
) -> Solution1D:
    """March ``u`` forward with the explicit bang-bang stencil.

    ``phi`` is a callable sampled once onto the nodes, or an array of node
    values.  ``store_every=k`` keeps every k-th time level (plus the final
    one); the default keeps only the initial and final levels.
    """
    cfl = grid.cfl_number(band)
    if cfl > 1.0 + 1e-12:
        raise NumericalError(
            f"stability bound violated: sigma_hi^2*dt/dx^2 = {cfl:.4g} > 1; "
            f"rebuild the grid with Grid1D.with_cfl"
        )
    x = grid.x
    u = np.asarray(phi(x) if callable(phi) else phi, dtype=float).copy()
    if u.shape != x.shape:
        raise ValidationError(f"phi must give one value per node, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValidationError("phi must be finite at all nodes")

    if store_every is not None and store_every < 1:
        raise ValidationError("store_every must be >= 1")
    dt = grid.dt
    inv_dx2 = 1.0 / grid.dx**2
    hi2 = band.sigma_hi**2
    lo2 = band.sigma_lo**2

    stored = [u.copy()]
    stored_times = [0.0]
    for n in range(1, grid.nt + 1):
        d2 = (u[2:] - 2.0 * u[1:-1] + u[:-2]) * inv_dx2
        # generator evaluated pointwise: worst-case variance for the sign of d2
        u[1:-1] += dt * 0.5 * np.where(d2 >= 0.0, hi2 * d2, lo2 * d2)
        if np.isnan(u).any():
            i = int(np.argmax(np.isnan(u)))
            raise NumericalError(f"NaN at time level {n} (t={n * dt:.6g}), node {i}")
        if (store_every is not None and n % store_every == 0) or n == grid.nt:
            stored.append(u.copy())
            stored_times.append(n * dt)
    return Solution1D(grid=grid, times=np.asarray(stored_times), u=np.vstack(stored))


def gexpectation_terminal(
    phi: Callable[[np.ndarray], np.ndarray],
    band: VolBand,
    t: float,
    center: float = 0.0,
    nodes_per_width: int = 100,
    pad_widths: float = 8.0,
    cfl: float = 0.5,
) -> float:
    """Upper expectation of ``phi`` of the driver at time ``t`` via the PDE.

    The grid spans ``center +- pad_widths * sigma_hi * sqrt(t)`` with
    ``nodes_per_width`` nodes per diffusion width; the node count is kept
    even so the read-out at ``center`` interpolates between cell centers.
    """
    if not (t > 0):
        raise ValidationError("t must be > 0")
    width = band.sigma_hi * sqrt(t)
    half = pad_widths * width
    nx = 2 * int(round(pad_widths * nodes_per_width))
    grid = Grid1D.with_cfl(band, center - half, center + half, nx, t, cfl=cfl)
    sol = solve_gheat(phi, band, grid)
    return sol.value_at(center)
