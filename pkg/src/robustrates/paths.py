"""Discrete-time simulation of the driver, short rate and money market.

One uniform time grid carries everything: the volatility path, the driving
noise ``B`` (Brownian motion with path-dependent volatility), its running
quadratic variation, the exponentially weighted variance process ``lam``
used as the drift adjustment, the short rate under original or shifted
dynamics, and the money-market account.

Discretization choices (fixed, first order in the stochastic terms):

* mean reversion uses the exact one-step propagator ``exp(-alpha*dt)``;
* the deterministic drift integral is a two-point Gauss-Legendre rule per
  step (exact for the piecewise-linear drifts produced by calibration);
* the noise increment enters with the midpoint kernel weight
  ``exp(-alpha*dt/2)``;
* ``lam`` accumulates quadratic-variation increments with unit weight,
  ``lam[k+1] = exp(-2*alpha*dt) * lam[k] + dqv[k]``;
* the money-market integral is a trapezoid rule (exact for constant rates).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, TextIO, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .band import VolBand
from .errors import ValidationError
from .scenarios import PathView, ScenarioSpec

_INV_SQRT3 = 1.0 / np.sqrt(3.0)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on ``[0, horizon]`` with ``n_steps`` steps."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ValidationError("horizon must be finite and > 0")
        if self.n_steps < 1:
            raise ValidationError("n_steps must be >= 1")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    @property
    def step_times(self) -> np.ndarray:
        """Left endpoints of the steps."""
        return self.times[:-1]

    def index_of(self, t: float) -> int:
        """Grid index of time ``t``; rejects off-grid times."""
        k = t / self.dt
        k_round = int(round(k))
        if not (0 <= k_round <= self.n_steps) or abs(k - k_round) > 1e-9 * max(1, abs(k)):
            raise ValidationError(f"time {t} is not a grid point (dt={self.dt})")
        return k_round


MuLike = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class RateParams:
    """Short-rate parameters: initial level, mean-reversion speed, and the
    deterministic reversion-level function ``mu`` (constant or callable).

    ``mu_breakpoints`` lists interior kinks of ``mu`` (calibrated drifts are
    piecewise linear); quadratures split their panels there so the kinks do
    not degrade accuracy."""

    r0: float
    alpha: float
    mu: MuLike = 0.0
    mu_breakpoints: tuple = ()

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValidationError("alpha must be finite and > 0")
        if not np.isfinite(self.r0):
            raise ValidationError("r0 must be finite")

    def mu_at(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if callable(self.mu):
            out = np.asarray(self.mu(s), dtype=float)
            return np.broadcast_to(out, s.shape).copy() if out.shape != s.shape else out
        return np.full(s.shape, float(self.mu))


@dataclass
class PathBundle:
    """Jointly simulated paths, one row per path, one column per grid point
    (``sigma`` has one column per step)."""

    grid: TimeGrid
    scenario_id: str
    sigma: np.ndarray
    b: np.ndarray
    qv: np.ndarray
    lam: Optional[np.ndarray] = None
    r: Optional[np.ndarray] = None
    d: Optional[np.ndarray] = None

    @property
    def n_paths(self) -> int:
        return self.b.shape[0]

    def write_csv(self, fh: TextIO, path_index: int = 0) -> None:
        """One row per grid point for the selected path; absent components
        are left empty.  The last sigma row repeats the final step value."""
        if not (0 <= path_index < self.n_paths):
            raise ValidationError(f"path_index {path_index} out of range")
        times = self.grid.times
        n = self.grid.n_steps

        def fmt(x):
            return f"{x:.17g}"

        def col(arr, k):
            return "" if arr is None else fmt(arr[path_index, k])

        fh.write("t,sigma,B,qv,lambda,r,D\n")
        for k in range(n + 1):
            sig = self.sigma[path_index, min(k, n - 1)]
            fh.write(
                ",".join(
                    [
                        fmt(times[k]),
                        fmt(sig),
                        fmt(self.b[path_index, k]),
                        fmt(self.qv[path_index, k]),
                        col(self.lam, k),
                        col(self.r, k),
                        col(self.d, k),
                    ]
                )
                + "\n"
            )


def _mu_step_integrals(params: RateParams, grid: TimeGrid) -> np.ndarray:
    """Per-step ``int_{t_k}^{t_{k+1}} exp(-alpha (t_{k+1}-s)) mu(s) ds`` by
    two-point Gauss-Legendre."""
    dt = grid.dt
    t_left = grid.step_times
    off1 = dt * (0.5 - 0.5 * _INV_SQRT3)
    off2 = dt * (0.5 + 0.5 * _INV_SQRT3)
    s1 = t_left + off1
    s2 = t_left + off2
    w1 = np.exp(-params.alpha * (dt - off1))
    w2 = np.exp(-params.alpha * (dt - off2))
    return 0.5 * dt * (w1 * params.mu_at(s1) + w2 * params.mu_at(s2))


def _draw_normals(rng: np.random.Generator, n_paths: int, n_steps: int, antithetic: bool) -> np.ndarray:
    if not antithetic:
        return rng.standard_normal((n_paths, n_steps))
    if n_paths % 2:
        raise ValidationError("antithetic sampling needs an even number of paths")
    half = rng.standard_normal((n_paths // 2, n_steps))
    return np.vstack([half, -half])


def _simulate(
    scenario: ScenarioSpec,
    band: VolBand,
    grid: TimeGrid,
    rng: np.random.Generator,
    n_paths: int,
    *,
    params: Optional[RateParams] = None,
    dynamics: str = "original",
    antithetic: bool = False,
    switch_key: int = 0,
) -> PathBundle:
    """Single-chunk engine.  With ``params`` the short rate, ``lam`` and the
    money market are co-simulated (so feedback rules may read ``r``)."""
    if dynamics not in ("original", "shifted"):
        raise ValidationError(f"unknown dynamics '{dynamics}'")
    scenario.validate(band)

    n = grid.n_steps
    dt = grid.dt
    sq = np.sqrt(dt)
    z = _draw_normals(rng, n_paths, n, antithetic)

    sigma_tab = None
    if not scenario.is_adaptive:
        n_draw = n_paths // 2 if antithetic else n_paths
        tab = scenario.sigma_table(band, grid.step_times, dt, n_draw, switch_key)
        if tab.ndim == 2 and antithetic:
            tab = np.vstack([tab, tab])  # antithetic mate shares the volatility path
        sigma_tab = tab

    sigma = np.empty((n_paths, n))
    b = np.zeros((n_paths, n + 1))
    qv = np.zeros((n_paths, n + 1))

    with_rate = params is not None
    lam = r = None
    if with_rate:
        lam = np.zeros((n_paths, n + 1))
        r = np.empty((n_paths, n + 1))
        r[:, 0] = params.r0
        ea = np.exp(-params.alpha * dt)
        eh = np.exp(-params.alpha * dt / 2.0)
        e2 = np.exp(-2.0 * params.alpha * dt)
        w_lam = -np.expm1(-params.alpha * dt) / params.alpha
        m_det = _mu_step_integrals(params, grid)
        shifted = dynamics == "shifted"

    times = grid.times
    for k in range(n):
        if scenario.is_adaptive:
            # lock the buffers, then hand out prefix slices: the rule sees
            # exactly the history up to the current grid time, read-only
            buffers = (sigma, b, qv) + ((r,) if with_rate else ())
            for arr in buffers:
                arr.setflags(write=False)
            try:
                view = PathView(
                    k, times[k], dt, band,
                    sigma[:, :k], b[:, : k + 1], qv[:, : k + 1],
                    r[:, : k + 1] if with_rate else None,
                )
                sig_k = np.asarray(scenario.step_sigma(view), dtype=float)
            finally:
                for arr in buffers:
                    arr.setflags(write=True)
            if not band.contains(sig_k, tol=1e-12):
                raise ValidationError(
                    f"feedback rule left the band at step {k} "
                    f"(scenario {scenario.scenario_id})"
                )
        else:
            sig_k = sigma_tab[k] if sigma_tab.ndim == 1 else sigma_tab[:, k]

        sigma[:, k] = sig_k
        db = sig_k * sq * z[:, k]
        b[:, k + 1] = b[:, k] + db
        dqv = sig_k**2 * dt
        qv[:, k + 1] = qv[:, k] + dqv
        if with_rate:
            lam[:, k + 1] = e2 * lam[:, k] + dqv
            drift = m_det[k] + (w_lam * lam[:, k] if shifted else 0.0)
            r[:, k + 1] = ea * r[:, k] + drift + eh * db

    bundle = PathBundle(grid, scenario.scenario_id, sigma, b, qv, lam=lam, r=r)
    if with_rate:
        bundle.d = money_market(r, grid)
    return bundle


def simulate_driver(
    scenario: ScenarioSpec,
    band: VolBand,
    grid: TimeGrid,
    seed: int,
    n_paths: int = 1,
    antithetic: bool = False,
) -> PathBundle:
    """Simulate sigma, the driver ``B`` and its quadratic variation only."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    return _simulate(scenario, band, grid, rng, n_paths, antithetic=antithetic)


def simulate_bundle(
    scenario: ScenarioSpec,
    band: VolBand,
    grid: TimeGrid,
    params: RateParams,
    seed: int,
    n_paths: int = 1,
    dynamics: str = "original",
    antithetic: bool = False,
) -> PathBundle:
    """Full bundle: driver plus ``lam``, short rate and money market."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    return _simulate(
        scenario, band, grid, rng, n_paths,
        params=params, dynamics=dynamics, antithetic=antithetic,
    )


def lambda_path(qv: np.ndarray, alpha: float, dt: float) -> np.ndarray:
    """Exponentially weighted accumulation of quadratic-variation increments,
    ``lam[k+1] = exp(-2 alpha dt) lam[k] + dqv[k]``, starting at zero.

    Approximates the kernel integral with decay rate ``2 alpha`` to first
    order in ``dt``; rejects decreasing ``qv``.
    """
    qv = np.asarray(qv, dtype=float)
    squeeze = qv.ndim == 1
    qv2 = np.atleast_2d(qv)
    dqv = np.diff(qv2, axis=-1)
    if np.any(dqv < -1e-15):
        raise ValidationError("quadratic variation path must be nondecreasing")
    e2 = np.exp(-2.0 * alpha * dt)
    lam = np.zeros_like(qv2)
    for k in range(dqv.shape[-1]):
        lam[:, k + 1] = e2 * lam[:, k] + dqv[:, k]
    return lam[0] if squeeze else lam


def _rate_recursion(bundle: PathBundle, params: RateParams, lam: Optional[np.ndarray]) -> np.ndarray:
    grid = bundle.grid
    n = grid.n_steps
    dt = grid.dt
    ea = np.exp(-params.alpha * dt)
    eh = np.exp(-params.alpha * dt / 2.0)
    m_det = _mu_step_integrals(params, grid)
    w_lam = -np.expm1(-params.alpha * dt) / params.alpha
    db = np.diff(bundle.b, axis=1)
    r = np.empty_like(bundle.b)
    r[:, 0] = params.r0
    for k in range(n):
        drift = m_det[k] + (w_lam * lam[:, k] if lam is not None else 0.0)
        r[:, k + 1] = ea * r[:, k] + drift + eh * db[:, k]
    return r


def short_rate_original(bundle: PathBundle, params: RateParams) -> np.ndarray:
    """Short-rate path under the original dynamics (drift ``mu - alpha r``)."""
    return _rate_recursion(bundle, params, None)


def short_rate_shifted(bundle: PathBundle, params: RateParams) -> np.ndarray:
    """Short-rate path under the shifted dynamics (drift ``mu - alpha r + lam``,
    ``lam`` taken at the left point of each step).  Requires ``bundle.lam``."""
    if bundle.lam is None:
        raise ValidationError("shifted dynamics need bundle.lam populated")
    return _rate_recursion(bundle, params, bundle.lam)


def money_market(r: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Account value ``exp(trapezoidal integral of r)``; starts at 1."""
    r = np.asarray(r, dtype=float)
    integral = cumulative_trapezoid(r, dx=grid.dt, axis=-1, initial=0.0)
    return np.exp(integral)
