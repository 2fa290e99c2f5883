"""Zero-coupon bond pricing and its numerical certification.

Two closed forms live here.  The robust price

    P(t,T) = exp(A(t,T) - B(t,T) r_t - B(t,T)^2 lam_t / 2)

is the unique choice making every discounted bond driftless under the
shifted short-rate dynamics, with ``A = -int mu B`` and
``B = (1 - exp(-alpha (T-t))) / alpha``.  The classical constant-volatility
price ``exp(A_sigma - B r_t)`` with ``A_sigma = int (sigma^2 B^2 / 2 - mu B)``
serves as the oracle: under the original dynamics the discounted-bond
expectation equals it scenario by scenario, which is exactly why a single
arbitrage-free price cannot exist when the band is non-degenerate.
``noarb_gap`` measures that spread; ``martingale_check`` verifies the
driftlessness of the robust price under the shifted dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.integrate import simpson

from .band import VolBand
from .errors import ValidationError
from .mc import (
    McConfig,
    ScenarioStat,
    _chunk_sizes,
    _dedupe_ids,
    _mean_se,
    scenario_functional_values,
)
from .paths import RateParams, TimeGrid, _simulate
from .scenarios import Constant, ScenarioSpec

DEFAULT_PANELS = 64


@dataclass(frozen=True)
class BondQuote:
    t: float
    maturity: float
    price: float


@dataclass(frozen=True)
class CheckpointStat:
    t: float
    mean: float
    se: float
    reference: float

    @property
    def passed(self) -> bool:
        return abs(self.mean - self.reference) <= 3.0 * self.se


@dataclass(frozen=True)
class MartingaleReport:
    """Discounted-bond mean at each checkpoint against its time-0 value,
    plus a zero-drift regression and the pathwise terminal identity error."""

    scenario_id: str
    maturity: float
    checkpoints: tuple
    drift_slope: float
    drift_slope_se: float
    drift_intercept: float
    drift_intercept_se: float
    terminal_max_abs_error: float
    dt: float

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checkpoints)

    @property
    def drift_indistinguishable(self) -> bool:
        return (
            abs(self.drift_slope) <= 3.0 * self.drift_slope_se
            and abs(self.drift_intercept) <= 3.0 * self.drift_intercept_se
        )


@dataclass(frozen=True)
class GapReport:
    upper: float
    lower: float
    gap: float
    gap_se: float
    upper_se: float
    lower_se: float
    closed_form_upper: float
    closed_form_lower: float
    closed_form_gap: float
    argmax_scenario: str
    argmin_scenario: str
    per_scenario: tuple

    @property
    def significant(self) -> bool:
        return self.gap > 3.0 * self.gap_se


def _check_interval(t: float, maturity: float) -> None:
    if not (0.0 <= t <= maturity):
        raise ValidationError(f"need 0 <= t <= T, got t={t}, T={maturity}")


def b_factor(alpha: float, t: float, maturity: float):
    """Affine loading ``(1 - exp(-alpha (T-t))) / alpha``; series expansion
    below ``alpha = 1e-8`` so the ``alpha -> 0`` limit ``T - t`` is exact."""
    _check_interval(t, maturity)
    if alpha <= 0:
        raise ValidationError("alpha must be > 0")
    delta = maturity - t
    if alpha < 1e-8:
        x = alpha * delta
        return delta * (1.0 - x / 2.0 + x * x / 6.0)
    return -np.expm1(-alpha * delta) / alpha


def _b_factor_vec(alpha: float, s: np.ndarray, maturity: float) -> np.ndarray:
    return -np.expm1(-alpha * (maturity - s)) / alpha


def _simpson_segmented(f, t: float, maturity: float, breaks, panels: int) -> float:
    """Composite Simpson over ``[t, T]``, with panels split at interior
    breakpoints so kinks of the integrand sit on segment boundaries."""
    cuts = sorted({t, maturity} | {float(c) for c in breaks if t < c < maturity})
    total = maturity - t
    out = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        seg_panels = max(8, int(np.ceil(panels * (b - a) / total)))
        s = np.linspace(a, b, 2 * seg_panels + 1)
        # sample endpoints one ulp inside the segment: the integrand may
        # jump at breakpoints and only the one-sided limit belongs here
        s_eval = s.copy()
        s_eval[0] = np.nextafter(a, b)
        s_eval[-1] = np.nextafter(b, a)
        out += float(simpson(f(s_eval), x=s))
    return out


def a_robust(params: RateParams, t: float, maturity: float, panels: int = DEFAULT_PANELS) -> float:
    """``-int_t^T mu(s) B(s,T) ds`` by composite Simpson."""
    _check_interval(t, maturity)
    if t == maturity:
        return 0.0

    def f(s):
        return params.mu_at(s) * _b_factor_vec(params.alpha, s, maturity)

    return -_simpson_segmented(f, t, maturity, params.mu_breakpoints, panels)


def a_classical(
    params: RateParams, sigma: float, t: float, maturity: float, panels: int = DEFAULT_PANELS
) -> float:
    """``int_t^T (sigma^2 B(s,T)^2 / 2 - mu(s) B(s,T)) ds`` by composite
    Simpson; ``sigma = 0`` reduces it to :func:`a_robust`."""
    _check_interval(t, maturity)
    if sigma < 0:
        raise ValidationError("sigma must be >= 0")
    if t == maturity:
        return 0.0

    def f(s):
        b = _b_factor_vec(params.alpha, s, maturity)
        return 0.5 * sigma**2 * b**2 - params.mu_at(s) * b

    return float(_simpson_segmented(f, t, maturity, params.mu_breakpoints, panels))


def price_robust(
    params: RateParams,
    t: float,
    maturity: float,
    r_t: float,
    lambda_t: float,
    panels: int = DEFAULT_PANELS,
) -> BondQuote:
    """Robust bond price; strictly decreasing in both ``r_t`` and
    ``lambda_t`` for ``t < T`` and exactly 1 at ``t = T``."""
    _check_interval(t, maturity)
    if lambda_t < 0:
        raise ValidationError("lambda_t must be >= 0")
    b = b_factor(params.alpha, t, maturity)
    a = a_robust(params, t, maturity, panels)
    price = float(np.exp(a - b * r_t - 0.5 * b * b * lambda_t))
    return BondQuote(t=t, maturity=maturity, price=price)


def price_classical_hw(
    params: RateParams,
    sigma: float,
    t: float,
    maturity: float,
    r_t: float,
    panels: int = DEFAULT_PANELS,
) -> BondQuote:
    """Constant-volatility bond price ``exp(A_sigma - B r_t)``."""
    b = b_factor(params.alpha, t, maturity)
    a = a_classical(params, sigma, t, maturity, panels)
    return BondQuote(t=t, maturity=maturity, price=float(np.exp(a - b * r_t)))


def _ensure_extremes(band: VolBand, family: Sequence[ScenarioSpec]) -> list[ScenarioSpec]:
    out = list(family)
    for edge in (band.sigma_hi, band.sigma_lo):
        if not any(isinstance(s, Constant) and s.value == edge for s in out):
            out.append(Constant(edge))
    return out


def discount_factor(bundle) -> np.ndarray:
    """Terminal pathwise discount ``exp(-int_0^T r ds)``."""
    return 1.0 / bundle.d[:, -1]


def noarb_gap(
    params: RateParams,
    band: VolBand,
    maturity: float,
    family: Sequence[ScenarioSpec],
    cfg: McConfig,
) -> GapReport:
    """Spread of discounted-bond expectations across scenarios under the
    original dynamics, against the closed-form spread between the classical
    prices at the band edges.  The two extreme constant scenarios are always
    included regardless of the supplied family."""
    cfg = replace(cfg, horizon=maturity)
    scenarios = _ensure_extremes(band, family)
    ids, values = scenario_functional_values(
        discount_factor, band, scenarios, cfg, params=params, dynamics="original"
    )
    stats = []
    for sid, vals in zip(ids, values):
        mean, se = _mean_se(vals)
        stats.append(ScenarioStat(sid, mean, se, vals.size))
    means = np.array([s.mean for s in stats])
    i_up = int(np.argmax(means))
    i_lo = int(np.argmin(means))
    # scenarios share draws, so the gap's error comes from paired differences
    if i_up == i_lo:
        gap_se = 0.0
    else:
        _, gap_se = _mean_se(values[i_up] - values[i_lo])
    cf_up = price_classical_hw(params, band.sigma_hi, 0.0, maturity, params.r0).price
    cf_lo = price_classical_hw(params, band.sigma_lo, 0.0, maturity, params.r0).price
    return GapReport(
        upper=stats[i_up].mean,
        lower=stats[i_lo].mean,
        gap=stats[i_up].mean - stats[i_lo].mean,
        gap_se=gap_se,
        upper_se=stats[i_up].se,
        lower_se=stats[i_lo].se,
        closed_form_upper=cf_up,
        closed_form_lower=cf_lo,
        closed_form_gap=cf_up - cf_lo,
        argmax_scenario=stats[i_up].scenario_id,
        argmin_scenario=stats[i_lo].scenario_id,
        per_scenario=tuple(stats),
    )


def _ols_with_se(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Least-squares line fit; returns slope, slope se, intercept, intercept se."""
    n = x.size
    xm = x - x.mean()
    sxx = float(np.dot(xm, xm))
    slope = float(np.dot(xm, y) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = max(n - 2, 1)
    s2 = float(np.dot(resid, resid) / dof)
    slope_se = np.sqrt(s2 / sxx)
    intercept_se = np.sqrt(s2 * (1.0 / n + x.mean() ** 2 / sxx))
    return slope, slope_se, intercept, intercept_se


def martingale_check(
    params: RateParams,
    band: VolBand,
    scenarios: Sequence[ScenarioSpec],
    maturity: float,
    checkpoints: Sequence[float],
    cfg: McConfig,
    dynamics: str = "shifted",
) -> list[MartingaleReport]:
    """Per scenario: simulate the short rate (shifted dynamics by default),
    form the discounted robust price along the path and test that its mean
    at every checkpoint equals the time-0 price.

    Also runs a zero-drift regression of per-step mean increments against
    time and evolves the discounted price through its driftless stochastic
    representation to measure the pathwise terminal identity
    ``P(T,T) = 1`` up to discretization error.

    Passing ``dynamics="original"`` yields the adversarial fixture: under a
    non-degenerate band the edge scenarios must fail, which is the power
    check for this test.
    """
    grid = TimeGrid(maturity, cfg.n_steps)
    cp = sorted(float(t) for t in checkpoints)
    cp_idx = [grid.index_of(t) for t in cp]  # rejects off-grid checkpoints

    times = grid.times
    dt = grid.dt
    # affine coefficients along the grid (A is a quadrature per grid time)
    b_vec = _b_factor_vec(params.alpha, times, maturity)
    a_vec = np.array([a_robust(params, float(t), maturity) for t in times])
    p0 = float(np.exp(a_vec[0] - b_vec[0] * params.r0))  # lam_0 = 0, D_0 = 1

    ids = _dedupe_ids(scenarios)
    reports = []
    for spec, sid in zip(scenarios, ids):
        spec.validate(band)
        sum_inc = np.zeros(grid.n_steps)
        cp_sum = np.zeros(len(cp_idx))
        cp_sumsq = np.zeros(len(cp_idx))
        terminal_err = 0.0
        n_paths_done = 0
        n_samples = 0
        for ci, m in enumerate(_chunk_sizes(cfg.n_paths)):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=cfg.base_seed, spawn_key=(ci,))
            )
            bundle = _simulate(
                spec, band, grid, rng, m,
                params=params, dynamics=dynamics,
                antithetic=cfg.antithetic, switch_key=ci,
            )
            log_disc = (
                a_vec[None, :]
                - b_vec[None, :] * bundle.r
                - 0.5 * b_vec[None, :] ** 2 * bundle.lam
                - np.log(bundle.d)
            )
            p_tilde = np.exp(log_disc)
            cp_vals = p_tilde[:, cp_idx]
            if cfg.antithetic:
                # checkpoint error bars over antithetic pair means
                cp_vals = 0.5 * (cp_vals[: m // 2] + cp_vals[m // 2 :])
            sum_inc += np.diff(p_tilde, axis=1).sum(axis=0)
            cp_sum += cp_vals.sum(axis=0)
            cp_sumsq += (cp_vals * cp_vals).sum(axis=0)
            # driftless representation: d(log ptilde) = -B dB - B^2 dqv / 2
            db = np.diff(bundle.b, axis=1)
            dqv = np.diff(bundle.qv, axis=1)
            dlog = -b_vec[None, :-1] * db - 0.5 * b_vec[None, :-1] ** 2 * dqv
            p_sde = p0 * np.exp(np.sum(dlog, axis=1))
            terminal_err = max(terminal_err, float(np.max(np.abs(p_sde * bundle.d[:, -1] - 1.0))))
            n_paths_done += m
            n_samples += cp_vals.shape[0]

        rows = []
        for j, t_cp in enumerate(cp):
            mean = cp_sum[j] / n_samples
            var = max(cp_sumsq[j] / n_samples - mean**2, 0.0)
            se = float(np.sqrt(var / max(n_samples - 1, 1)))
            rows.append(CheckpointStat(t=t_cp, mean=float(mean), se=se, reference=p0))
        mean_inc = sum_inc / n_paths_done
        slope, slope_se, intercept, intercept_se = _ols_with_se(grid.step_times, mean_inc)
        reports.append(
            MartingaleReport(
                scenario_id=sid,
                maturity=maturity,
                checkpoints=tuple(rows),
                drift_slope=slope,
                drift_slope_se=slope_se,
                drift_intercept=intercept,
                drift_intercept_se=intercept_se,
                terminal_max_abs_error=terminal_err,
                dt=dt,
            )
        )
    return reports
