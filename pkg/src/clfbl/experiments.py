"""Case study, noise sweeps, and the oracles used for verification.

The sweep covers the noise power range (0, p_dl) on a logarithmic grid
with inclusive endpoints p_dl*1e-4 and p_dl*(1-1e-3); per noise level it
records the feasible domain, the solved allocation, and a grid scan of
the loop error and its derivative structure.  The exhaustive integer
search and the seeded Monte Carlo simulation are intentionally
independent of the optimizer's code path.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .fbl import SystemConfig
from .energy import DomainBounds, Infeasible, feasible_domain
from .derivatives import (
    ScanReport,
    _cl_log_eps,
    convexity_scan,
    dl_state,
    scan_columns,
    ul_state,
)
from .optimizer import SolveResult, solve

#: RNG algorithm recorded in Monte Carlo results for reproducibility
GENERATOR_ID = "numpy.random.Generator(PCG64)"

#: normal quantile for a two-sided 99% confidence interval
_Z99 = 2.5758293035489004


@dataclass(frozen=True)
class GridSample:
    n_ul: float
    eps_ul: float
    eps_dl: float
    eps_cl: float
    d_eps_cl_dn: float
    sign_d_eps_cl_dn: int
    d2_eps_cl_dn2: float


@dataclass(frozen=True)
class SweepRecord:
    """Everything recorded for one noise level of a sweep."""

    noise: float
    domain: DomainBounds
    result: SolveResult | Infeasible
    grid: tuple[GridSample, ...]
    scan: ScanReport | Infeasible


def grid_sample(cfg: SystemConfig, n_ul: float) -> GridSample:
    """One scan row recomputed from scratch; used for CSV round-trips.

    Shares the scan's code path exactly, so a value parsed back from a
    CSV and recomputed here is bit-identical.
    """
    cols = scan_columns(cfg, np.asarray([n_ul], dtype=float))
    return GridSample(
        n_ul=float(cols.n_ul[0]),
        eps_ul=float(cols.eps_ul[0]),
        eps_dl=float(cols.eps_dl[0]),
        eps_cl=float(cols.eps_cl[0]),
        d_eps_cl_dn=float(cols.d_eps_cl[0]),
        sign_d_eps_cl_dn=int(cols.sign_d_eps_cl[0]),
        d2_eps_cl_dn2=float(cols.d2_eps_cl[0]),
    )


def record_at_noise(cfg: SystemConfig, grid_points: int = 200) -> SweepRecord:
    """Sweep record for cfg's own noise level."""
    dom = feasible_domain(cfg)
    scan = convexity_scan(cfg, grid_points)
    if isinstance(scan, Infeasible):
        return SweepRecord(cfg.N, dom, scan, (), scan)
    grid = tuple(
        GridSample(
            n_ul=float(scan.n_ul[i]),
            eps_ul=float(scan.eps_ul[i]),
            eps_dl=float(scan.eps_dl[i]),
            eps_cl=float(scan.eps_cl[i]),
            d_eps_cl_dn=float(scan.d_eps_cl[i]),
            sign_d_eps_cl_dn=int(scan.sign_d_eps_cl[i]),
            d2_eps_cl_dn2=float(scan.d2_eps_cl[i]),
        )
        for i in range(len(scan.n_ul))
    )
    return SweepRecord(cfg.N, dom, solve(cfg), grid, scan)


def run_case_study(cfg: SystemConfig, grid_points: int = 500) -> SweepRecord:
    """Single-noise record with a dense grid, suitable for plotting."""
    return record_at_noise(cfg, grid_points)


def noise_grid(p_dl: float, n_points: int) -> np.ndarray:
    """Logarithmic noise grid strictly inside (0, p_dl), endpoints inclusive."""
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points!r}")
    return np.geomspace(p_dl * 1e-4, p_dl * (1.0 - 1e-3), n_points)


def sweep_noise(
    cfg: SystemConfig, n_points: int = 50, grid_points: int = 200
) -> list[SweepRecord]:
    """Per-noise records over the standard (0, p_dl) logarithmic grid."""
    return [
        record_at_noise(replace(cfg, N=float(noise)), grid_points)
        for noise in noise_grid(cfg.p_dl, n_points)
    ]


def grid_search_oracle(cfg: SystemConfig) -> int | Infeasible:
    """Exhaustive integer argmin of eps_cl over the feasible domain.

    Evaluates every integer blocklength (in log space, so deep-tail
    values still order correctly) and returns the smallest argmin.
    Runtime is linear in the domain width.
    """
    dom = feasible_domain(cfg)
    if dom.empty:
        return Infeasible("empty blocklength domain", dom)
    lo = math.ceil(dom.n_lo)
    hi = math.floor(dom.n_hi)
    if lo > hi:
        return Infeasible(f"no integer blocklength in [{dom.n_lo!r}, {dom.n_hi!r}]", dom)
    candidates = np.arange(lo, hi + 1, dtype=float)
    values = _cl_log_eps(cfg, candidates)
    return lo + int(np.argmin(values))  # argmin keeps the first (smallest) tie


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int
    eps_ul: float
    eps_dl: float
    analytic_r_loop: float
    generator: str = GENERATOR_ID

    def contains_analytic(self) -> bool:
        return self.ci_low <= self.analytic_r_loop <= self.ci_high


def monte_carlo_validate(
    cfg: SystemConfig, n_ul: float, trials: int, seed: int
) -> MonteCarloResult:
    """Simulate the closed loop as sequential biased coin flips.

    Each trial first draws the uplink decoding outcome; the downlink coin
    is drawn only for trials whose uplink succeeded (the product law
    makes this equivalent to unconditional simulation).  Returns the
    success fraction with a 99% normal-approximation confidence interval;
    at estimates of exactly 0 or 1, where the normal interval degenerates
    to a point, the exact Clopper-Pearson bound is substituted.
    Deterministic for a given seed.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    eps_ul = ul_state(cfg, n_ul).eps
    eps_dl = dl_state(cfg, n_ul).eps
    rng = np.random.default_rng(seed)
    ul_ok = rng.random(trials) < (1.0 - eps_ul)
    n_ul_ok = int(ul_ok.sum())
    loop_ok = int((rng.random(n_ul_ok) < (1.0 - eps_dl)).sum())
    estimate = loop_ok / trials
    if estimate == 0.0:
        ci_low, ci_high = 0.0, 1.0 - 0.005 ** (1.0 / trials)
    elif estimate == 1.0:
        ci_low, ci_high = 0.005 ** (1.0 / trials), 1.0
    else:
        half = _Z99 * math.sqrt(estimate * (1.0 - estimate) / trials)
        ci_low, ci_high = estimate - half, estimate + half
    return MonteCarloResult(
        estimate=estimate,
        ci_low=ci_low,
        ci_high=ci_high,
        trials=trials,
        seed=seed,
        eps_ul=eps_ul,
        eps_dl=eps_dl,
        analytic_r_loop=(1.0 - eps_ul) * (1.0 - eps_dl),
    )


def config_digest(cfg: SystemConfig) -> str:
    """Stable hash of a configuration, for sweep metadata."""
    parts = ",".join(f"{f.name}={getattr(cfg, f.name)!r}" for f in fields(cfg))
    return hashlib.sha256(parts.encode()).hexdigest()[:16]
