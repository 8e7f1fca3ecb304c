"""Reliability-optimal uplink blocklength allocation.

The loop error eps_cl = eps_ul + eps_dl is convex on the feasible
domain whenever the downlink stays above its capacity threshold
(x_dl > 0 throughout), so the continuous optimum follows from the sign
of its first derivative g at the bounds: left bound if g(n_lo) >= 0,
right bound if g(n_hi) <= 0, otherwise the unique interior root of g,
found by bisection.  The integer allocation is the better of the two
neighbors of the continuous optimum, cross-checked against the boundary
integers, and per-direction error-rate caps are checked afterwards
without altering the choice.

With a downlink weak enough that eps_dl crosses 0.5 inside the domain,
eps_cl is provably non-convex (the Q tail turns concave); g can then be
positive at the left bound and negative at the right (interior maximum),
which is resolved by taking the better boundary and noting it on the
result.  Exotic multi-extremum shapes in that regime are best-effort:
run the validate suites, which compare against exhaustive search, when
operating there.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .fbl import SystemConfig, loop_reliability
from .energy import DomainBounds, Infeasible, feasible_domain, ul_power_of_blocklength
from .derivatives import d_eps_cl_sign, dl_state, loop_log_error, ul_state

#: bisection stops once the bracketing interval is narrower than this (bits)
ROOT_INTERVAL_TOL = 1e-6


class OptimizerCase(enum.Enum):
    """Which branch of the boundary-derivative test located the optimum."""

    LEFT_BOUNDARY = "left"
    RIGHT_BOUNDARY = "right"
    INTERIOR_ROOT = "interior"


@dataclass(frozen=True)
class ContinuousSolution:
    n_ul: float
    case: OptimizerCase
    iterations: int
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[str, ...]


@dataclass(frozen=True)
class SolveResult:
    """Optimal allocation with achieved error rates and reliability."""

    n_ul_cont: float
    n_ul: int
    n_dl: float
    p_ul: float
    eps_ul: float
    eps_dl: float
    eps_cl: float
    r_loop: float
    case: OptimizerCase
    feasible: bool
    iterations: int
    notes: tuple[str, ...] = ()


def optimize_continuous(
    cfg: SystemConfig, domain: DomainBounds | None = None
) -> ContinuousSolution | Infeasible:
    """Locate the continuous minimizer of eps_cl over the feasible domain."""
    dom = feasible_domain(cfg) if domain is None else domain
    if dom.empty:
        return Infeasible("empty blocklength domain", dom)
    s_lo = d_eps_cl_sign(cfg, dom.n_lo)
    s_hi = d_eps_cl_sign(cfg, dom.n_hi)
    if s_lo > 0 and s_hi < 0:
        # interior maximum: possible once the downlink drops below its
        # capacity threshold inside the domain (eps_cl not convex there);
        # the minimum then sits at one of the boundaries
        note = (
            "loop error is not convex on this domain (derivative positive at "
            "the left bound, negative at the right); took the better boundary"
        )
        if loop_log_error(cfg, dom.n_lo) <= loop_log_error(cfg, dom.n_hi):
            return ContinuousSolution(
                dom.n_lo, OptimizerCase.LEFT_BOUNDARY, 0, (note,)
            )
        return ContinuousSolution(
            dom.n_hi, OptimizerCase.RIGHT_BOUNDARY, 0, (note,)
        )
    if s_lo >= 0:
        notes = ()
        if s_hi <= 0:
            notes = (
                "derivative test matched both boundary cases (numerically "
                "flat objective); left bound preferred",
            )
        return ContinuousSolution(dom.n_lo, OptimizerCase.LEFT_BOUNDARY, 0, notes)
    if s_hi <= 0:
        return ContinuousSolution(dom.n_hi, OptimizerCase.RIGHT_BOUNDARY, 0)

    # g(n_lo) < 0 < g(n_hi): bisect the sign change.  Signs are evaluated
    # in log space, so the bracket stays meaningful even where both error
    # rates underflow double precision.
    lo, hi = dom.n_lo, dom.n_hi
    iterations = 0
    while hi - lo > ROOT_INTERVAL_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # interval below float resolution
            break
        iterations += 1
        if d_eps_cl_sign(cfg, mid) >= 0:
            hi = mid
        else:
            lo = mid
    return ContinuousSolution(
        0.5 * (lo + hi), OptimizerCase.INTERIOR_ROOT, iterations
    )


def refine_integer(
    cfg: SystemConfig, n_ul_cont: float, domain: DomainBounds | None = None
) -> int | Infeasible:
    """Integer blocklength minimizing eps_cl among the neighbors of n_ul_cont.

    Candidates floor/ceil are clamped into [ceil(n_lo), floor(n_hi)] so
    the convexity preconditions stay intact; ties break toward the
    smaller blocklength.
    """
    dom = feasible_domain(cfg) if domain is None else domain
    if dom.empty:
        return Infeasible("empty blocklength domain", dom)
    lo_int = math.ceil(dom.n_lo)
    hi_int = math.floor(dom.n_hi)
    if lo_int > hi_int:
        return Infeasible(
            f"no integer blocklength in [{dom.n_lo!r}, {dom.n_hi!r}]", dom
        )
    candidates = sorted(
        {
            min(max(math.floor(n_ul_cont), lo_int), hi_int),
            min(max(math.ceil(n_ul_cont), lo_int), hi_int),
        }
    )
    return min(candidates, key=lambda n: (loop_log_error(cfg, n), n))


def check_feasibility(result: SolveResult, cfg: SystemConfig) -> FeasibilityReport:
    """Check the per-direction error-rate caps on an existing allocation."""
    return _feasibility(result.eps_ul, result.eps_dl, cfg.eps_max)


def _feasibility(eps_ul: float, eps_dl: float, eps_max: float) -> FeasibilityReport:
    violations = []
    if eps_ul > eps_max:
        violations.append("UL")
    if eps_dl > eps_max:
        violations.append("DL")
    return FeasibilityReport(not violations, tuple(violations))


def solve(cfg: SystemConfig) -> SolveResult | Infeasible:
    """End-to-end allocation: domain, continuous optimum, integer refinement.

    Returns an Infeasible marker when the domain holds no (integer)
    blocklength.  A violated error-rate cap does not change the returned
    allocation; it only clears the ``feasible`` flag.
    """
    dom = feasible_domain(cfg)
    if dom.empty:
        return Infeasible("empty blocklength domain", dom)
    cont = optimize_continuous(cfg, dom)
    assert not isinstance(cont, Infeasible)
    refined = refine_integer(cfg, cont.n_ul, dom)
    if isinstance(refined, Infeasible):
        return refined
    # boundary guard: a no-op under convexity, but protects the weak-downlink
    # regime where an interior root need not be the global minimum
    candidates = {refined, math.ceil(dom.n_lo), math.floor(dom.n_hi)}
    n_ul = min(candidates, key=lambda n: (loop_log_error(cfg, n), n))
    ul = ul_state(cfg, n_ul)
    dl = dl_state(cfg, n_ul)
    report = _feasibility(ul.eps, dl.eps, cfg.eps_max)
    return SolveResult(
        n_ul_cont=cont.n_ul,
        n_ul=n_ul,
        n_dl=cfg.n_max - n_ul,
        p_ul=ul_power_of_blocklength(cfg, n_ul),
        eps_ul=ul.eps,
        eps_dl=dl.eps,
        eps_cl=ul.eps + dl.eps,
        r_loop=loop_reliability(ul.eps, dl.eps),
        case=cont.case,
        feasible=report.feasible,
        iterations=cont.iterations,
        notes=cont.notes,
    )
