"""Acceptance gate: one test per criterion, one printed verdict line each.

Run with `pytest tests/test_acceptance.py -v -s` to see every verdict.

Criterion 2 asserts, verbatim, that eps_ul is non-increasing across the
whole feasible domain at every sweep noise level.  That claim is
mathematically false for this model: at gamma_ul = 1 the sign of
d eps_ul/d n_ul is that of -(4*ln2*d + n*(8*ln2 - 6)), so once
eta > 4*ln2*d/(6 - 8*ln2) (~48.77 for d = 8) the uplink error rate turns
upward before the 0 dB bound.  Confirmed three independent ways:
symbolic differentiation of the error model, 60-digit direct evaluation
(eps_ul(49) = 2.5551e-7 < eps_ul(54.167) = 2.5753e-7 at the reference
setup, interior minimum near n = 49.385), and agreement of the
exhaustive integer oracle with the bisection solver on n_ul = 49.  The
criterion is therefore expected to fail on the uplink half; it is kept
faithful rather than weakened.  Criterion 3 (convexity), which is what
the optimizer actually relies on, holds everywhere.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from clfbl import (
    SystemConfig,
    UpperBound,
    delta_ul,
    fd_derivative,
    feasible_domain,
    grid_search_oracle,
    loop_log_error,
    monte_carlo_validate,
    solve,
    sweep_noise,
)
from clfbl.cli import main as cli_main
from clfbl.derivatives import (
    _dl_eps,
    _ul_eps,
    d_eps_dl_dn,
    d_eps_ul_dn,
    dl_state,
    ul_state,
)
from clfbl.energy import Infeasible

from conftest import TABLE1

LN2 = math.log(2.0)
SWEEP_POINTS = 50
GRID_POINTS = 200


def _verdict(ok: bool, criterion: int, text: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {text}")


@pytest.fixture(scope="session")
def table1_cfg() -> SystemConfig:
    return SystemConfig(**TABLE1)


@pytest.fixture(scope="session")
def sweep(table1_cfg):
    """The criterion-2 sweep, shared by criteria 2-5 and 7."""
    start = time.perf_counter()
    records = sweep_noise(table1_cfg, SWEEP_POINTS, GRID_POINTS)
    elapsed = time.perf_counter() - start
    assert all(not isinstance(r.scan, Infeasible) for r in records)
    return records, elapsed


def test_criterion_1_domain_reproduction(table1_cfg):
    start = time.perf_counter()
    for _ in range(100):
        dom = feasible_domain(table1_cfg)
    per_call = (time.perf_counter() - start) / 100.0
    ok = (
        dom.n_lo == 9.0
        and abs(dom.n_hi - 54.1667) <= 1e-3
        and dom.binding_hi is UpperBound.SNR_BOUND
        and per_call < 1e-3
    )
    _verdict(
        ok, 1,
        f"n_lo={dom.n_lo}, n_hi={dom.n_hi:.4f} (SNR bound, vs n_max-d="
        f"{table1_cfg.n_max - table1_cfg.d:.0f}), {per_call * 1e6:.1f} us/call",
    )
    assert ok


def test_criterion_2_sign_structure(sweep):
    records, build_time = sweep
    start = time.perf_counter()
    ul_bad = [r.noise for r in records if not r.scan.ul_monotone_ok]
    dl_bad = [r.noise for r in records if not r.scan.dl_monotone_ok]
    elapsed = build_time + time.perf_counter() - start
    ok = not ul_bad and not dl_bad and elapsed < 10.0
    _verdict(
        ok, 2,
        f"eps_dl strictly increasing at {SWEEP_POINTS}/{SWEEP_POINTS} noise "
        f"points; eps_ul non-increasing at {SWEEP_POINTS - len(ul_bad)}/"
        f"{SWEEP_POINTS} ({elapsed:.2f} s)",
    )
    assert not dl_bad, f"downlink monotonicity violated at N={dl_bad[:3]}"
    assert not ul_bad, (
        "eps_ul is NOT non-increasing across the domain at "
        f"{len(ul_bad)} of {SWEEP_POINTS} noise points "
        f"(N from {min(ul_bad):.3e} to {max(ul_bad):.3e} W): the uplink "
        "error rate has an interior minimum whenever eta > 4*ln2*d/(6-8*ln2) "
        "~ 48.77, e.g. at N=3e-3 W eps_ul rises from 2.5550e-7 (n=49.385) "
        "to 2.5753e-7 (n=54.167).  See the module docstring; this is a "
        "defect of the claimed sign structure, not of the implementation."
    )
    assert elapsed < 10.0


def test_criterion_3_convexity(sweep):
    records, build_time = sweep
    start = time.perf_counter()
    bad = [
        (r.noise, v.n_ul, v.value)
        for r in records
        for v in r.scan.violations_of("cl_second_derivative_not_positive")
    ]
    smallest = min(float(np.min(r.scan.convexity_indicator)) for r in records)
    elapsed = build_time + time.perf_counter() - start
    ok = not bad and elapsed < 30.0
    _verdict(
        ok, 3,
        f"second derivative of eps_cl positive at all {SWEEP_POINTS}x"
        f"{GRID_POINTS} grid points (smallest indicator {smallest:.3e}, "
        f"{elapsed:.2f} s)",
    )
    assert not bad, f"convexity violations: {bad[:5]}"
    assert elapsed < 30.0


def test_criterion_4_derivative_fidelity(table1_cfg, sweep):
    records, _ = sweep
    start = time.perf_counter()
    worst = 0.0
    checked_ul = checked_dl = 0
    for record in records:
        cfg = dataclasses.replace(table1_cfg, N=record.noise)
        for n in record.scan.n_ul[::4]:
            n = float(n)
            h = min(max(1e-4, 1e-3 * n), (cfg.n_max - n) / 4.0)
            if abs(ul_state(cfg, n).x) <= 8.0:
                fd = fd_derivative(lambda m: float(_ul_eps(cfg, m)), n, 1, h=h)
                err = abs(d_eps_ul_dn(cfg, n) - fd) / max(1.0, abs(fd))
                worst = max(worst, err)
                checked_ul += 1
            if abs(dl_state(cfg, n).x) <= 8.0:
                fd = fd_derivative(lambda m: float(_dl_eps(cfg, m)), n, 1, h=h)
                err = abs(d_eps_dl_dn(cfg, n) - fd) / max(1.0, abs(fd))
                worst = max(worst, err)
                checked_dl += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and checked_ul > 0 and elapsed < 30.0
    _verdict(
        ok, 4,
        f"|analytic - FD| <= 1e-6 at {checked_ul} uplink and {checked_dl} "
        f"downlink well-conditioned points, worst {worst:.3e} ({elapsed:.2f} s)",
    )
    assert worst <= 1e-6
    assert checked_ul > 0
    assert elapsed < 30.0


def test_criterion_5_optimizer_correctness(table1_cfg, sweep):
    records, _ = sweep
    start = time.perf_counter()
    mismatches = []
    for record in records:
        cfg = dataclasses.replace(table1_cfg, N=record.noise)
        result, oracle = record.result, grid_search_oracle(cfg)
        if isinstance(result, Infeasible) or isinstance(oracle, Infeasible):
            continue
        if result.n_ul != oracle and loop_log_error(cfg, result.n_ul) != (
            loop_log_error(cfg, oracle)
        ):
            mismatches.append((record.noise, result.n_ul, oracle))

    rng = np.random.default_rng(20260811)
    randomized = 0
    while randomized < 50:
        try:
            cfg = SystemConfig(
                d=float(rng.integers(8, 65)),
                f_s=250e3,
                M=1.0,
                E=10.0 ** rng.uniform(-8, -5),
                p_dl=10.0 ** rng.uniform(-4, 0),
                N=10.0 ** rng.uniform(-6, -1),
                n_max=float(rng.integers(500, 5001)),
            )
        except ValueError:
            continue
        dom = feasible_domain(cfg)
        if dom.empty or math.ceil(dom.n_lo) > math.floor(dom.n_hi):
            continue
        randomized += 1
        result, oracle = solve(cfg), grid_search_oracle(cfg)
        if result.n_ul != oracle and loop_log_error(cfg, result.n_ul) != (
            loop_log_error(cfg, oracle)
        ):
            mismatches.append((cfg, result.n_ul, oracle))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 60.0
    _verdict(
        ok, 5,
        f"solve == exhaustive oracle on {SWEEP_POINTS} sweep points and "
        f"{randomized} randomized configs ({elapsed:.2f} s)",
    )
    assert not mismatches, f"optimizer/oracle mismatches: {mismatches[:5]}"
    assert elapsed < 60.0


def test_criterion_6_delta_anchor():
    expected = (16.0 * LN2 - 8.0) / 4.0
    value = delta_ul(1.0)
    ok = abs(value - expected) <= 1e-12
    _verdict(ok, 6, f"delta(gamma=1) = {value!r} vs (16*ln2-8)/4 = {expected!r}")
    assert ok


def test_criterion_7_approximation_audit(sweep):
    records, _ = sweep
    worst_residual = 0.0
    product_violations = []
    for record in records:
        for s in record.grid:
            r_loop = (1.0 - s.eps_ul) * (1.0 - s.eps_dl)
            residual = abs((1.0 - r_loop) - s.eps_cl + s.eps_ul * s.eps_dl)
            scale = max(1.0, s.eps_cl, 1.0 - r_loop)
            worst_residual = max(worst_residual, residual / scale)
            if s.eps_cl < 0.1 and s.eps_ul * s.eps_dl > 1e-2 * s.eps_cl:
                product_violations.append((record.noise, s.n_ul))
    ok = worst_residual <= 1e-15 and not product_violations
    _verdict(
        ok, 7,
        f"identity residual <= 1e-15 (worst {worst_residual:.3e}) and "
        "eps_ul*eps_dl negligible against eps_cl on every sweep point",
    )
    assert worst_residual <= 1e-15
    assert not product_violations


def test_criterion_8_monte_carlo(table1_cfg):
    start = time.perf_counter()
    cfg = dataclasses.replace(table1_cfg, N=6e-3)
    n_ul = 9.0
    eps_cl = ul_state(cfg, n_ul).eps + dl_state(cfg, n_ul).eps
    assert 3e-3 <= eps_cl <= 3e-2  # operating point with eps_cl ~ 1e-2
    hits = sum(
        monte_carlo_validate(cfg, n_ul, 1_000_000, seed).contains_analytic()
        for seed in range(10)
    )
    elapsed = time.perf_counter() - start
    ok = hits >= 9 and elapsed < 30.0
    _verdict(
        ok, 8,
        f"analytic r_loop inside the 99% CI for {hits}/10 seeded runs of 1e6 "
        f"trials at eps_cl={eps_cl:.3e} ({elapsed:.2f} s)",
    )
    assert hits >= 9
    assert elapsed < 30.0


def test_criterion_9_determinism(tmp_path):
    outputs = []
    for sub in ("first", "second"):
        out_dir = tmp_path / sub
        code = cli_main([
            "sweep", "table1", "--out-dir", str(out_dir),
            "--sweep-points", "12", "--grid-points", "40",
        ])
        assert code == 0
        outputs.append({
            name: (out_dir / name).read_bytes()
            for name in ("sweep_grid.csv", "sweep_summary.csv", "sweep_meta.json")
        })
    ok = outputs[0] == outputs[1]
    _verdict(ok, 9, "repeated sweep invocations are byte-identical")
    assert ok
