"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line in the terminal summary (via the
``record`` fixture) and then asserts, so a failure is both visible in the
summary and reported by pytest.
"""

import math
import time

import numpy as np
import pytest

from bsmirror import analytic, feedback, fock, modes, semiclassical
from bsmirror.config import OpticalConfig, VacuumWeights, sql_baseline

N_TUPLES = 1000
RTOL = 1e-12


def random_configs(seed=20240517, n=N_TUPLES):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        w = VacuumWeights(*rng.uniform(0.0, 3.0, size=3))
        k = rng.uniform(0.5, 5.0)
        out.append(OpticalConfig(
            T=rng.uniform(0.0, 1.0), k=k, omega=rng.uniform(0.0, 4.0),
            z1=rng.uniform(0.0, 2 * math.pi) / k, z2=rng.uniform(0.0, 2 * math.pi) / k,
            Z1=rng.uniform(0.0, 5.0), Z2=rng.uniform(0.0, 5.0),
            alpha=complex(*rng.normal(0.0, 2.0, size=2)),
            E_unit=rng.uniform(0.5, 2.0), weights=w,
        ))
    return out


def rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def test_identity_suite(record):
    cfgs = random_configs()
    start = time.perf_counter()
    worst = 0.0
    for cfg in cfgs:
        worst = max(worst,
                    rel_err(analytic.variance_e1_raw(cfg), analytic.variance_e1(cfg).total),
                    rel_err(analytic.variance_e2_raw(cfg), analytic.variance_e2(cfg).total))
    elapsed = time.perf_counter() - start
    ok = worst <= RTOL and elapsed < 1.0
    record("1 rewritten variance forms agree", ok, f"worst rel {worst:.2e}, {elapsed:.3f} s")
    assert worst <= RTOL
    assert elapsed < 1.0


def test_mode_algebra_matches_closed_forms(record):
    cfgs = random_configs()
    start = time.perf_counter()
    worst_var = worst_mean = 0.0
    for i, cfg in enumerate(cfgs):
        state = modes.port_state(cfg)
        t = 0.37 * i
        worst_var = max(worst_var,
                        rel_err(modes.variance(modes.build_field_e1(cfg, t), state), analytic.variance_e1(cfg).total),
                        rel_err(modes.variance(modes.build_field_e2(cfg, t), state), analytic.variance_e2(cfg).total))
    for cfg in cfgs[:32]:
        state = modes.port_state(cfg)
        period = 2 * math.pi / cfg.omega if cfg.omega > 0 else 1.0
        scale = math.sqrt(2.0) * cfg.E_unit * abs(cfg.alpha)
        for t in np.linspace(0.0, period, 32, endpoint=False):
            for build, ref in ((modes.build_field_e1, analytic.mean_field_e1),
                               (modes.build_field_e2, analytic.mean_field_e2)):
                got = modes.mean(build(cfg, float(t)), state)
                worst_mean = max(worst_mean, abs(got - ref(cfg, float(t))) / max(scale, 1e-300))
    elapsed = time.perf_counter() - start
    ok = worst_var <= RTOL and worst_mean <= RTOL and elapsed < 1.0
    record("2 mode algebra matches closed forms", ok,
           f"variance rel {worst_var:.2e}, mean rel {worst_mean:.2e}, {elapsed:.3f} s")
    assert worst_var <= RTOL
    assert worst_mean <= RTOL
    assert elapsed < 1.0


def test_fock_oracle_agreement(record):
    start = time.perf_counter()
    spec = fock.TruncationSpec(("b", "a1", "a2"), 40)
    worst = 0.0
    for a in (0.5, 1.0, 2.0):
        for T, kz in ((0.5, 0.0), (0.5, math.pi / 4), (0.3, math.pi / 2), (0.8, 1.1)):
            cfg = OpticalConfig(T=T, k=1.0, omega=1.3, z1=kz, z2=kz + 0.4, Z1=0.2, Z2=0.9,
                                alpha=a * complex(math.cos(0.7), math.sin(0.7)))
            state = fock.build_coherent({"b": cfg.alpha}, spec)
            mstate = modes.port_state(cfg)
            for form in (modes.build_field_e1(cfg, 0.4), modes.build_field_e2(cfg, 0.4)):
                worst = max(worst,
                            abs(fock.field_variance(form, state) - modes.variance(form, mstate)),
                            abs(fock.field_mean(form, state) - modes.mean(form, mstate)))
    alphas = (0.5, 1.0, 1.5, 2.0)
    slopes = {}
    for kz, expected in ((0.0, 0.5), (math.pi / 4, 0.75), (math.pi / 2, 1.0)):
        values = []
        for a in alphas:
            cfg = OpticalConfig(T=0.5, k=1.0, z1=kz, alpha=a)
            form = modes.build_detector_mirror(cfg, 0.0)
            pspec = fock.TruncationSpec(form.modes, 40)
            values.append(fock.photocurrent_variance_exact(form, fock.build_coherent({"bF": a}, pspec)))
        slopes[expected] = fock.alpha_sq_slope(alphas, values)
    elapsed = time.perf_counter() - start
    slope_ok = all(abs(s - e) <= 0.02 * e for e, s in slopes.items())
    ok = worst <= 1e-8 and slope_ok and elapsed < 60.0
    shown = ", ".join(f"{s:.6f}" for s in slopes.values())
    record("3 truncated number basis agrees", ok, f"worst abs {worst:.2e}, slopes [{shown}], {elapsed:.1f} s")
    assert worst <= 1e-8
    assert slope_ok
    assert elapsed < 60.0


def test_monte_carlo_convergence(record):
    start = time.perf_counter()
    base = OpticalConfig(k=1.0, alpha=1.0)
    cells = semiclassical.convergence_suite(semiclassical.EnsembleSpec(1_000_000, seed=42), base=base)
    passed = sum(c.passed for c in cells)

    control = semiclassical.EnsembleSpec(1_000_000, seed=43, decorrelate_phases=True)
    zs = [i * math.pi / 16 for i in range(16)]
    pts = semiclassical.scan_mc(base.with_(T=0.5), control, zs)
    _, B, _, se_B = semiclassical.fit_standing_modulation(
        zs, [p.stats.variance for p in pts], [p.stats.standard_error_of_variance for p in pts], 1.0)
    elapsed = time.perf_counter() - start

    control_ok = abs(B) <= 3.0 * se_B
    ok = passed >= 15 and control_ok and elapsed < 120.0
    record("4 phase ensemble converges to closed form", ok,
           f"{passed}/16 cells within 5 sigma, control B = {B:.2e} +- {se_B:.1e}, {elapsed:.1f} s")
    assert passed >= 15
    assert control_ok
    assert elapsed < 120.0


def test_sub_sql_node(record):
    cfg = OpticalConfig(T=0.5, k=2 * math.pi)
    scan = analytic.scan_variance(cfg, "a1", analytic.linear_grid(0.0, 1.0, 401))
    sql = sql_baseline(cfg)
    totals = scan.totals
    z = scan.z
    lo, hi = totals.argmin(), totals.argmax()
    min_ok = abs(totals[lo] - 0.5 * sql) <= 1e-12 and abs(math.sin(cfg.k * z[lo])) < 1e-9
    max_ok = abs(totals[hi] - 1.5 * sql) <= 1e-12 and abs(math.cos(cfg.k * z[hi])) < 1e-9
    record("5 node variance half the SQL, antinode 1.5x", min_ok and max_ok,
           f"min {totals[lo] / sql:.15f} sql at z={z[lo]}, max {totals[hi] / sql:.15f} sql at z={z[hi]}")
    assert min_ok and max_ok


def test_conservation(record):
    worst = 0.0
    for cfg in random_configs(seed=7):
        sql = sql_baseline(cfg)
        if cfg.T > 0:
            worst = max(worst, rel_err(analytic.variance_e1(cfg).traveling / cfg.T, sql))
        if cfg.R > 0:
            worst = max(worst, rel_err(analytic.variance_e2(cfg).traveling / cfg.R, sql))
    record("6 traveling share conserved", worst <= RTOL, f"worst rel {worst:.2e}")
    assert worst <= RTOL


@pytest.mark.parametrize("T", [0.25, 0.5, 0.75])
def test_photocurrent_contrast(record, T):
    alpha = 1.7 - 0.4j
    a2 = abs(alpha) ** 2
    base = OpticalConfig(T=T, k=1.0, alpha=alpha)
    open_value = analytic.photocurrent_variance_open(a2, T)
    node = analytic.photocurrent_variance_mirror(base.with_(z1=0.0)).total
    anti = analytic.photocurrent_variance_mirror(base.with_(z1=math.pi / 2)).total
    errs = (rel_err(open_value, 2 * T * a2), rel_err(node / open_value, T), rel_err(anti / open_value, 1.0))
    ok = max(errs) <= RTOL
    record(f"7 photocurrent ratios at T={T}", ok,
           f"node/open {node / open_value:.15f}, antinode/open {anti / open_value:.15f}")
    assert ok


def test_feedback_model(record):
    start = time.perf_counter()
    cfg = OpticalConfig(T=0.5, k=1.0, alpha=10.0)
    gains = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e3, 1e4, 1e6]
    sweep = feedback.gain_sweep(cfg, feedback.FeedbackSpec(probe_z1=0.0, out_probe_z2=0.0), gains)
    exact = sweep[0].out_a2_variance == analytic.variance_e2(cfg.with_(z1=0.0, z2=0.0)).total
    monotone = all(b.out_a2_variance <= a.out_a2_variance and b.inloop_variance <= a.inloop_variance
                   for a, b in zip(sweep, sweep[1:]))
    node_ratio = sweep[-1].sql / sweep[-1].out_a2_variance
    anti = feedback.run_loop(cfg, feedback.FeedbackSpec(1e6, 0.0, math.pi / 2))
    elapsed = time.perf_counter() - start
    ok = exact and monotone and node_ratio >= 10.0 and anti.out_a2_variance >= anti.sql and elapsed < 1.0
    record("8 feedback squashes only at out-of-loop nodes", ok,
           f"sql/out at node {node_ratio:.3g}, antinode out/sql {anti.out_a2_variance / anti.sql:.3f}, "
           f"{elapsed * 1e3:.1f} ms")
    assert exact
    assert monotone
    assert node_ratio >= 10.0
    assert anti.out_a2_variance >= anti.sql
    assert elapsed < 1.0
