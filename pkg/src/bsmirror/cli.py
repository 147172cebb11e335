"""Command-line front end.

Exit codes: 0 pass, 1 validation failure, 2 usage, 3 config, 4 truncation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import analytic, feedback, fock, modes, semiclassical
from .config import CONFIG_KEYS, OpticalConfig
from .errors import ConfigError, DimensionCap, EmptyRange, NegativeGain, TruncationInsufficient

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONFIG, EXIT_TRUNCATION = 0, 1, 2, 3, 4

FOCK_ALPHA_MAX = 2.0
FOCK_FIELD_TOL = 1e-8
SLOPE_ALPHAS = (0.5, 1.0, 1.5, 2.0)
SLOPE_RTOL = 0.02


class Failure(Exception):
    """Raised to leave with a specific exit code and message."""

    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("optical configuration (overrides --config)")
    g.add_argument("--config", type=Path, help="flat JSON config file")
    for key in CONFIG_KEYS:
        flags = [f"--{key}"]
        if "_" in key:
            flags.append(f"--{key.replace('_', '-')}")
        g.add_argument(*flags, dest=f"cfg_{key}", type=float, default=None, metavar="X")


def _config(args: argparse.Namespace, **defaults: float) -> OpticalConfig:
    data: dict[str, float] = dict(defaults)
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise Failure(EXIT_CONFIG, f"cannot read config: {exc}") from None
        OpticalConfig.from_json(text)  # rejects unknown keys and bad values
        data.update(json.loads(text))
    for key in CONFIG_KEYS:
        value = getattr(args, f"cfg_{key}")
        if value is not None:
            data[key] = value
    return OpticalConfig.from_mapping(data)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def _summary_stream(output: Path | None):
    # data goes to stdout when no file is given, so keep the summary apart
    return sys.stdout if output is not None else sys.stderr


# --- scan ----------------------------------------------------------------------


def cmd_scan(args: argparse.Namespace) -> int:
    cfg = _config(args)
    zs = analytic.linear_grid(args.z_min, args.z_max, args.steps)
    result = analytic.scan_variance(cfg, args.port, zs)
    _emit(result.to_json() + "\n" if args.format == "json" else result.to_csv(), args.output)
    totals = result.totals
    out = _summary_stream(args.output)
    print(f"port {args.port}: {len(zs)} points, sql {analytic.fmt(result.points[0][1].sql)}", file=out)
    print(f"min total {analytic.fmt(totals.min())}  max total {analytic.fmt(totals.max())}", file=out)
    print("nodes: " + ", ".join(analytic.fmt(z) for z in result.nodes), file=out)
    print("antinodes: " + ", ".join(analytic.fmt(z) for z in result.antinodes), file=out)
    print(f"sub-SQL points: {sum(r.sub_sql for _, r in result.points)}", file=out)
    return EXIT_OK


def photocurrent_rows(cfg: OpticalConfig, zs: Sequence[float]) -> list[dict]:
    open_value = analytic.photocurrent_variance_open_matched(cfg)
    rows = []
    for z in zs:
        rep = analytic.photocurrent_variance_mirror(cfg.with_(z1=z))
        ratio = rep.total / open_value if open_value > 0 else math.nan
        rows.append({"z": z, "mirror_total": rep.total, "carrier_term": rep.carrier_term,
                     "standing_term": rep.standing_term, "open": open_value, "ratio": ratio})
    return rows


def cmd_scan_photocurrent(args: argparse.Namespace) -> int:
    cfg = _config(args)
    zs = analytic.linear_grid(args.z_min, args.z_max, args.steps)
    rows = photocurrent_rows(cfg, zs)
    fields = ("z", "mirror_total", "carrier_term", "standing_term", "open", "ratio")
    if args.format == "json":
        text = json.dumps({"rows": rows}, indent=2) + "\n"
    else:
        text = ",".join(fields) + "\n" + "".join(
            ",".join(analytic.fmt(r[f]) for f in fields) + "\n" for r in rows)
    _emit(text, args.output)
    out = _summary_stream(args.output)
    ratios = [r["ratio"] for r in rows]
    print(f"mirror/open ratio: min {analytic.fmt(min(ratios))} max {analytic.fmt(max(ratios))}", file=out)
    return EXIT_OK


# --- validation suites ---------------------------------------------------------


def mc_suite(cfg_base: OpticalConfig, n: int, seed: int, decorrelate: bool,
             amplitude_model: str = "fixed", workers: int = 1) -> dict:
    spec = semiclassical.EnsembleSpec(n, seed, amplitude_model, decorrelate, workers)
    cells = semiclassical.convergence_suite(spec, base=cfg_base)
    failures = sum(not c.passed for c in cells)
    allowed = semiclassical.allowed_failures(len(cells))

    # modulation check at T = 1/2 over one period of sin^2
    mod_cfg = cfg_base.with_(T=0.5)
    zs = [i * math.pi / (16 * mod_cfg.k) for i in range(16)]
    mod_spec = semiclassical.EnsembleSpec(n, seed + 1, amplitude_model, decorrelate, workers)
    pts = semiclassical.scan_mc(mod_cfg, mod_spec, zs)
    A, B, se_A, se_B = semiclassical.fit_standing_modulation(
        zs, [p.stats.variance for p in pts], [p.stats.standard_error_of_variance for p in pts], mod_cfg.k)
    expected_B = 2.0 * mod_cfg.R * mod_cfg.weights.v_1sq * mod_cfg.E_unit**2
    modulation_ok = abs(B - expected_B) < semiclassical.SIGMA_LIMIT * se_B and abs(B) > 3.0 * se_B
    return {
        "n": n, "seed": seed, "decorrelate_phases": decorrelate,
        "cells": [c.__dict__ for c in cells],
        "failures": failures, "allowed_failures": allowed,
        "modulation": {"A": A, "B": B, "se_A": se_A, "se_B": se_B, "expected_B": expected_B,
                       "passed": bool(modulation_ok)},
        "passed": bool(failures <= allowed and modulation_ok),
    }


def cmd_mc_validate(args: argparse.Namespace) -> int:
    if args.n < 10_000:
        raise Failure(EXIT_USAGE, "mc-validate needs --n >= 10000")
    cfg = _config(args, alpha_re=1.0)
    res = mc_suite(cfg, args.n, args.seed, args.decorrelate_phases, args.amplitude_model, args.workers)
    print(f"{'T':>5} {'kz':>8} {'mc':>12} {'stderr':>10} {'analytic':>12}  result")
    for c in res["cells"]:
        print(f"{c['T']:5.2f} {c['kz']:8.4f} {c['mc']:12.6f} {c['stderr']:10.2e} {c['analytic']:12.6f}  "
              f"{'pass' if c['passed'] else 'FAIL'}")
    m = res["modulation"]
    print(f"failures {res['failures']} (allowed {res['allowed_failures']})")
    print(f"sin^2 modulation B = {m['B']:.6f} +- {m['se_B']:.2e} (expected {m['expected_B']:.6f}): "
          f"{'pass' if m['passed'] else 'FAIL (modulation flat or wrong)'}")
    if args.output:
        args.output.write_text(json.dumps(res, indent=2) + "\n")
    return EXIT_OK if res["passed"] else EXIT_FAIL


def fock_suite(cfg_base: OpticalConfig, alphas: Sequence[float], dim: int) -> dict:
    """Mode-algebra against the truncated number basis.

    Raises ``TruncationInsufficient`` for amplitudes the cutoff cannot hold.
    """
    for a in alphas:
        if abs(a) > FOCK_ALPHA_MAX:
            raise TruncationInsufficient(f"|alpha| = {abs(a)} exceeds the supported maximum {FOCK_ALPHA_MAX}")
    rows = []
    spec = fock.TruncationSpec(("b", "a1", "a2"), dim)
    for a in alphas:
        for T, kz in ((0.5, 0.0), (0.5, math.pi / 4), (0.3, math.pi / 2), (0.8, 1.1)):
            cfg = cfg_base.with_(T=T, z1=kz / cfg_base.k, z2=(kz + 0.3) / cfg_base.k,
                                 alpha=a * complex(math.cos(0.7), math.sin(0.7)),
                                 v_b2=1.0, v_1sq=1.0, v_2sq=1.0)
            state = fock.build_coherent({"b": cfg.alpha}, spec)
            mstate = modes.port_state(cfg)
            for name, form in (("E1", modes.build_field_e1(cfg, 0.4)), ("E2", modes.build_field_e2(cfg, 0.4))):
                for quantity, fk, ma in (
                    ("variance", fock.field_variance(form, state), modes.variance(form, mstate)),
                    ("mean", fock.field_mean(form, state), modes.mean(form, mstate)),
                ):
                    err = abs(fk - ma)
                    rows.append({"field": name, "quantity": quantity, "alpha": a, "T": T, "kz": kz,
                                 "fock": fk, "mode_algebra": ma, "error": err,
                                 "passed": bool(err <= FOCK_FIELD_TOL)})
    slopes = []
    for kz, expected in ((0.0, 0.5), (math.pi / 4, 0.75), (math.pi / 2, 1.0)):
        values = []
        for a in SLOPE_ALPHAS:
            cfg = cfg_base.with_(T=0.5, z1=kz / cfg_base.k, alpha=a, v_b2=1.0, v_1sq=1.0, v_2sq=1.0)
            form = modes.build_detector_mirror(cfg, 0.0)
            pspec = fock.TruncationSpec(form.modes, dim)
            values.append(fock.photocurrent_variance_exact(form, fock.build_coherent({"bF": a}, pspec)))
        slope = fock.alpha_sq_slope(SLOPE_ALPHAS, values)
        slopes.append({"kz": kz, "slope": slope, "expected": expected,
                       "passed": bool(abs(slope - expected) <= SLOPE_RTOL * expected)})
    passed = all(r["passed"] for r in rows) and all(s["passed"] for s in slopes)
    return {"dim": dim, "alphas": list(alphas), "rows": rows, "photocurrent_slopes": slopes, "passed": passed}


def cmd_fock_validate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    res = fock_suite(cfg, args.alpha, args.dim)
    worst = max(r["error"] for r in res["rows"])
    print(f"dim {res['dim']}, |alpha| in {res['alphas']}: {len(res['rows'])} field checks, "
          f"worst |fock - mode_algebra| = {worst:.3e} (tol {FOCK_FIELD_TOL:g})")
    for s in res["photocurrent_slopes"]:
        print(f"photocurrent slope at kz={s['kz']:.4f}: {s['slope']:.6f} (expected {s['expected']}) "
              f"{'pass' if s['passed'] else 'FAIL'}")
    if args.output:
        args.output.write_text(json.dumps(res, indent=2) + "\n")
    return EXIT_OK if res["passed"] else EXIT_FAIL


def feedback_suite(cfg: OpticalConfig, gains: Sequence[float], probe_z1: float, out_z2: float,
                   eta: float) -> list[feedback.LoopReport]:
    return feedback.gain_sweep(cfg, feedback.FeedbackSpec(0.0, probe_z1, out_z2, eta), gains)


def cmd_feedback(args: argparse.Namespace) -> int:
    cfg = _config(args, alpha_re=10.0)
    if not 0.0 < args.eta <= 1.0:
        raise Failure(EXIT_CONFIG, f"--eta must lie in (0, 1], got {args.eta}")
    reports = feedback_suite(cfg, args.gains, args.probe_z1, args.out_z2, args.eta)
    text = feedback.sweep_json(reports) + "\n" if args.format == "json" else feedback.sweep_csv(reports)
    _emit(text, args.output)
    out = _summary_stream(args.output)
    best = min(reports, key=lambda r: r.out_a2_variance)
    print(f"lowest out-of-loop a2 variance {analytic.fmt(best.out_a2_variance)} at g={analytic.fmt(best.gain)} "
          f"(sql {analytic.fmt(best.sql)}, sub-SQL: {best.sub_sql_out})", file=out)
    return EXIT_OK


def feedback_checks(cfg: OpticalConfig) -> dict:
    node = 0.0
    anti = math.pi / (2.0 * cfg.k)
    gains = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e3, 1e6]
    sweep = feedback_suite(cfg, gains, node, node, 1.0)
    monotone = all(b.inloop_variance <= a.inloop_variance and b.out_a2_variance <= a.out_a2_variance
                   for a, b in zip(sweep, sweep[1:]))
    open_ok = sweep[0].out_a2_variance == analytic.variance_e2(cfg.with_(z1=node, z2=node)).total
    high_node = sweep[-1]
    high_anti = feedback.run_loop(cfg, feedback.FeedbackSpec(1e6, node, anti))
    return {
        "open_loop_exact": bool(open_ok),
        "monotone": bool(monotone),
        "node_sub_sql_10x": bool(high_node.out_a2_variance * 10.0 <= high_node.sql),
        "antinode_at_or_above_sql": bool(high_anti.out_a2_variance >= high_anti.sql),
        "passed": bool(open_ok and monotone and high_node.out_a2_variance * 10.0 <= high_node.sql
                       and high_anti.out_a2_variance >= high_anti.sql),
    }


def scan_checks(cfg: OpticalConfig) -> dict:
    c = cfg.with_(T=0.5, v_b2=1.0, v_1sq=1.0, v_2sq=1.0)
    lam = 2.0 * math.pi / c.k
    zs = analytic.linear_grid(0.0, lam, 9)
    res = analytic.scan_variance(c, "a1", zs)
    sql = res.points[0][1].sql
    totals = res.totals
    ok = abs(totals.min() - 0.5 * sql) <= 1e-12 and abs(totals.max() - 1.5 * sql) <= 1e-12
    return {"min_over_sql": float(totals.min() / sql), "max_over_sql": float(totals.max() / sql),
            "nodes": list(res.nodes), "antinodes": list(res.antinodes), "passed": bool(ok)}


def cmd_report(args: argparse.Namespace) -> int:
    cfg = _config(args, alpha_re=1.0)
    doc = {
        "config": cfg.to_mapping(),
        "scan": scan_checks(cfg),
        "mc": mc_suite(cfg, args.n, args.seed, False),
        "fock": fock_suite(cfg, [0.5, 1.0, 2.0], args.dim),
        "feedback": feedback_checks(cfg),
    }
    doc["passed"] = all(doc[k]["passed"] for k in ("scan", "mc", "fock", "feedback"))
    _emit(json.dumps(doc, indent=2) + "\n", args.output)
    out = _summary_stream(args.output)
    for key in ("scan", "mc", "fock", "feedback"):
        print(f"{key:9s} {'pass' if doc[key]['passed'] else 'FAIL'}", file=out)
    return EXIT_OK if doc["passed"] else EXIT_FAIL


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bsmirror", allow_abbrev=False,
                                description="Beam splitter + mirror vacuum-noise model.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help, allow_abbrev=False)
        _add_config_flags(sp)
        sp.add_argument("--output", "-o", type=Path, default=None)
        return sp

    s = add("scan", "analytic field-variance scan over probe position")
    s.add_argument("--port", choices=("a1", "a2"), required=True)
    s.add_argument("--z-min", type=float, default=0.0)
    s.add_argument("--z-max", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=101)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_scan)

    s = add("scan-photocurrent", "port-a1 photocurrent variance, mirror vs open port")
    s.add_argument("--z-min", type=float, default=0.0)
    s.add_argument("--z-max", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=101)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_scan_photocurrent)

    s = add("mc-validate", "Monte-Carlo convergence table against the closed forms")
    s.add_argument("--n", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--amplitude-model", choices=("fixed", "gaussian"), default="fixed")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--decorrelate-phases", action="store_true",
                   help="negative control: break the forward/reflected phase correlation")
    s.set_defaults(func=cmd_mc_validate)

    s = add("fock-validate", "truncated Fock-space check of the moment rules")
    s.add_argument("--dim", type=int, default=40)
    s.add_argument("--alpha", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    s.set_defaults(func=cmd_fock_validate)

    s = add("feedback", "feedback gain sweep")
    s.add_argument("--gains", type=float, nargs="+", default=[0.0, 1.0, 10.0, 100.0])
    s.add_argument("--probe-z1", type=float, default=0.0)
    s.add_argument("--out-z2", type=float, default=0.0)
    s.add_argument("--eta", type=float, default=1.0)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_feedback)

    s = add("report", "run every suite with fixed seeds and write one JSON summary")
    s.add_argument("--n", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--dim", type=int, default=40)
    s.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, NegativeGain) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EmptyRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TruncationInsufficient, DimensionCap) as exc:
        print(f"truncation error: {exc}\nhint: keep |alpha| <= {FOCK_ALPHA_MAX:g} and use --dim 40 or more",
              file=sys.stderr)
        return EXIT_TRUNCATION


if __name__ == "__main__":
    sys.exit(main())
