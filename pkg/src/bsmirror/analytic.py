"""Closed-form field and photocurrent variances for the BS + mirror setup.

Every variance is split into a *traveling* part (the share of the input
mode-b noise that reaches the port, flat in z) and a *standing* part (the
mirror-side vacuum, modulated by ``sin^2(k z)``).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .config import OpticalConfig, common_mode_bracket, sql_baseline
from .errors import EmptyRange

Port = Literal["a1", "a2"]

NODE_TOL = 1e-9
CSV_FIELDS = ("z", "total", "traveling", "standing", "sql", "sub_sql")


def fmt(x: float) -> str:
    """Lossless float formatting used by every CSV writer."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class NoiseReport:
    total: float
    traveling: float
    standing: float
    sql: float
    sub_sql: bool

    @classmethod
    def from_parts(cls, traveling: float, standing: float, sql: float) -> "NoiseReport":
        total = traveling + standing
        return cls(total=total, traveling=traveling, standing=standing, sql=sql,
                   sub_sql=bool(total < sql))


@dataclass(frozen=True)
class PhotocurrentReport:
    total: float
    carrier_term: float
    standing_term: float


def _check_port(port: str) -> None:
    if port not in ("a1", "a2"):
        raise ValueError(f"port must be 'a1' or 'a2', got {port!r}")


def variance_e1(cfg: OpticalConfig) -> NoiseReport:
    """Field variance at port a1 in the traveling + standing form."""
    sql = sql_baseline(cfg)
    standing = 2.0 * cfg.E_unit**2 * cfg.R * cfg.weights.v_1sq * math.sin(cfg.k * cfg.z1) ** 2
    return NoiseReport.from_parts(cfg.T * sql, standing, sql)


def variance_e2(cfg: OpticalConfig) -> NoiseReport:
    """Field variance at port a2; mirror image of :func:`variance_e1`."""
    sql = sql_baseline(cfg)
    standing = 2.0 * cfg.E_unit**2 * cfg.T * cfg.weights.v_2sq * math.sin(cfg.k * cfg.z2) ** 2
    return NoiseReport.from_parts(cfg.R * sql, standing, sql)


def variance(cfg: OpticalConfig, port: Port) -> NoiseReport:
    _check_port(port)
    return variance_e1(cfg) if port == "a1" else variance_e2(cfg)


def variance_e1_raw(cfg: OpticalConfig) -> float:
    # Form before the (1 + R^2) = T^2 + 2R rewrite; kept as a separate path.
    w, R, T = cfg.weights, cfg.R, cfg.T
    return 0.5 * cfg.E_unit**2 * (
        (1.0 + R * R) * w.v_1sq + T * (R * w.v_2sq + w.v_b2)
        - 2.0 * R * w.v_1sq * math.cos(2.0 * cfg.k * cfg.z1)
    )


def variance_e2_raw(cfg: OpticalConfig) -> float:
    w, R, T = cfg.weights, cfg.R, cfg.T
    return 0.5 * cfg.E_unit**2 * (
        (1.0 + T * T) * w.v_2sq + R * (T * w.v_1sq + w.v_b2)
        - 2.0 * T * w.v_2sq * math.cos(2.0 * cfg.k * cfg.z2)
    )


def semiclassical_variance_e1(cfg: OpticalConfig) -> float:
    """Phase-ensemble variance at port a1.

    Written in the semiclassical symbols (``b_F^2 -> v_b^2``,
    ``a_in^2 -> v_i^2``) with the field scale reinstated.
    """
    bF2 = cfg.weights.v_b2 * cfg.E_unit**2
    a1n2 = cfg.weights.v_1sq * cfg.E_unit**2
    a2n2 = cfg.weights.v_2sq * cfg.E_unit**2
    R, T = cfg.R, cfg.T
    return 0.5 * (T * (a2n2 * R + bF2) - 2.0 * a1n2 * R * math.cos(2.0 * cfg.k * cfg.z1)
                  + a1n2 * (R * R + 1.0))


def semiclassical_variance_e2(cfg: OpticalConfig) -> float:
    bF2 = cfg.weights.v_b2 * cfg.E_unit**2
    a1n2 = cfg.weights.v_1sq * cfg.E_unit**2
    a2n2 = cfg.weights.v_2sq * cfg.E_unit**2
    R, T = cfg.R, cfg.T
    return 0.5 * (R * (a1n2 * T + bF2) - 2.0 * a2n2 * T * math.cos(2.0 * cfg.k * cfg.z2)
                  + a2n2 * (T * T + 1.0))


def mean_field_e1(cfg: OpticalConfig, t: float) -> float:
    """Expected field at port a1 at time ``t``.

    The amplitude ``sqrt(2T) E|alpha|`` is the one implied by the field
    operator (its square is the carrier part of ``<E1^2>``).
    """
    amp = math.sqrt(2.0 * cfg.T) * cfg.E_unit * abs(cfg.alpha)
    return amp * math.sin(cfg.omega * t - cfg.k * cfg.Z1 - cfg.theta)


def mean_field_e2(cfg: OpticalConfig, t: float) -> float:
    amp = math.sqrt(2.0 * cfg.R) * cfg.E_unit * abs(cfg.alpha)
    return -amp * math.sin(cfg.omega * t - cfg.k * cfg.Z2 - cfg.theta)


def photocurrent_variance_open(
    alpha_sq: float,
    T: float,
    v_bF2: float = 1.0,
    v_bB2: float = 1.0,
    v_cF2: float = 1.0,
    v_cB2: float = 1.0,
) -> float:
    """Photocurrent variance at port a1 with an open (vacuum) second input.

    Linearized shot-noise level; there is no position argument because the
    open port carries no standing wave.
    """
    if alpha_sq < 0:
        raise ValueError("alpha_sq must be >= 0")
    if not 0.0 <= T <= 1.0:
        raise ValueError("T must lie in [0, 1]")
    R = 1.0 - T
    return alpha_sq * T * (R * (v_cB2 + v_cF2) + T * (v_bB2 + v_bF2))


def photocurrent_variance_open_matched(cfg: OpticalConfig) -> float:
    """Open-port variance with every weight set to half the mode-b bracket.

    The open-port bracket then carries the same total vacuum noise as the
    mirror case, so the two agree up to the factor ``T`` at a node.
    """
    half = 0.5 * common_mode_bracket(cfg)
    return photocurrent_variance_open(abs(cfg.alpha) ** 2, cfg.T, half, half, half, half)


def photocurrent_variance_mirror(cfg: OpticalConfig) -> PhotocurrentReport:
    """Photocurrent variance at port a1 with the mirror in place."""
    a2 = abs(cfg.alpha) ** 2
    carrier = cfg.T * a2 * cfg.T * common_mode_bracket(cfg)
    standing = cfg.T * a2 * 2.0 * cfg.R * cfg.weights.v_1sq * math.sin(cfg.k * cfg.z1) ** 2
    return PhotocurrentReport(total=carrier + standing, carrier_term=carrier, standing_term=standing)


@dataclass(frozen=True)
class ScanResult:
    port: str
    points: tuple[tuple[float, NoiseReport], ...]
    nodes: tuple[float, ...]
    antinodes: tuple[float, ...]

    @property
    def z(self) -> np.ndarray:
        return np.array([z for z, _ in self.points])

    @property
    def totals(self) -> np.ndarray:
        return np.array([r.total for _, r in self.points])

    def rows(self) -> list[dict]:
        return [{"z": z, **asdict(r)} for z, r in self.points]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for z, r in self.points:
            writer.writerow([fmt(z), fmt(r.total), fmt(r.traveling), fmt(r.standing),
                             fmt(r.sql), "true" if r.sub_sql else "false"])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "port": self.port,
            "rows": [{key: row[key] for key in CSV_FIELDS} for row in self.rows()],
            "nodes": list(self.nodes),
            "antinodes": list(self.antinodes),
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_csv(cls, text: str, port: str, k: float) -> "ScanResult":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        points = []
        for row in reader:
            report = NoiseReport(
                total=float(row["total"]), traveling=float(row["traveling"]),
                standing=float(row["standing"]), sql=float(row["sql"]),
                sub_sql=row["sub_sql"] == "true",
            )
            points.append((float(row["z"]), report))
        zs = [z for z, _ in points]
        nodes, antinodes = classify_extrema(zs, k)
        return cls(port=port, points=tuple(points), nodes=nodes, antinodes=antinodes)


def _probe_attr(port: str) -> str:
    return "z1" if port == "a1" else "z2"


def classify_extrema(zs: Iterable[float], k: float, tol: float = NODE_TOL) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Split sample positions into standing-wave nodes and antinodes."""
    nodes, antinodes = [], []
    for z in zs:
        if abs(math.sin(k * z)) < tol:
            nodes.append(z)
        elif abs(math.cos(k * z)) < tol:
            antinodes.append(z)
    return tuple(nodes), tuple(antinodes)


def scan_variance(cfg: OpticalConfig, port: Port, zs: Sequence[float]) -> ScanResult:
    """Evaluate the port variance at each probe position in ``zs``.

    ``zs`` must be nonempty and ascending. Nodes and antinodes are the grid
    points that fall on them (within ``NODE_TOL`` in ``sin``/``cos``).
    """
    _check_port(port)
    zs = [float(z) for z in zs]
    if not zs:
        raise EmptyRange("scan grid is empty")
    if any(b < a for a, b in zip(zs, zs[1:])):
        raise ValueError("scan grid must be ascending")
    attr = _probe_attr(port)
    points = tuple((z, variance(cfg.with_(**{attr: z}), port)) for z in zs)
    nodes, antinodes = classify_extrema(zs, cfg.k)
    return ScanResult(port=port, points=points, nodes=nodes, antinodes=antinodes)


def linear_grid(z_min: float, z_max: float, steps: int) -> list[float]:
    if steps < 1:
        raise EmptyRange("steps must be >= 1")
    if steps == 1:
        return [float(z_min)]
    if z_max < z_min:
        raise EmptyRange(f"z_max ({z_max}) < z_min ({z_min})")
    return [float(z) for z in np.linspace(z_min, z_max, steps)]


def _multiples_in(step: float, offset: float, lo: float, hi: float) -> list[float]:
    # offset + n*step for every integer n with the value in [lo, hi]; a small
    # slack absorbs rounding in the endpoints.
    slack = NODE_TOL
    n_lo = math.ceil((lo - offset) / step - slack)
    n_hi = math.floor((hi - offset) / step + slack)
    return [offset + n * step for n in range(n_lo, n_hi + 1)]


def find_extrema(cfg: OpticalConfig, z_min: float, z_max: float, port: Port = "a1") -> ScanResult:
    """Locate every node (``kz = n pi``) and antinode in ``[z_min, z_max]``.

    The returned grid holds one report per extremum, in ascending z.
    """
    _check_port(port)
    if not z_min < z_max:
        raise EmptyRange(f"need z_min < z_max, got [{z_min}, {z_max}]")
    half = math.pi / cfg.k
    nodes = tuple(z for z in _multiples_in(half, 0.0, z_min, z_max) if z >= 0)
    antinodes = tuple(z for z in _multiples_in(half, 0.5 * half, z_min, z_max) if z >= 0)
    attr = _probe_attr(port)
    zs = sorted(nodes + antinodes)
    points = tuple((z, variance(cfg.with_(**{attr: z}), port)) for z in zs)
    return ScanResult(port=port, points=points, nodes=nodes, antinodes=antinodes)
