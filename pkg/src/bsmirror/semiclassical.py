"""Random-phase ensemble model of the vacuum on top of a classical carrier.

Each vacuum mode contributes one sinusoid ``A sin(wt -/+ kz + phi)`` with
``phi`` uniform on ``[0, 2 pi)`` per ensemble member and ``<A^2> = E^2 v^2``.
The field is sampled at a fixed ``(t, z)``; statistics are over the phase
ensemble, not over time.

Sampling is split into fixed-size chunks, each drawing from its own
``SeedSequence(seed, spawn_key=(stream, chunk))`` substream, so results do
not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from . import analytic
from .config import OpticalConfig
from .errors import EmptyRange

AmplitudeModel = Literal["fixed", "gaussian"]
CHUNK = 1 << 16


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble size and randomness.

    ``decorrelate_phases`` draws the forward and mirror-reflected parts of
    the port vacuum independently. It is a negative control: it removes
    the interference that produces the ``sin^2(kz)`` modulation.
    """

    n_samples: int = 1_000_000
    seed: int = 42
    amplitude_model: AmplitudeModel = "fixed"
    decorrelate_phases: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError(f"n_samples must be an integer >= 1, got {self.n_samples!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.amplitude_model not in ("fixed", "gaussian"):
            raise ValueError(f"unknown amplitude model {self.amplitude_model!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class EnsembleStats:
    n: int
    mean: float
    variance: float
    standard_error_of_variance: float
    standard_error_of_mean: float

    @classmethod
    def from_samples(cls, x: np.ndarray) -> "EnsembleStats":
        n = x.size
        mu = float(x.mean())
        d = x - mu
        m2 = float(np.mean(d * d))
        var = m2 * n / (n - 1) if n > 1 else 0.0
        if n > 3:
            m4 = float(np.mean(d**4))
            se2 = (m4 - var * var * (n - 3) / (n - 1)) / n
            se_var = math.sqrt(max(se2, 0.0))
        else:
            se_var = math.inf
        se_mean = math.sqrt(var / n) if n > 1 else math.inf
        return cls(n=n, mean=mu, variance=var, standard_error_of_variance=se_var,
                   standard_error_of_mean=se_mean)


def coherent_field_amplitude(cfg: OpticalConfig) -> float:
    """Classical carrier amplitude ``E0`` matching the operator mean of the free field
    split over two directions (``sqrt(2) E |alpha|``)."""
    return math.sqrt(2.0) * cfg.E_unit * abs(cfg.alpha)


def _phase(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(0.0, 2.0 * math.pi, n)


def _amplitude(rng: np.random.Generator, n: int, rms: float, model: str) -> np.ndarray | float:
    if model == "fixed":
        return rms
    return rms * np.abs(rng.standard_normal(n))


def _sample(draw: Callable[[np.random.Generator, int], np.ndarray], spec: EnsembleSpec,
            stream: int) -> EnsembleStats:
    sizes = [CHUNK] * (spec.n_samples // CHUNK)
    if spec.n_samples % CHUNK:
        sizes.append(spec.n_samples % CHUNK)

    def run(job: tuple[int, int]) -> np.ndarray:
        idx, size = job
        seq = np.random.SeedSequence(spec.seed, spawn_key=(stream, idx))
        return draw(np.random.default_rng(seq), size)

    jobs = list(enumerate(sizes))
    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return EnsembleStats.from_samples(np.concatenate(parts))


def sample_free_field(cfg: OpticalConfig, spec: EnsembleSpec, t: float, z: float,
                      E0: float | None = None, stream: int = 0) -> EnsembleStats:
    """Carrier plus forward and backward vacuum sinusoids at ``(t, z)``.

    The backward vacuum carries ``T v1^2 + R v2^2`` (what the beam splitter
    sends back into mode b), so the variance tends to the SQL reference.
    """
    e0 = coherent_field_amplitude(cfg) if E0 is None else E0
    w, E = cfg.weights, cfg.E_unit
    fwd = cfg.omega * t - cfg.k * z
    back = cfg.omega * t + cfg.k * z
    theta = -cfg.theta
    rms_f = E * math.sqrt(w.v_b2)
    rms_b = E * math.sqrt(cfg.T * w.v_1sq + cfg.R * w.v_2sq)
    model = spec.amplitude_model

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        x = e0 * math.sin(fwd + theta) * np.ones(n)
        x += _amplitude(rng, n, rms_f, model) * np.sin(fwd + _phase(rng, n))
        x += _amplitude(rng, n, rms_b, model) * np.sin(back + _phase(rng, n))
        return x

    return _sample(draw, spec, stream)


def _port_draw(cfg: OpticalConfig, spec: EnsembleSpec, t: float, port: str):
    w, E = cfg.weights, cfg.E_unit
    if port == "a1":
        carrier, split, other_t = math.sqrt(cfg.T), cfg.R, cfg.T
        Z, z = cfg.Z1, cfg.z1
        own_rms, other_rms = E * math.sqrt(w.v_1sq), E * math.sqrt(w.v_2sq)
    else:
        carrier, split, other_t = -math.sqrt(cfg.R), cfg.T, cfg.R
        Z, z = cfg.Z2, cfg.z2
        own_rms, other_rms = E * math.sqrt(w.v_2sq), E * math.sqrt(w.v_1sq)
    b_rms = E * math.sqrt(w.v_b2)
    e0 = coherent_field_amplitude(cfg)
    wt, kz, kZ = cfg.omega * t, cfg.k * z, cfg.k * Z
    theta = -cfg.theta
    cross = math.sqrt(split * other_t)
    model = spec.amplitude_model

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        phi_b = _phase(rng, n)
        phi_own = _phase(rng, n)
        phi_other = _phase(rng, n)
        # forward and mirror-returned parts of the port vacuum share one phase
        phi_ret = _phase(rng, n) if spec.decorrelate_phases else phi_own
        a_b = _amplitude(rng, n, b_rms, model)
        a_own = _amplitude(rng, n, own_rms, model)
        a_other = _amplitude(rng, n, other_rms, model)
        x = carrier * (e0 * math.sin(wt - kZ + theta) + a_b * np.sin(wt - kZ + phi_b))
        x = x + a_own * (np.sin(wt + kz + phi_own) - split * np.sin(wt - kz + phi_ret))
        x = x - cross * a_other * np.sin(wt - kz + phi_other)
        return x

    return draw


def sample_field_e1(cfg: OpticalConfig, spec: EnsembleSpec, t: float, stream: int = 0) -> EnsembleStats:
    return _sample(_port_draw(cfg, spec, t, "a1"), spec, stream)


def sample_field_e2(cfg: OpticalConfig, spec: EnsembleSpec, t: float, stream: int = 0) -> EnsembleStats:
    return _sample(_port_draw(cfg, spec, t, "a2"), spec, stream)


def semiclassical_variance(cfg: OpticalConfig, port: str) -> float:
    if port == "a1":
        return analytic.semiclassical_variance_e1(cfg)
    if port == "a2":
        return analytic.semiclassical_variance_e2(cfg)
    raise ValueError(f"port must be 'a1' or 'a2', got {port!r}")


@dataclass(frozen=True)
class McPoint:
    z: float
    stats: EnsembleStats
    analytic: float

    @property
    def z_score(self) -> float:
        return (self.stats.variance - self.analytic) / self.stats.standard_error_of_variance


def scan_mc(cfg: OpticalConfig, spec: EnsembleSpec, zs: Sequence[float], port: str = "a1",
            t: float = 0.0) -> list[McPoint]:
    """Monte-Carlo variance at each probe position; grid index selects the substream."""
    if len(zs) == 0:
        raise EmptyRange("scan grid is empty")
    attr = "z1" if port == "a1" else "z2"
    sampler = sample_field_e1 if port == "a1" else sample_field_e2
    out = []
    for i, z in enumerate(zs):
        c = cfg.with_(**{attr: float(z)})
        out.append(McPoint(float(z), sampler(c, spec, t, stream=i), semiclassical_variance(c, port)))
    return out


def fit_standing_modulation(zs: Sequence[float], variances: Sequence[float],
                            stderrs: Sequence[float], k: float) -> tuple[float, float, float, float]:
    """Weighted least-squares fit of ``A + B sin^2(kz)``.

    Returns ``(A, B, se_A, se_B)``.
    """
    s2 = np.sin(k * np.asarray(zs, dtype=float)) ** 2
    X = np.column_stack([np.ones_like(s2), s2])
    wts = 1.0 / np.asarray(stderrs, dtype=float) ** 2
    XtW = X.T * wts
    cov = np.linalg.inv(XtW @ X)
    coef = cov @ (XtW @ np.asarray(variances, dtype=float))
    return float(coef[0]), float(coef[1]), float(math.sqrt(cov[0, 0])), float(math.sqrt(cov[1, 1]))


def scan_csv(points: Sequence[McPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("z", "mc_variance", "stderr", "analytic"))
    for p in points:
        writer.writerow([analytic.fmt(v) for v in (p.z, p.stats.variance,
                                                   p.stats.standard_error_of_variance, p.analytic)])
    return buf.getvalue()


def sidecar_json(spec: EnsembleSpec, cfg: OpticalConfig, port: str) -> str:
    return json.dumps({
        "seed": spec.seed, "n_samples": spec.n_samples,
        "amplitude_model": spec.amplitude_model,
        "decorrelate_phases": spec.decorrelate_phases,
        "chunk": CHUNK, "port": port, "config": cfg.to_mapping(),
    }, indent=2)


# --- convergence suite ---------------------------------------------------------

GRID_T = (0.2, 0.4, 0.6, 0.8)
GRID_KZ = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)
SIGMA_LIMIT = 5.0


@dataclass(frozen=True)
class CellResult:
    T: float
    kz: float
    mc: float
    stderr: float
    analytic: float
    passed: bool


def convergence_suite(spec: EnsembleSpec, port: str = "a1", base: OpticalConfig | None = None,
                      Ts: Sequence[float] = GRID_T, kzs: Sequence[float] = GRID_KZ) -> list[CellResult]:
    """MC vs closed form on a (T, kz) grid; each cell gets its own substream."""
    base = base or OpticalConfig(k=1.0, alpha=1.0)
    attr = "z1" if port == "a1" else "z2"
    sampler = sample_field_e1 if port == "a1" else sample_field_e2
    cells = []
    for i, T in enumerate(Ts):
        for j, kz in enumerate(kzs):
            cfg = base.with_(T=T, **{attr: kz / base.k})
            stats = sampler(cfg, spec, 0.0, stream=i * len(kzs) + j)
            ref = semiclassical_variance(cfg, port)
            ok = abs(stats.variance - ref) < SIGMA_LIMIT * stats.standard_error_of_variance
            cells.append(CellResult(T, kz, stats.variance, stats.standard_error_of_variance, ref, ok))
    return cells


def allowed_failures(cells: int) -> int:
    """Cells allowed to miss the 5-sigma band before the suite counts as failed."""
    return max(1, cells // 16)
