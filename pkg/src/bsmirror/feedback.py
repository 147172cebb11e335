"""Steady-state proportional feedback from the port-a1 photocurrent.

This is a model, not a derived result: an ideal loop of gain ``g`` divides
the noise it can see (the common-mode noise carried by input mode b) by
``(1 + g)^2``. The mirror-side standing terms are not in the loop and pass
through unchanged, so out-of-loop sub-SQL noise at port a2 appears only
where its own standing term vanishes.

Detection efficiency ``eta < 1`` is a beam splitter in front of the
detector that adds unit-weight vacuum (both directions) to the error
signal. Referred to the common mode this is an extra noise
``2 (1 - eta) / eta`` that the loop writes onto the source with weight
``g^2 / (1 + g)^2``. The controller gain is referred to the ideal detector,
i.e. the loop compensates the lost signal, so ``g`` itself is unchanged.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

from . import analytic
from .config import OpticalConfig
from .errors import EmptyRange, NegativeGain

CSV_FIELDS = ("g", "inloop", "out_a2", "open_loop_a2", "sql", "sub_sql_out")


@dataclass(frozen=True)
class FeedbackSpec:
    gain: float = 0.0
    probe_z1: float = 0.0
    out_probe_z2: float = 0.0
    efficiency: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.gain):
            raise NegativeGain(f"gain must be finite, got {self.gain!r}")
        if self.gain < 0:
            raise NegativeGain(f"gain must be >= 0, got {self.gain!r}")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.efficiency!r}")


@dataclass(frozen=True)
class LoopReport:
    gain: float
    inloop_variance: float
    out_a2_variance: float
    open_loop_a2_variance: float
    sql: float
    sub_sql_out: bool


def detection_penalty(efficiency: float) -> float:
    """Extra common-mode noise from detecting with efficiency ``efficiency``."""
    return 2.0 * (1.0 - efficiency) / efficiency


def run_loop(cfg: OpticalConfig, spec: FeedbackSpec) -> LoopReport:
    """Closed-loop variances for a probe at ``probe_z1`` and an out-of-loop field at ``out_probe_z2``."""
    c = cfg.with_(z1=spec.probe_z1, z2=spec.out_probe_z2)
    g = spec.gain
    suppress = (1.0 + g) ** 2
    penalty = detection_penalty(spec.efficiency)

    open_a2 = analytic.variance_e2(c)
    # common-mode share of the a2 variance is (R/2) E^2 sigma == open_a2.traveling
    injected = 0.5 * c.R * c.E_unit**2 * g * g * penalty / suppress
    out_a2 = open_a2.traveling / suppress + injected + open_a2.standing

    probe = analytic.photocurrent_variance_mirror(c)
    a2 = abs(c.alpha) ** 2
    measured_common = probe.carrier_term / suppress + c.T * a2 * c.T * penalty / suppress
    inloop = measured_common + probe.standing_term

    return LoopReport(
        gain=g,
        inloop_variance=inloop,
        out_a2_variance=out_a2,
        open_loop_a2_variance=open_a2.total,
        sql=open_a2.sql,
        sub_sql_out=bool(out_a2 < open_a2.sql),
    )


def gain_sweep(cfg: OpticalConfig, spec: FeedbackSpec, gains: Sequence[float]) -> list[LoopReport]:
    if len(gains) == 0:
        raise EmptyRange("gain grid is empty")
    out = []
    for g in gains:
        out.append(run_loop(cfg, FeedbackSpec(float(g), spec.probe_z1, spec.out_probe_z2, spec.efficiency)))
    return out


def sweep_csv(reports: Sequence[LoopReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in reports:
        writer.writerow([analytic.fmt(r.gain), analytic.fmt(r.inloop_variance),
                         analytic.fmt(r.out_a2_variance), analytic.fmt(r.open_loop_a2_variance),
                         analytic.fmt(r.sql), "true" if r.sub_sql_out else "false"])
    return buf.getvalue()


def sweep_json(reports: Sequence[LoopReport]) -> str:
    rows = []
    for r in reports:
        d = asdict(r)
        rows.append({"g": d["gain"], "inloop": d["inloop_variance"], "out_a2": d["out_a2_variance"],
                     "open_loop_a2": d["open_loop_a2_variance"], "sql": d["sql"],
                     "sub_sql_out": d["sub_sql_out"]})
    return json.dumps({"rows": rows}, indent=2)
