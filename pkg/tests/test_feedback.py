import json
import math

import pytest
from hypothesis import given, strategies as st

from bsmirror import analytic, feedback
from bsmirror.config import OpticalConfig, VacuumWeights
from bsmirror.errors import EmptyRange, NegativeGain
from bsmirror.feedback import FeedbackSpec, gain_sweep, run_loop

from conftest import configs

ANTI = math.pi / 2
CFG = OpticalConfig(T=0.5, k=1.0, alpha=10.0)


@given(configs, st.floats(0, 10), st.floats(0, 10))
def test_open_loop_is_exact(cfg, z1, z2):
    r = run_loop(cfg, FeedbackSpec(0.0, z1, z2))
    expected = analytic.variance_e2(cfg.with_(z1=z1, z2=z2)).total
    assert r.out_a2_variance == expected
    assert r.open_loop_a2_variance == expected
    assert r.inloop_variance == analytic.photocurrent_variance_mirror(cfg.with_(z1=z1)).total


def test_high_gain_at_node():
    r = run_loop(CFG, FeedbackSpec(1e6, 0.0, 0.0))
    assert r.out_a2_variance < 1e-11
    assert r.sub_sql_out


def test_high_gain_at_antinode_stays_at_sql():
    r = run_loop(CFG, FeedbackSpec(1e6, 0.0, ANTI))
    assert r.out_a2_variance == pytest.approx(1.0, rel=1e-11)
    assert r.out_a2_variance >= r.sql
    assert not r.sub_sql_out


def test_gain_ratios_on_common_mode_term():
    cfg = CFG.with_(z1=0.0)
    carrier = [run_loop(cfg, FeedbackSpec(g, 0.0, 0.0)).inloop_variance for g in (0.0, 1.0, 10.0)]
    assert carrier[1] / carrier[0] == pytest.approx(1 / 4, rel=1e-14)
    assert carrier[2] / carrier[0] == pytest.approx(1 / 121, rel=1e-14)


def test_node_sweep_is_monotone():
    gains = [0.0, 0.01, 0.3, 1.0, 3.0, 30.0, 1e3, 1e6]
    sweep = gain_sweep(CFG, FeedbackSpec(probe_z1=0.0, out_probe_z2=0.0), gains)
    for a, b in zip(sweep, sweep[1:]):
        assert b.inloop_variance <= a.inloop_variance
        assert b.out_a2_variance <= a.out_a2_variance
        assert b.out_a2_variance <= b.open_loop_a2_variance


@pytest.mark.parametrize("g", [0.0, 1.0, 1e3, 1e9])
def test_antinode_probe_floor(g):
    cfg = CFG.with_(weights=VacuumWeights(1.0, 1.3, 0.8))
    r = run_loop(cfg, FeedbackSpec(g, ANTI, ANTI))
    floor_in = 2 * cfg.R * cfg.weights.v_1sq * cfg.T * abs(cfg.alpha) ** 2
    floor_out = 2 * cfg.T * cfg.weights.v_2sq
    assert r.inloop_variance >= floor_in * (1 - 1e-15)
    assert r.out_a2_variance >= floor_out * (1 - 1e-15)


@given(st.floats(0.0, 2 * math.pi))
def test_high_gain_leaves_only_the_standing_term(z2):
    # the out-of-loop residual is set by the a2 standing wave alone, so deep
    # (10x) sub-SQL noise needs the out probe close to a node
    r = run_loop(CFG, FeedbackSpec(1e6, 0.0, z2))
    standing = 2 * CFG.T * math.sin(z2) ** 2
    assert r.out_a2_variance == pytest.approx(standing, abs=1e-11)
    assert r.sub_sql_out == (r.out_a2_variance < r.sql)
    if r.out_a2_variance * 10 <= r.sql:
        assert abs(math.sin(z2)) < math.sqrt(0.1) + 1e-9


@pytest.mark.parametrize("g", [0.0, 0.5, 10.0, 1e4])
def test_detection_efficiency_penalty(g):
    etas = [0.05, 0.1, 0.3, 0.5, 0.8, 1.0]
    out = [run_loop(CFG, FeedbackSpec(g, 0.0, 0.0, eta)).out_a2_variance for eta in etas]
    assert all(b <= a for a, b in zip(out, out[1:]))
    assert feedback.detection_penalty(1.0) == 0.0


def test_invalid_specs():
    for g in (-1.0, math.inf, math.nan):
        with pytest.raises(NegativeGain):
            FeedbackSpec(g)
    with pytest.raises(ValueError):
        FeedbackSpec(1.0, efficiency=0.0)
    with pytest.raises(NegativeGain):
        gain_sweep(CFG, FeedbackSpec(), [1.0, -2.0])
    with pytest.raises(EmptyRange):
        gain_sweep(CFG, FeedbackSpec(), [])


def test_serialization():
    sweep = gain_sweep(CFG, FeedbackSpec(), [0.0, 1.0])
    lines = feedback.sweep_csv(sweep).splitlines()
    assert lines[0] == "g,inloop,out_a2,open_loop_a2,sql,sub_sql_out"
    assert lines[1].endswith(",true")
    rows = json.loads(feedback.sweep_json(sweep))["rows"]
    assert list(rows[0]) == list(feedback.CSV_FIELDS)
    assert rows[1]["out_a2"] == sweep[1].out_a2_variance
