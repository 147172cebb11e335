import json
import math

import pytest
from hypothesis import given, strategies as st

from bsmirror.config import OpticalConfig, VacuumWeights, sql_baseline, validate
from bsmirror.errors import ConfigError, NegativeWeight, NonPositive, OutOfRange

from conftest import configs


def test_default_config_accepted():
    cfg = OpticalConfig(T=0.5, k=1.0)
    assert validate(cfg) is cfg
    assert cfg.R == 0.5


@pytest.mark.parametrize("T", [1.3, -0.01, math.nan])
def test_transmittance_out_of_range(T):
    with pytest.raises(OutOfRange):
        OpticalConfig(T=T)


def test_negative_weight_rejected():
    with pytest.raises(NegativeWeight):
        OpticalConfig(weights=VacuumWeights(v_1sq=-0.1))


@pytest.mark.parametrize("field", ["k", "E_unit"])
def test_nonpositive_scale_rejected(field):
    with pytest.raises(NonPositive):
        OpticalConfig(**{field: 0.0})


def test_negative_length_rejected():
    with pytest.raises(OutOfRange):
        OpticalConfig(z1=-1.0)


def test_reflectance_is_derived():
    cfg = OpticalConfig(T=0.3)
    assert cfg.R + cfg.T == 1.0
    with pytest.raises(AttributeError):
        cfg.R = 0.2


def test_sql_examples():
    assert sql_baseline(OpticalConfig(T=0.5)) == 1.0
    cfg = OpticalConfig(T=0.3, weights=VacuumWeights(v_b2=2.0))
    assert sql_baseline(cfg) == pytest.approx(0.5 * (2 + 0.7 + 0.3), rel=1e-15)


@given(st.floats(0, 1), st.floats(0, 5))
def test_sql_independent_of_T_for_equal_weights(T, w):
    cfg = OpticalConfig(T=T, weights=VacuumWeights(w, w, w))
    assert sql_baseline(cfg) == pytest.approx(w, rel=1e-12, abs=1e-15)


@given(configs, st.floats(0.1, 4.0))
def test_sql_scales_as_field_unit_squared(cfg, s):
    scaled = cfg.with_(E_unit=cfg.E_unit * s)
    assert sql_baseline(scaled) == pytest.approx(s * s * sql_baseline(cfg), rel=1e-12, abs=1e-300)


@given(configs)
def test_sql_independent_of_alpha_and_position(cfg):
    other = cfg.with_(alpha=3 - 2j, z1=1.7, z2=0.4, Z1=9.0)
    assert sql_baseline(other) == sql_baseline(cfg)


@given(configs)
def test_json_round_trip(cfg):
    assert OpticalConfig.from_json(cfg.to_json()) == cfg


def test_json_keys_exact():
    cfg = OpticalConfig(T=0.2, alpha=1 + 2j)
    assert list(json.loads(cfg.to_json())) == [
        "T", "k", "omega", "z1", "z2", "Z1", "Z2", "alpha_re", "alpha_im",
        "E_unit", "v_b2", "v_1sq", "v_2sq"]
    with pytest.raises(ConfigError):
        OpticalConfig.from_mapping({"T": 0.5, "transmittance": 0.5})
    with pytest.raises(ConfigError):
        OpticalConfig.from_json("[1, 2]")


def test_from_mapping_partial_uses_defaults():
    cfg = OpticalConfig.from_mapping({"T": 0.25, "alpha_im": 1.0, "v_1sq": 2.0})
    assert cfg.alpha == 1j and cfg.weights.v_1sq == 2.0 and cfg.weights.v_b2 == 1.0
    assert cfg.theta == pytest.approx(math.pi / 2)
