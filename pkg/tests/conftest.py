import math

import pytest
from hypothesis import strategies as st

from bsmirror.config import OpticalConfig, VacuumWeights

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    def _record(criterion: str, passed: bool, detail: str = "") -> None:
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}" + (f"  ({detail})" if detail else ""))
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


finite = dict(allow_nan=False, allow_infinity=False)

weights_st = st.builds(
    VacuumWeights,
    v_b2=st.floats(0.0, 5.0, **finite),
    v_1sq=st.floats(0.0, 5.0, **finite),
    v_2sq=st.floats(0.0, 5.0, **finite),
)

configs = st.builds(
    OpticalConfig,
    T=st.floats(0.0, 1.0, **finite),
    k=st.floats(0.1, 10.0, **finite),
    omega=st.floats(0.0, 10.0, **finite),
    z1=st.floats(0.0, 10.0, **finite),
    z2=st.floats(0.0, 10.0, **finite),
    Z1=st.floats(0.0, 10.0, **finite),
    Z2=st.floats(0.0, 10.0, **finite),
    alpha=st.complex_numbers(max_magnitude=10.0, **finite),
    E_unit=st.floats(0.1, 3.0, **finite),
    weights=weights_st,
)


@pytest.fixture
def half():
    """T = 1/2, unit weights, unit field scale."""
    return OpticalConfig(T=0.5, k=1.0)


def at_kz(cfg: OpticalConfig, kz: float, port: str = "a1") -> OpticalConfig:
    return cfg.with_(**{"z1" if port == "a1" else "z2": kz / cfg.k})


QUARTER = math.pi / 4
HALF_PI = math.pi / 2
