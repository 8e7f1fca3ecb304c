import pytest

from clfbl import SystemConfig

TABLE1 = dict(
    d=8.0, f_s=250e3, M=1.0, E=0.65e-6, p_dl=10e-3, N=3e-3,
    n_max=2500.0, g_ul=1.0, g_dl=1.0,
)


@pytest.fixture
def table1() -> SystemConfig:
    """Reference setup at the 3 mW case-study noise level."""
    return SystemConfig(**TABLE1)


def make_config(**overrides) -> SystemConfig:
    return SystemConfig(**{**TABLE1, **overrides})
