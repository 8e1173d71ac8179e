import numpy as np
import pytest

DT_HOURS = 1.0 / 6.0  # 10-minute sampling


def make_recession(alpha, c, b, duration_hours, dt_hours=DT_HOURS, sigma=0.0, rng=None):
    """Exponential recession h(t) = c*exp(alpha t) + b with optional noise."""
    t = np.arange(0.0, duration_hours + 1e-9, dt_hours)
    h = c * np.exp(alpha * t) + b
    if sigma > 0:
        h = h + (rng or np.random.default_rng(0)).normal(0.0, sigma, t.size)
    return t, h


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
