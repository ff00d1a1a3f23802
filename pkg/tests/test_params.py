import math

import pytest

from hostpar.params import EPS_MAX, PRESETS, Params, PhysicalParams, normalize, preset


@pytest.mark.parametrize(
    "a, m, expected",
    [(8.0, 0.5, 4.0), (1.0, 1.0, 1.0), (2.0, 3.0, 6.0)],
)
def test_normalize_scales_growth_factor(a, m, expected):
    phys = PhysicalParams(a=a, m=m, theta=0.5, beta=0.2, d=0.1, eps=0.01)
    p = normalize(phys)
    assert p.alpha == expected
    assert (p.theta, p.beta, p.d, p.eps) == (0.5, 0.2, 0.1, 0.01)


def test_k_is_infection_excess_in_slow_units():
    p = Params(alpha=4.0, theta=0.5, beta=0.11, d=0.1, eps=0.005)
    assert math.isclose(p.k, 2.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"alpha": 0.0},
        {"alpha": -1.0},
        {"theta": -0.1},
        {"theta": 1.1},
        {"beta": 0.0},
        {"d": -0.5},
        {"eps": 0.0},
        {"eps": EPS_MAX * 2},
        {"eps": math.nan},
        {"alpha": math.inf},
    ],
)
def test_invalid_params_rejected(kwargs):
    base = dict(alpha=4.0, theta=0.5, beta=0.11, d=0.1, eps=0.005)
    base.update(kwargs)
    with pytest.raises(ValueError):
        Params(**base)


def test_physical_params_require_positive_capacity():
    with pytest.raises(ValueError):
        PhysicalParams(a=1.0, m=0.0, theta=0.5, beta=0.2, d=0.1, eps=0.01)


def test_presets_match_reference_configurations():
    assert PRESETS["fig4"] == Params(4.0, 0.5, 0.075, 0.1, 0.001)
    assert PRESETS["fig5a"] == Params(4.0, 0.5, 0.5, 0.1, 0.005)
    assert PRESETS["fig5b"] == Params(4.0, 0.5, 0.5, 0.3, 0.005)
    assert PRESETS["fig7"] == Params(4.0, 0.5, 0.11, 0.1, 0.005)
    with pytest.raises(KeyError):
        preset("fig99")
