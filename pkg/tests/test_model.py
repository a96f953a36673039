import math

import pytest
from hypothesis import given, strategies as st

from fqt.errors import DomainError
from fqt.model import SystemParams, spectral_function, thermal_occupancy


def test_occupancy_value():
    assert thermal_occupancy(1.0, 0.2) == pytest.approx(1.0 / (math.exp(5.0) - 1.0), rel=1e-14)


def test_occupancy_no_overflow_far_from_equilibrium():
    assert thermal_occupancy(1.0, 1e-5) == 0.0
    assert thermal_occupancy(-1.0, 1e-5) == -1.0


@given(st.floats(0.01, 5.0), st.floats(0.01, 2.0))
def test_occupancy_reflection(w, t):
    assert thermal_occupancy(-w, t) == pytest.approx(-(1.0 + thermal_occupancy(w, t)), rel=1e-12)


@given(st.floats(0.01, 5.0), st.floats(0.05, 2.0))
def test_kms_detailed_balance(w, t):
    assert spectral_function(-w, t) == pytest.approx(math.exp(-w / t) * spectral_function(w, t),
                                                      rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("w,t", [(0.0, 0.1), (1.0, 0.0), (1.0, -0.1)])
def test_occupancy_domain(w, t):
    with pytest.raises(DomainError):
        thermal_occupancy(w, t)


def test_zero_temperature_spectral_function():
    assert spectral_function(0.3, 0.0, kappa=2.0, zero_t=True) == pytest.approx(0.6)
    assert spectral_function(-0.3, 0.0, zero_t=True) == 0.0


def test_params_validation():
    with pytest.raises(DomainError):
        SystemParams(kappa=-1.0)
    with pytest.raises(DomainError):
        SystemParams(t_e=0.0)
    with pytest.raises(DomainError):
        SystemParams(t_b=0.0)
    assert SystemParams(t_b=0.0, tb_zero=True).tb_zero


def test_params_replace_and_temperature():
    p = SystemParams().replace(t_b=0.05)
    assert p.temperature("B") == 0.05
    assert p.temperature("E") == 0.2
    assert p.temperature("C") == 0.02
