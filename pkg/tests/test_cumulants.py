import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fqt.cumulants import (
    cgf_cumulants,
    char_poly_coeffs,
    cumulants,
    eigenvalue_cumulants,
    faddeev_leverrier,
    fano_ratio,
    finite_time_cgf,
    generator_cumulants,
    poly_derivatives,
    steady_state,
)
from fqt.errors import DegenerateGeneratorError, DomainError
from fqt.liouvillian import CountingField, Jump, TiltedGenerator, build_full, build_low_t
from fqt.model import SystemParams
from fqt.modulation import weights_pi_flip, weights_sinusoidal, weights_unmodulated


def ring(k=1.0):
    """Irreversible 4-state ring 0->1->2->3->0 with one counted step of unit energy."""
    jumps = [Jump(0, 1, k, "E", 1.0), Jump(1, 2, k, None, 0.0),
             Jump(2, 3, k, None, 0.0), Jump(3, 0, k, None, 0.0)]
    return TiltedGenerator(tuple(jumps), (-k,) * 4, SystemParams())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_faddeev_leverrier_matches_numpy(seed):
    m = np.random.default_rng(seed).normal(size=(4, 4))
    c = faddeev_leverrier([m])[:, 0]
    # det(L - zI) = (-1)^4 det(zI - L)
    ref = np.poly(m)[::-1]
    np.testing.assert_allclose(c, ref, atol=1e-10 * max(1, np.abs(ref).max()))


def test_ring_renewal_statistics():
    # Erlang renewal with 4 equal stages: mean rate k/4, Fano factor 1/4
    c = generator_cumulants(ring(2.0))
    assert c.mean["E"] == pytest.approx(0.5, rel=1e-13)
    assert c.variance["E"] == pytest.approx(0.125, rel=1e-12)
    assert c.mean["B"] == 0.0 and c.mean["C"] == 0.0
    np.testing.assert_allclose(c.populations, 0.25, rtol=1e-13)


@pytest.mark.parametrize("spec", [weights_unmodulated(), weights_sinusoidal(0.8, 0.2),
                                  weights_pi_flip(0.3)])
def test_taylor_matches_finite_differences(spec, params):
    g = build_full(params.replace(t_b=0.1), spec)
    for a in "EBC":
        exact = poly_derivatives(g, a, "taylor")
        fd = poly_derivatives(g, a, "fd", step=1e-2)
        # the entries that enter the mean and the variance
        for n, k in [(0, 1), (0, 2), (1, 1), (2, 0)]:
            assert fd[n, k] == pytest.approx(exact[n, k], rel=1e-5)


def test_steady_state(params):
    g = build_full(params, weights_sinusoidal(0.5, 0.1))
    rho = steady_state(g)
    assert rho.sum() == pytest.approx(1.0)
    assert np.all(rho > 0)
    assert np.max(np.abs(g.rates @ rho)) < 1e-14


def test_steady_state_requires_zero_field(params):
    g = build_full(params, weights_unmodulated(), CountingField(0.1, 0, 0))
    with pytest.raises(DomainError):
        steady_state(g)


def test_degenerate_generator():
    # two disconnected pairs of levels
    jumps = (Jump(0, 1, 1.0, "E", 1.0), Jump(1, 0, 1.0, "E", -1.0),
             Jump(2, 3, 1.0, "C", 1.0), Jump(3, 2, 1.0, "C", -1.0))
    g = TiltedGenerator(jumps, (-1.0,) * 4, SystemParams())
    with pytest.raises(DegenerateGeneratorError):
        generator_cumulants(g)


def test_equilibrium_has_zero_current_and_no_fano():
    p = SystemParams(t_e=0.15, t_b=0.15, t_c=0.15)
    c = cumulants(p, weights_unmodulated())
    for a in "EBC":
        assert abs(c.mean[a]) < 1e-15
        assert c.variance[a] > 0
    assert fano_ratio(0.0, 1.0) is None


@pytest.mark.parametrize("kind", ["full", "low_t"])
def test_conservation(kind, params):
    for t_b in (0.03, 0.08, 0.118, 0.16):
        c = cumulants(params.replace(t_b=t_b), weights_sinusoidal(0.8, 0.2), kind=kind)
        assert c.conservation_error() < 1e-12


def test_char_poly_of_complex_field(params):
    g = build_full(params, weights_sinusoidal(0.4, 0.1), CountingField(0.3, -0.2, 0.1))
    c = np.array(char_poly_coeffs(g).a)
    np.testing.assert_allclose(c, np.poly(g.matrix)[::-1], rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("spec", [weights_unmodulated(), weights_sinusoidal(0.8, 0.3)])
def test_oracles_agree(spec, params):
    g = build_full(params.replace(t_b=0.1), spec)
    c = generator_cumulants(g)
    for a in "EBC":
        for oracle in (eigenvalue_cumulants(g, a), cgf_cumulants(g, a)):
            assert oracle[0] == pytest.approx(c.mean[a], rel=1e-4)
            assert oracle[1] == pytest.approx(c.variance[a], rel=1e-4)


def test_low_t_cumulants_match_oracles(params):
    g = build_low_t(params, weights_sinusoidal(0.5, 0.2))
    c = generator_cumulants(g)
    m, v = eigenvalue_cumulants(g, "E")
    assert m == pytest.approx(c.mean["E"], rel=1e-5)
    assert v == pytest.approx(c.variance["E"], rel=1e-5)


def test_finite_time_cgf_normalized(params):
    g = build_full(params, weights_unmodulated())
    assert finite_time_cgf(g, np.full(4, 0.25), 0.0) == 0.0
    assert abs(finite_time_cgf(g, np.full(4, 0.25), 50.0)) < 1e-12
    with pytest.raises(DomainError):
        finite_time_cgf(g, np.full(4, 0.25), -1.0)


def test_unknown_method(params):
    with pytest.raises(DomainError):
        cumulants(params, weights_unmodulated(), method="magic")
