import numpy as np
import pytest

from frac_riccati.errors import DomainError
from frac_riccati.heston import (HestonParams, joint_transform, log_price_cf, log_price_cf_batch, reference_params,
                                 riccati_from_heston, triplet_batch)
from frac_riccati.hybrid import HybridConfig
from oracles import classical_heston_cf, rough_heston_mc


def classical(p, u1, T):
    return classical_heston_cf(u1, T, p.eta, p.m, p.eta * p.zeta, p.rho, p.v0)


def test_riccati_mapping():
    p = reference_params()
    c = riccati_from_heston(p, 2.0 + 1.0j)
    assert c.lam == pytest.approx(0.5 * (0.1 * 0.331) ** 2)
    assert c.mu == pytest.approx(0.1 * ((2.0 + 1.0j) * -0.681 * 0.331 - 1.0))
    assert c.nu == pytest.approx(0.5 * ((2.0 + 1.0j) ** 2 - (2.0 + 1.0j)))
    assert c.alpha == 0.62


def test_parameter_validation():
    with pytest.raises(DomainError):
        HestonParams(1.2, 0.1, 0.3, 0.3, -0.5, 0.04)
    with pytest.raises(DomainError):
        HestonParams(0.6, 0.1, 0.3, 0.3, -1.0, 0.04)
    assert HestonParams.from_hurst(0.12, eta=0.1, m=0.3, zeta=0.3, rho=-0.5, v0=0.04).alpha == pytest.approx(0.62)
    assert reference_params().hurst == pytest.approx(0.12)


@pytest.mark.parametrize("u1", [2j, 0.5 + 3j, 10j, 2.1 + 40j])
@pytest.mark.parametrize("T", [0.1, 1.0])
def test_classical_limit_hybrid(u1, T):
    p = reference_params(1.0)
    got = log_price_cf(p, u1, T, "hybrid", cfg=HybridConfig(n=512))
    assert abs(got - classical(p, u1, T)) <= 1e-6


def test_classical_limit_series_inside_radius():
    p = reference_params(1.0)
    got = log_price_cf(p, 2j, 0.05, "series")
    assert abs(got - classical(p, 2j, 0.05)) <= 1e-10


def test_classical_limit_adams():
    p = reference_params(1.0)
    got = log_price_cf(p, 2j, 1.0, "adams", adams_steps=1024)
    assert abs(got - classical(p, 2j, 1.0)) <= 1e-6


def test_trivial_frequencies():
    p = reference_params()
    np.testing.assert_allclose(log_price_cf_batch(p, [0.0, 1.0], 1.0), [1.0, 1.0], rtol=0, atol=0)


def test_conjugate_symmetry():
    p = reference_params()
    u = np.array([0.3 + 2.0j, 2.1 + 15.0j, 5j])
    a = log_price_cf_batch(p, u, 0.5)
    b = log_price_cf_batch(p, np.conj(u), 0.5)
    np.testing.assert_allclose(a, np.conj(b), rtol=1e-12)


def test_modulus_bounded_on_imaginary_axis():
    p = reference_params()
    u = 1j * np.linspace(0.1, 80.0, 40)
    for T in (1 / 252, 0.25, 2.0):
        assert np.all(np.abs(log_price_cf_batch(p, u, T)) <= 1.0 + 1e-9)


def test_solvers_agree_for_rough_model():
    p = reference_params()
    u = np.array([2.1 + 5.0j, 2.1 + 50.0j])
    h = log_price_cf_batch(p, u, 0.5, "hybrid", cfg=HybridConfig(n=1024))
    a = log_price_cf_batch(p, u, 0.5, "adams", adams_steps=2048)
    np.testing.assert_allclose(h, a, rtol=1e-4, atol=1e-8)


def test_series_solver_outside_radius():
    with pytest.raises(DomainError):
        triplet_batch(reference_params(), [2.1 + 100j], 1.0, "series")


def test_unknown_solver():
    with pytest.raises(DomainError):
        triplet_batch(reference_params(), [1j], 1.0, "euler")


def test_joint_transform_reduces_to_marginal():
    p = reference_params(0.75)
    assert joint_transform(p, 0.5j, 0.0, 0.5) == pytest.approx(log_price_cf(p, 0.5j, 0.5))


def test_joint_transform_small_u2_continuity():
    p = reference_params(0.75)
    a = joint_transform(p, 0.5j, -1e-6, 0.5)
    b = log_price_cf(p, 0.5j, 0.5, cfg=HybridConfig(n=1024))
    assert abs(a - b) <= 1e-5


def test_joint_transform_monte_carlo():
    p = reference_params(0.75)
    exact = joint_transform(p, 0.5j, -0.5, 0.5)
    mc, se = rough_heston_mc(0.75, p.eta, p.m, p.zeta, p.rho, p.v0, 0.5, 0.5j, -0.5)
    assert abs(mc - exact) <= 0.05 * abs(exact)
    assert abs(mc - exact) <= 5 * se + 2e-3


def test_joint_transform_domain():
    p = reference_params(0.75)
    with pytest.raises(DomainError):
        joint_transform(p, 0.5j, 0.5, 0.5)
    with pytest.raises(DomainError):
        joint_transform(reference_params(0.5), 0.5j, -0.5, 0.5)


def test_pricing_radius_beyond_one_month():
    from frac_riccati.series import build_coefficients
    s = build_coefficients(riccati_from_heston(reference_params(), 2.1 + 100j))
    assert s.radius_conservative >= s.radius_empirical > 21 / 252
