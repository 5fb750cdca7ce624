import numpy as np
import pytest

from frac_riccati.adams import adams_batch, adams_solve
from frac_riccati.errors import BlowUpError, DomainError
from frac_riccati.series import RiccatiCoeffs, build_coefficients, eval_triplet_series
from oracles import riccati_closed_form


def test_classical_limit_second_order():
    lam, mu, nu, T = 0.5, -0.7, 1.2, 1.0
    exact, i1 = riccati_closed_form(lam, mu, nu, T)
    c = RiccatiCoeffs(lam, mu, nu, 1.0)
    errs = [abs(adams_solve(c, T, n).psi - exact) for n in (64, 128, 256)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.15)
    trip = adams_solve(c, T, 1024)
    assert abs(trip.i1_psi - i1) <= 1e-5 * abs(i1)
    assert trip.i1ma_psi == trip.psi


def test_matches_series_inside_radius():
    rng = np.random.default_rng(5)
    for _ in range(10):
        lam, nu = rng.uniform(0.1, 2.0, 2) * rng.choice([-1, 1], 2)
        mu = rng.uniform(-2.0, 2.0)
        alpha = rng.uniform(0.4, 1.0)
        c = RiccatiCoeffs(lam, mu, nu, alpha)
        s = build_coefficients(c)
        t = 0.5 * s.tau_star
        ref = eval_triplet_series(s, t)
        trip = adams_solve(c, t, 4096)
        for x, y in zip(trip.as_tuple(), ref.as_tuple()):
            assert abs(x - y) <= 1e-2 * abs(y)
        # psi itself converges faster than the first-order I_{1-alpha} quadrature
        assert abs(trip.psi - ref.psi) <= 1e-5 * abs(ref.psi)


def test_null_solution():
    assert adams_solve(RiccatiCoeffs(1.0, 1.0, 0.0, 0.7), 1.0, 16).as_tuple() == (0j, 0j, 0j)


def test_batch_vectorization():
    lam = np.array([0.3, 0.4 + 0.2j])
    mu = np.array([-0.5, 0.1j])
    nu = np.array([0.6, -1.0])
    psi, i1, i1ma = adams_batch(lam, mu, nu, 0.7, 0.8, 64)
    for i in range(2):
        single = adams_solve(RiccatiCoeffs(lam[i], mu[i], nu[i], 0.7), 0.8, 64)
        np.testing.assert_allclose([psi[i], i1[i], i1ma[i]], single.as_tuple(), rtol=1e-13)


def test_blow_up_reports_step():
    with pytest.raises(BlowUpError) as info:
        adams_solve(RiccatiCoeffs(1.0, 0.0, 1.0, 0.62), 5.0, 256)
    assert 0 < info.value.time < 5.0
    assert info.value.index == 0


@pytest.mark.parametrize("alpha,T,n", [(1.5, 1.0, 10), (0.5, -1.0, 10), (0.5, 1.0, 0)])
def test_domain(alpha, T, n):
    with pytest.raises(DomainError):
        adams_batch(1.0, 0.0, 1.0, alpha, T, n)
