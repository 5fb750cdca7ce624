"""One check per acceptance criterion of the reproduction."""
import math
import time

import mpmath
import numpy as np
import pytest

from frac_riccati.handlers import convergence, skew
from frac_riccati.heston import log_price_cf, reference_params, riccati_from_heston
from frac_riccati.hybrid import HybridConfig, rr3
from frac_riccati.nonhomog import (build_double_coefficients, eval_double, starting_values_closed_form,
                                   starting_values_closed_form_high)
from frac_riccati.pricing import implied_vol, price_book
from frac_riccati.schemas import ConvergenceRequest, SkewRequest
from frac_riccati.series import (RiccatiCoeffs, build_coefficients, eval_triplet_series, mu_flip_coefficients,
                                 odd_subsequence_coeffs, radius_empirical, radius_upper_bound, rho_c_star, tau_star,
                                 truncation_bound)
from oracles import classical_heston_cf, riccati_blowup_time, riccati_closed_form

BENCH = RiccatiCoeffs(0.045, -64.938, 44850.0, 0.64)


@pytest.fixture(scope="module")
def benchmark_convergence():
    ns = [2 ** j for j in range(3, 14)]
    return convergence(ConvergenceRequest(ns=ns, n_ref=2 ** 15))


def test_ac1_radius_table():
    expected = {0.5: 21.0481, 5.0: 5.6586, 10.0: 2.3846, 50.0: 0.2201, 100.0: 0.0739, 500.0: 0.0056}
    p = reference_params()
    start = time.perf_counter()
    got = {u: tau_star(riccati_from_heston(p, u)) for u in expected}
    assert time.perf_counter() - start < 1.0
    for u, v in expected.items():
        # table entries carry four decimals
        assert got[u] == pytest.approx(v, rel=1e-3, abs=5e-5)


def test_ac2_benchmark_triplet():
    s = build_coefficients(BENCH, 250)
    start = time.perf_counter()
    trip = eval_triplet_series(s, 1.0 / 252.0, 200)
    assert time.perf_counter() - start < 0.01
    expected = (165.7590, 21.2394, 0.4409)
    for x, y in zip(trip.as_tuple(), expected):
        assert abs(x - y) <= 5e-4


def test_ac3_error_expansion_diagnostic(benchmark_convergence):
    cbar = {r.n: r.cbar1 for r in benchmark_convergence.rows}
    for n, v in ((8, 123.8478), (256, 103.8532), (8192, 101.1105)):
        assert cbar[n] == pytest.approx(v, rel=1e-2)
    seq = [cbar[n] for n in sorted(cbar)]
    assert all(a > b for a, b in zip(seq, seq[1:]))


def test_ac4_order_of_convergence(benchmark_convergence):
    rows = [r for r in benchmark_convergence.rows if r.n >= 2 ** 6]
    slope = np.polyfit(np.log([r.n for r in rows]), np.log([r.err_plain for r in rows]), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)
    r = next(r for r in rows if r.n == 2 ** 12)
    assert r.err_rr3 <= r.err_rr2 <= r.err_plain


def test_ac5_pricing_golden_subset():
    start = time.perf_counter()
    table = price_book(reference_params())
    assert time.perf_counter() - start < 60.0
    assert len(table.cells) == 54
    cells = {(round(c.spec.maturity * 252), c.spec.strike_pct): c.hybrid for c in table.cells}
    for (days, k), price in (((21, 100.0), 2.3896), ((252, 100.0), 9.4737), ((504, 120.0), 7.5093)):
        r = cells[(days, k)]
        assert r.steps == 128
        assert abs(r.implied_vol - implied_vol(price, 100.0, k, days / 252)) <= 1e-2
    # the one-day deep in-the-money quote is pure intrinsic at the displayed precision
    assert abs(cells[(1, 80.0)].price - 20.0) <= 5e-5


def test_ac6_classical_limit_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        lam, nu = rng.uniform(0.1, 1.0, 2) * rng.choice([-1.0, 1.0], 2)
        mu = rng.uniform(-2.0, 2.0)
        s = build_coefficients(RiccatiCoeffs(lam, mu, nu, 1.0))
        R = s.radius_conservative
        t = 0.5 * R
        psi, i1 = riccati_closed_form(lam, mu, nu, t)
        trip = eval_triplet_series(s, t)
        assert abs(trip.psi - psi) <= 1e-8 * abs(psi)
        assert abs(trip.i1_psi - i1) <= 1e-8 * abs(i1)
        T = min(1.5 * R, 0.5 * riccati_blowup_time(lam, mu, nu, 10.0 * R))
        psi, i1 = riccati_closed_form(lam, mu, nu, T)
        h = rr3(s, T, HybridConfig(n=2 ** 12))
        assert abs(h.psi - psi) <= 1e-4 * abs(psi)
        assert abs(h.i1_psi - i1) <= 1e-4 * abs(i1)
    p = reference_params(1.0)
    for u in (2j, 0.5 + 3j, 10j, 2.1 + 40j):
        for T in (0.1, 1.0):
            ref = classical_heston_cf(u, T, p.eta, p.m, p.eta * p.zeta, p.rho, p.v0)
            assert abs(log_price_cf(p, u, T) - ref) <= 1e-6


def test_ac7_property_suite():
    rng = np.random.default_rng(7)
    for _ in range(25):
        lam, nu = rng.uniform(0.05, 3.0, 2)
        alpha = rng.uniform(0.3, 1.8)
        mu = rng.uniform(-3.0, 3.0)
        # null solution
        assert not np.any(build_coefficients(RiccatiCoeffs(lam, mu, 0.0, alpha), 60).coeffs)
        # mu-flip: equal moduli and radii
        c = RiccatiCoeffs(lam, mu, nu, alpha)
        a, b, _ = mu_flip_coefficients(c, 120)
        np.testing.assert_allclose(np.abs(a), np.abs(b), rtol=1e-10)
        r1 = build_coefficients(c, 120).radius_empirical
        r2 = build_coefficients(RiccatiCoeffs(lam, -mu, nu, alpha), 120).radius_empirical
        assert r1 == pytest.approx(r2, rel=1e-12)
        # mu = 0: even coefficients vanish and the odd subsequence recursion agrees
        c0 = RiccatiCoeffs(lam * rng.choice([-1.0, 1.0]), 0.0, nu, alpha)
        a0 = build_coefficients(c0, 80).coeffs
        assert np.all(a0[1::2] == 0)
        np.testing.assert_allclose(odd_subsequence_coeffs(c0, 40), a0[0::2], rtol=1e-11)
        # propagated bound, in logs
        cc = RiccatiCoeffs(complex(*rng.uniform(-3, 3, 2)), complex(*rng.uniform(-3, 3, 2)),
                           complex(*rng.uniform(-3, 3, 2)), alpha)
        s = build_coefficients(cc, 150)
        rho, cst = rho_c_star(cc)
        k = np.arange(1, 151)
        with np.errstate(divide="ignore"):
            lhs = np.log(np.abs(s.scaled_coeffs)) - k * math.log(s.scale)
        rhs = math.log(cst) + k * math.log(rho) + (alpha - 1.0) * np.log(k)
        live = np.isfinite(lhs)
        assert np.all(lhs[live] <= rhs[live] + 1e-9 * np.abs(rhs[live]) + 1e-9)
        # radius sandwich for lam, nu > 0 and mu >= 0
        mu_pos = 0.0 if rng.random() < 0.2 else rng.uniform(0.01, 3.0)
        cp = RiccatiCoeffs(lam, mu_pos, nu, alpha)
        sp = build_coefficients(cp, 200)
        n = 200 if mu_pos > 0 else 199
        assert sp.tau_star <= radius_empirical(sp, n) <= radius_upper_bound(cp)
    # truncation bound on 50 random points
    for _ in range(50):
        lam, nu = rng.uniform(0.1, 2.0, 2) * rng.choice([-1, 1], 2)
        c = RiccatiCoeffs(lam, rng.uniform(-2.0, 2.0), nu, rng.uniform(0.3, 1.5))
        s = build_coefficients(c, 250)
        t = rng.uniform(0.05, 0.7) * s.tau_star
        n0 = int(rng.integers(2, 30))
        err = abs(eval_triplet_series(s, t).psi - eval_triplet_series(s, t, n0).psi)
        assert err <= truncation_bound(s, t, n0) * (1 + 1e-9) + 1e-300


def test_ac8_nonhomogeneous_suite():
    c = RiccatiCoeffs(0.8 + 0.2j, 0.4, -1.0, 0.75)
    u = -0.5 + 0.3j
    ds = build_double_coefficients(c, u, L_max=10, k_cap=25)
    rec = np.array([ds.coefficient(2 * l - 1, l) for l in range(1, 11)])
    np.testing.assert_allclose(rec, starting_values_closed_form(c, u, 10), rtol=1e-12)
    ch = RiccatiCoeffs(0.7, -0.6, 0.5, 1.4)
    dh = build_double_coefficients(ch, 0.3, 0.2, L_max=8, k_cap=20)
    rec = np.array([dh.coefficient(l, l) for l in range(1, 9)])
    np.testing.assert_allclose(rec, starting_values_closed_form_high(ch, 0.3, 0.2, 8), rtol=1e-12)
    # u = v = 0 reduces to the homogeneous series: zero higher levels, level 0 to rounding
    for cz in (c, ch):
        extra = (0.0,) if cz.alpha > 1 else ()
        dz = build_double_coefficients(cz, 0.0, *extra, L_max=4, k_cap=50)
        np.testing.assert_allclose(dz.coeffs[0], build_coefficients(cz, 50).coeffs, rtol=1e-13, atol=0)
        assert not np.any(dz.coeffs[1:])
    lam, mu, nu, alpha, u = 0.5, -0.3, 0.2, 0.75, 0.1
    dv = build_double_coefficients(RiccatiCoeffs(lam, mu, nu, alpha), u, L_max=30, k_cap=80)
    t = 0.3
    psi = lambda s: complex(eval_double(dv, float(s), 1e-15)[0])  # noqa: E731
    mpmath.mp.dps = 15
    integral = mpmath.quad(lambda s: (lam * psi(s) ** 2 + mu * psi(s) + nu) * (t - s) ** (alpha - 1), [0, t / 2, t])
    rhs = u * t ** (alpha - 1) / math.gamma(alpha) + complex(integral) / math.gamma(alpha)
    assert abs(psi(t) - rhs) <= 1e-10 * abs(psi(t))


def test_ac9_skew_term_structure():
    out = skew(SkewRequest())
    curve = {a: [abs(r.skew) for r in out.rows if r.alpha == a] for a in (0.62, 1.0)}
    rough = curve[0.62]
    assert len(rough) == 5 and all(a > b for a, b in zip(rough, rough[1:]))
    flat = curve[1.0]
    assert max(flat) / min(flat) < 3.0
