"""Doubly-indexed series for the Riccati equation with non-zero initial data.

With I_{1-alpha} psi(0) = u (and, for alpha > 1, the next initial datum v) the
solution expands as

    psi(t) = sum_{l >= 0} sum_{k >= k(l)} a_{k,l} t^(alpha k - l),

where level l collects the monomials carrying t^-l.  Level 0 is the
homogeneous series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import CoefficientPoleError, ConvergenceError, DomainError
from .series import RiccatiCoeffs, Triplet
from .special import beta, gamma, gamma_ratio

INF = math.inf


def _check_alpha(alpha: float, u_zero: bool):
    if 0.5 < alpha < 1.0 or 1.0 < alpha <= 2.0:
        return
    if alpha == 1.0 or (alpha <= 0.5 and u_zero):
        return
    raise DomainError(f"doubly-indexed expansion unsupported for alpha = {alpha} with u != 0")


def valuations(alpha: float, nu_zero: bool, u_zero: bool, v_zero: bool, L: int) -> list[float]:
    """First nonzero index k(l) per level l = 0..L (math.inf for an empty level)."""
    _check_alpha(alpha, u_zero)
    out: list[float] = [INF if nu_zero else 1]
    if alpha <= 1.0:
        out += [INF if u_zero else max(2 * l - 1, 1) for l in range(1, L + 1)]
        return out
    for l in range(1, L + 1):
        if u_zero and v_zero:
            out.append(INF)
        elif u_zero and l % 2:
            # without u only even levels are fed (through a_{1,2})
            out.append(INF)
        else:
            out.append(1 if l <= 2 else l)
    if u_zero and not v_zero and L >= 2:
        out[2] = 1
    return out


@dataclass(frozen=True)
class DoubleSeries:
    equation: RiccatiCoeffs
    u: complex
    v: complex
    coeffs: np.ndarray = field(repr=False)  # shape (L_max+1, k_cap), column k-1
    valuations: tuple
    theta_star: float | None
    rho_star_level: float | None

    @property
    def alpha(self) -> float:
        return self.equation.alpha

    @property
    def L_max(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def k_cap(self) -> int:
        return self.coeffs.shape[1]

    def level(self, l: int) -> np.ndarray:
        """Coefficients a_{k,l} for k = k(l)..k_cap (empty for an infinite valuation)."""
        k = self.valuations[l]
        if k == INF:
            return np.zeros(0, dtype=complex)
        return self.coeffs[l, int(k) - 1:]

    def coefficient(self, k: int, l: int) -> complex:
        return complex(self.coeffs[l, k - 1])


def _level_conv(a: np.ndarray, b: np.ndarray, L: int) -> np.ndarray:
    return np.convolve(a, b)[: L + 1]


def build_double_coefficients(c: RiccatiCoeffs, u: complex, v: complex = 0j,
                              L_max: int = 20, k_cap: int = 60,
                              enforce_valuations: bool = True) -> DoubleSeries:
    """All a_{k,l} for l <= L_max, k <= k_cap via the two-index recursion.

    With ``enforce_valuations`` the coefficients below k(l) are set to zero, as
    the expansion is defined.  This only matters for alpha > 1, where products
    of the t^(alpha-2) seed would otherwise feed non-integrable monomials.
    """
    alpha = c.alpha
    u, v = complex(u), complex(v)
    _check_alpha(alpha, u == 0)
    if L_max < 0 or k_cap < 1:
        raise DomainError("L_max must be >= 0 and k_cap >= 1")
    lam, mu, nu = complex(c.lam), complex(c.mu), complex(c.nu)
    L = L_max
    A = np.zeros((L + 1, k_cap), dtype=complex)
    A[0, 0] = nu / complex(gamma(alpha + 1.0))
    if L >= 1:
        A[1, 0] = u / complex(gamma(alpha))
    if alpha > 1.0 and L >= 2:
        A[2, 0] = v / complex(gamma(alpha - 1.0))
    levels = np.arange(L + 1, dtype=float)
    vals = valuations(alpha, nu == 0, u == 0, v == 0 or alpha <= 1.0, L)
    if enforce_valuations:
        floor = [k_cap + 1 if x == INF else int(x) for x in vals]
    else:
        floor = [1] * (L + 1)
    for k in range(2, k_cap + 1):
        # square at index k-1: pairs (k1, k-1-k1), k1 = 1..k-2
        sq = np.zeros(L + 1, dtype=complex)
        for k1 in range(1, k - 1):
            sq += _level_conv(A[:, k1 - 1], A[:, k - 2 - k1], L)
        pre = mu * A[:, k - 2] + lam * sq
        num = alpha * (k - 1) - levels + 1.0
        den = alpha * k - levels + 1.0
        for l in range(L + 1):
            if pre[l] == 0 or k < floor[l]:
                continue
            if num[l] <= 0 and num[l] == round(num[l]):
                raise CoefficientPoleError(k, l)
            A[l, k - 1] = pre[l] * gamma_ratio(num[l], den[l])
    theta, rho = (None, None)
    if 0.5 < alpha < 1.0 and u != 0 and lam != 0:
        theta, rho = level_constants(c, u)
    return DoubleSeries(c, u, v, A, tuple(vals), theta, rho)


def level_constants(c: RiccatiCoeffs, u: complex) -> tuple[float, float]:
    """(theta_*, rho_*(alpha, theta_*)) from the constructive level-wise bound, alpha in (1/2, 1)."""
    alpha = c.alpha
    if not 0.5 < alpha < 1.0:
        raise DomainError("level constants are available for alpha in (1/2, 1)")
    lam, mu, nu, ua = abs(complex(c.lam)), abs(complex(c.mu)), abs(complex(c.nu)), abs(complex(u))
    b2 = float(beta(alpha / 2.0, alpha / 2.0))
    k1 = (1.0 + alpha / (2 * alpha - 1)) * 2.0 ** (-alpha / 2) * (2 * alpha - 1) ** (-alpha) \
        * (1.0 + 3 * (1 - alpha) / (4 * (2 * alpha - 1))) ** (-alpha)
    k2 = alpha / (3 * alpha - 1) * (2 * alpha * (2 * alpha - 1)) ** (-alpha / 2) \
        * max(2 * (2 * alpha - 1) / (1 - alpha), 1.0) ** (alpha / 2)
    b_bar = b2 * (b2 + 1.0)
    g_a, g_a1 = float(gamma(alpha)), float(gamma(alpha + 1.0))

    def rho_of(theta):
        c0 = max(nu / g_a1, ua / (theta * g_a))
        rho1 = math.sqrt(lam * ua * b2 * k1 / (theta * g_a))
        rho2 = 2.0 ** (-alpha / 2) * k2 * (mu + math.sqrt(mu ** 2 + 2.0 ** (alpha - 2) * lam * c0 * b_bar / k2))
        return max(rho1, rho2)

    fn = lambda th: th * rho_of(th) ** (1.0 / alpha) - 1.0  # noqa: E731
    hi = 1.0
    while fn(hi) < 0:
        hi *= 2.0
    lo = hi / 2.0
    while fn(lo) > 0:
        lo /= 2.0
    theta = brentq(fn, lo, hi, xtol=1e-14, rtol=1e-12)
    return theta, rho_of(theta)


def starting_values_closed_form(c: RiccatiCoeffs, u: complex, L: int) -> np.ndarray:
    """a_{2l-1,l} for l = 1..L in closed form (alpha in (1/2, 1))."""
    alpha = c.alpha
    if not 0.5 < alpha < 1.0:
        raise DomainError("closed-form starting values need alpha in (1/2, 1)")
    lam = complex(c.lam)
    g = complex(u) / complex(gamma(alpha))
    cs = np.zeros(L + 1, dtype=complex)
    cs[1] = 1.0
    d = 2.0 * alpha - 1.0
    for l in range(2, L + 1):
        conv = np.dot(cs[1:l], cs[l - 1:0:-1])
        cs[l] = gamma_ratio(d * (l - 1), d * l + 1.0 - alpha) * conv
    ell = np.arange(1, L + 1)
    return lam ** (ell - 1) * g ** ell * cs[1:]


def starting_values_closed_form_high(c: RiccatiCoeffs, u: complex, v: complex, L: int) -> np.ndarray:
    """Diagonal a_{l,l} for l = 1..L in closed form (alpha in (1, 2])."""
    alpha = c.alpha
    if not 1.0 < alpha <= 2.0:
        raise DomainError("closed-form diagonal needs alpha in (1, 2]")
    lam, mu = complex(c.lam), complex(c.mu)
    if lam == 0:
        raise DomainError("closed-form diagonal needs lambda != 0")
    q = 2.0 * lam * complex(v) / complex(gamma(alpha - 1.0))
    out = np.zeros(L, dtype=complex)
    b = alpha - 1.0
    for d in range(1, L + 1):
        if d % 2 == 0:
            half = d // 2
            prod = np.prod([gamma_ratio((2 * j - 1) * b, (2 * j - 1) * b + alpha) for j in range(1, half + 1)])
            out[d - 1] = mu / (2.0 * lam) * q ** half * prod
        else:
            half = (d - 1) // 2
            prod = np.prod([gamma_ratio(2 * j * b, 2 * j * b + alpha) for j in range(1, half + 1)]) if half else 1.0
            out[d - 1] = complex(u) / complex(gamma(alpha)) * q ** half * prod
    return out


def _level_terms(ds: DoubleSeries, t: float, l: int):
    k = np.arange(1, ds.k_cap + 1, dtype=float)
    r = ds.alpha * k - l
    a = ds.coeffs[l]
    mask = a != 0
    return a[mask], r[mask]


def eval_double_triplet(ds: DoubleSeries, t: float, tol: float = 1e-10):
    """(psi, I_1 psi, I_{1-alpha} psi)(t) by term-wise integration; also returns levels used."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        if ds.u != 0 or (ds.alpha > 1 and ds.v != 0):
            raise DomainError("psi is singular at t = 0 when the initial data are non-zero")
        return Triplet(0j, 0j, 0j), 0
    total = np.zeros(3, dtype=complex)
    quiet = 0
    tail = 0.0
    for l in range(ds.L_max + 1):
        a, r = _level_terms(ds, t, l)
        if a.size == 0:
            part = np.zeros(3, dtype=complex)
        else:
            if np.any(r <= -1.0):
                raise DomainError(f"level {l} holds a non-integrable monomial")
            p = t ** r
            terms = a * p
            tail = max(tail, abs(terms[-1]) / max(1.0, abs(terms.sum())))
            part = np.array([terms.sum(),
                             np.sum(terms * t / (r + 1.0)),
                             np.sum(a * gamma_ratio(r + 1.0, r + 2.0 - ds.alpha) * t ** (r + 1.0 - ds.alpha))])
        total += part
        small = abs(part[0]) <= tol * max(1.0, abs(total[0]))
        quiet = quiet + 1 if (l >= 1 and small) else 0
        if quiet >= 2:
            if tail > 1e-6:
                raise ConvergenceError(f"k-series not converged at t={t} (relative tail {tail:.2e}); raise k_cap")
            return Triplet(*(complex(x) for x in total)), l + 1
    raise ConvergenceError(f"level contributions did not decay within L_max={ds.L_max}")


def eval_double(ds: DoubleSeries, t: float, tol: float = 1e-10) -> tuple[complex, int]:
    """psi(t) from the double series and the number of levels used."""
    trip, used = eval_double_triplet(ds, t, tol)
    return trip.psi, used


def level_sums(ds: DoubleSeries, t: float) -> np.ndarray:
    """psi_l(t) for every level, for inspecting level decay."""
    out = np.zeros(ds.L_max + 1, dtype=complex)
    for l in range(ds.L_max + 1):
        a, r = _level_terms(ds, t, l)
        out[l] = np.sum(a * t ** r) if a.size else 0.0
    return out
