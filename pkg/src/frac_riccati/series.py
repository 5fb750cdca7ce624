"""Fractional power series for D^alpha psi = lambda psi^2 + mu psi + nu, psi(0) = 0.

The solution is expanded as psi(t) = sum_k a_k t^(k alpha).  Coefficients are
stored scaled, a_k S^k with S = tau_*^alpha, so that stiff configurations whose
raw coefficients exceed the double range stay representable.  Evaluation then
uses the reduced variable x = t^alpha / S.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UndefinedRadiusError
from .special import beta, gamma, gamma_ratio


@dataclass(frozen=True)
class RiccatiCoeffs:
    """Coefficients (lambda, mu, nu) and order alpha of the Riccati equation."""
    lam: complex
    mu: complex
    nu: complex
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise DomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        for name in ("lam", "mu", "nu"):
            value = getattr(self, name)
            if not np.isfinite(complex(value)):
                raise DomainError(f"{name} must be finite, got {value}")

    @property
    def standing_assumption(self) -> bool:
        """True when lambda * nu != 0."""
        return complex(self.lam) * complex(self.nu) != 0

    @property
    def is_real(self) -> bool:
        return all(complex(v).imag == 0 for v in (self.lam, self.mu, self.nu))


@dataclass(frozen=True)
class Triplet:
    """(psi, I_1 psi, I_{1-alpha} psi) at a single time."""
    psi: complex
    i1_psi: complex
    i1ma_psi: complex

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return (self.psi, self.i1_psi, self.i1ma_psi)

    def __add__(self, other: "Triplet") -> "Triplet":
        return Triplet(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def __sub__(self, other: "Triplet") -> "Triplet":
        return Triplet(*(a - b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def scale(self, w: float) -> "Triplet":
        return Triplet(*(w * a for a in self.as_tuple()))


def convolution_square(a, k: int) -> complex:
    """Cauchy square sum_{l=1}^{k-1} a_l a_{k-l} (a is indexed from 1)."""
    a = np.asarray(a)
    if not 1 <= k <= a.size:
        raise IndexError(f"k={k} outside 1..{a.size}")
    if k == 1:
        return 0j if np.iscomplexobj(a) else 0.0
    head = a[: k - 1]
    return complex(np.dot(head, head[::-1])) if np.iscomplexobj(a) else float(np.dot(head, head[::-1]))


# -- batched kernels (leading axis = independent equations) -----------------

def _recursion_ratios(alpha: float, r_max: int) -> np.ndarray:
    k = np.arange(1, r_max, dtype=float)
    return gamma_ratio(alpha * k + 1.0, alpha * k + alpha + 1.0)


def scaled_recursion(lam, mu, nu, alpha: float, r_max: int, scale) -> np.ndarray:
    """Coefficients a_k scale^k, k = 1..r_max, for a batch of equations."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    mu = np.atleast_1d(np.asarray(mu, dtype=complex))
    nu = np.atleast_1d(np.asarray(nu, dtype=complex))
    scale = np.atleast_1d(np.asarray(scale, dtype=float))
    lam, mu, nu, scale = np.broadcast_arrays(lam, mu, nu, scale)
    out = np.zeros((lam.size, r_max), dtype=complex)
    ratios = _recursion_ratios(alpha, r_max)
    out[:, 0] = scale * nu / float(gamma(alpha + 1.0))
    for k in range(1, r_max):
        # out[:, k] holds index k+1; the square uses indices 1..k-1
        if k >= 2:
            head = out[:, : k - 1]
            sq = np.einsum("ij,ij->i", head, head[:, ::-1])
        else:
            sq = 0.0
        out[:, k] = scale * (lam * sq + mu * out[:, k - 1]) * ratios[k - 1]
    return out


def tau_star_batch(lam, mu, nu, alpha: float) -> np.ndarray:
    lam_abs = np.abs(np.asarray(lam, dtype=complex))
    mu_abs = np.abs(np.asarray(mu, dtype=complex))
    nu_abs = np.abs(np.asarray(nu, dtype=complex))
    lam_abs, mu_abs, nu_abs = np.broadcast_arrays(lam_abs, mu_abs, nu_abs)
    pos = lambda x: max(x, 0.0)  # noqa: E731
    a1 = min(alpha, 1.0)
    c_alpha = 2.0 ** (2.0 - pos(1.0 - 2.0 * alpha) - 2.0 * pos(alpha - 1.0)) \
        * alpha ** (alpha - 1.0) * float(beta(a1, a1))
    num = 2.0 ** (1.0 / alpha - pos(1.0 / alpha - 2.0)) * alpha
    den = (mu_abs + np.sqrt(mu_abs ** 2 + c_alpha * lam_abs * nu_abs / float(gamma(alpha)))) ** (1.0 / alpha)
    with np.errstate(divide="ignore"):
        tau = np.where(lam_abs == 0, np.inf, num / np.where(den == 0, 1.0, den))
    return np.where((lam_abs != 0) & (den == 0), np.inf, tau)


def _primed_factors(alpha: float, r_max: int) -> np.ndarray:
    r = np.arange(1, r_max + 1, dtype=float)
    return gamma_ratio(alpha * r + 1.0, alpha * (r - 1.0) + 1.0) / (alpha * r + 1.0 - alpha)


def _radius_from_scaled(value, n: int, alpha: float, scale):
    mod = np.abs(value)
    with np.errstate(divide="ignore"):
        return np.where(mod == 0, np.inf,
                        np.exp(-np.log(np.where(mod == 0, 1.0, mod)) / (alpha * n)) * scale ** (1.0 / alpha))


def _initial_scale(lam, mu, nu, alpha: float) -> np.ndarray:
    tau = np.atleast_1d(tau_star_batch(lam, mu, nu, alpha))
    s = np.where(np.isfinite(tau), tau ** alpha, 1.0)
    return np.where(s > 0, s, 1.0)


def build_scaled_batch(lam, mu, nu, alpha: float, r_max: int):
    """Scaled coefficients and scales for a batch; rescales once if the tail underflows."""
    scale = _initial_scale(lam, mu, nu, alpha)
    coeffs = scaled_recursion(lam, mu, nu, alpha, r_max, scale)
    tail = np.abs(coeffs[:, -1])
    nonzero = np.any(coeffs != 0, axis=1)
    redo = nonzero & (tail < 1e-200)
    if np.any(redo):
        mods = np.abs(coeffs[redo])
        idx = np.arange(1, r_max + 1)
        usable = mods > 1e-280
        last = np.where(usable, idx, 0).max(axis=1)
        last = np.maximum(last, 1)
        val = mods[np.arange(mods.shape[0]), last - 1]
        radius = _radius_from_scaled(val, last, alpha, scale[redo])
        new_scale = np.where(np.isfinite(radius), radius ** alpha, scale[redo])
        scale = scale.copy()
        scale[redo] = new_scale
        coeffs[redo] = scaled_recursion(np.broadcast_to(lam, scale.shape)[redo],
                                        np.broadcast_to(mu, scale.shape)[redo],
                                        np.broadcast_to(nu, scale.shape)[redo], alpha, r_max, new_scale)
    return coeffs, scale


def conservative_radius_batch(coeffs, scale, alpha: float) -> np.ndarray:
    r_max = coeffs.shape[1]
    if r_max < 2:
        raise DomainError("the conservative radius needs r_max >= 2")
    primed = coeffs[:, -1] * _primed_factors(alpha, r_max)[-1]
    return _radius_from_scaled(primed, r_max, alpha, scale)


def eval_scaled(coeffs, scale, alpha: float, t, r0: int):
    """Batched triplet partial sums at times t (shape (..., ) broadcast against the batch).

    coeffs has shape (B, r_max); t has shape (B,) or (B, m).  Returns three
    arrays shaped like t.
    """
    r0 = min(r0, coeffs.shape[1])
    c = coeffs[:, :r0]
    t = np.asarray(t, dtype=float)
    squeeze = t.ndim == 1
    tt = t[:, None] if squeeze else t
    x = tt ** alpha / scale[:, None]
    r = np.arange(1, r0 + 1, dtype=float)
    w_i1 = 1.0 / (alpha * r + 1.0)
    w_i1ma = gamma_ratio(alpha * r + 1.0, alpha * r + 2.0 - alpha)
    psi = np.zeros(tt.shape, dtype=complex)
    i1 = np.zeros(tt.shape, dtype=complex)
    i1ma = np.zeros(tt.shape, dtype=complex)
    # Horner on x, highest index first
    for j in range(r0 - 1, -1, -1):
        cj = c[:, j][:, None]
        psi = (psi + cj) * x
        i1 = (i1 + cj * w_i1[j]) * x
        i1ma = (i1ma + cj * w_i1ma[j]) * x
    i1 = tt * i1
    with np.errstate(divide="ignore", invalid="ignore"):
        i1ma = np.where(tt > 0, tt ** (1.0 - alpha) * i1ma, 0.0)
    if squeeze:
        return psi[:, 0], i1[:, 0], i1ma[:, 0]
    return psi, i1, i1ma


# -- single-equation API -----------------------------------------------------

@dataclass(frozen=True)
class SeriesSolution:
    """Series coefficients of one equation together with radius estimates."""
    equation: RiccatiCoeffs
    scaled_coeffs: np.ndarray = field(repr=False)
    scale: float
    r_max: int
    radius_empirical: float
    radius_conservative: float
    tau_star: float
    rho_star: float
    c_star: float

    @property
    def alpha(self) -> float:
        return self.equation.alpha

    @property
    def coeffs(self) -> np.ndarray:
        """Unscaled a_1..a_{r_max}; entries may overflow to inf for stiff equations."""
        k = np.arange(1, self.r_max + 1, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            return self.scaled_coeffs * np.exp(-k * math.log(self.scale))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.scaled_coeffs)


def tau_star(c: RiccatiCoeffs) -> float:
    """Provable lower bound on the convergence radius (+inf when lambda = 0)."""
    return float(tau_star_batch(c.lam, c.mu, c.nu, c.alpha))


def rho_c_star(c: RiccatiCoeffs) -> tuple[float, float]:
    """Constants of the propagated bound |a_k| <= C* rho*^k k^(alpha-1)."""
    if complex(c.lam) == 0:
        raise DomainError("rho_* is defined for lambda != 0")
    alpha = c.alpha
    lam, mu, nu = abs(complex(c.lam)), abs(complex(c.mu)), abs(complex(c.nu))
    if alpha <= 1.0:
        p = max(1.0 - 2.0 * alpha, 0.0)
        disc = mu ** 2 + 2.0 ** (2.0 - p) * alpha ** (alpha - 1.0) \
            * float(gamma_ratio(alpha, 2.0 * alpha)) * lam * nu
        rho = (mu + math.sqrt(disc)) / (2.0 ** (1.0 - p) * alpha ** alpha)
    else:
        disc = mu ** 2 + 2.0 ** (2.0 * (2.0 - alpha)) * alpha ** (alpha - 1.0) * lam * nu / float(gamma(alpha))
        rho = (mu + math.sqrt(disc)) / (2.0 * alpha ** alpha)
    if rho == 0:
        return 0.0, math.inf if nu else 0.0
    return rho, nu / (float(gamma(alpha + 1.0)) * rho)


def build_coefficients(c: RiccatiCoeffs, r_max: int = 250) -> SeriesSolution:
    """Run the coefficient recursion up to r_max and attach radius estimates."""
    if r_max < 1:
        raise DomainError(f"r_max must be >= 1, got {r_max}")
    coeffs, scale = build_scaled_batch(c.lam, c.mu, c.nu, c.alpha, r_max)
    coeffs, scale = coeffs[0], float(scale[0])
    # a_{r_max} can vanish structurally (mu = 0, even r_max); use the last nonzero term
    nz = np.flatnonzero(coeffs)
    m = int(nz[-1]) + 1 if nz.size else r_max
    r_emp = float(_radius_from_scaled(coeffs[m - 1], m, c.alpha, scale))
    if m >= 2:
        r_hat = float(conservative_radius_batch(coeffs[None, :m], np.array([scale]), c.alpha)[0])
    else:
        r_hat = r_emp
    tau = tau_star(c)
    if complex(c.lam) != 0:
        rho, cst = rho_c_star(c)
    else:
        rho, cst = 0.0, math.inf
    return SeriesSolution(c, coeffs, scale, r_max, r_emp, r_hat, tau, rho, cst)


def radius_empirical(s: SeriesSolution, n: int | None = None) -> float:
    """R^(n) = |a_n|^(-1/(alpha n)); +inf when every computed coefficient vanishes."""
    n = s.r_max if n is None else n
    if not 1 <= n <= s.r_max:
        raise IndexError(f"n={n} outside 1..{s.r_max}")
    if s.is_zero:
        return math.inf
    value = s.scaled_coeffs[n - 1]
    if value == 0:
        raise UndefinedRadiusError(f"a_{n} = 0, radius estimate undefined")
    return float(_radius_from_scaled(value, n, s.alpha, s.scale))


def radius_conservative(s: SeriesSolution) -> float:
    """R-hat from the primed coefficient a'_r at the last nonzero index r <= r_max."""
    if s.r_max < 2:
        raise DomainError("the conservative radius needs r_max >= 2")
    if s.is_zero:
        return math.inf
    return s.radius_conservative


def radius_upper_bound(c: RiccatiCoeffs) -> float | None:
    """Upper bound on the radius for real coefficients with lambda nu > 0; None otherwise."""
    if not c.is_real:
        return None
    lam, nu = complex(c.lam).real, complex(c.nu).real
    if lam * nu <= 0:
        return None
    alpha = c.alpha
    if alpha <= 1.0:
        c_alpha = (3.0 * 5.0 ** (alpha - 1.0)) ** (1.0 / (2.0 * alpha)) * math.sqrt(alpha)
    else:
        b_tilde = float(beta(alpha, alpha)) - 2.0 ** (1.0 - 2.0 * alpha)
        c_alpha = math.sqrt(2.0 * alpha) / b_tilde
    return c_alpha * (float(gamma(alpha + 1.0)) / (lam * nu)) ** (1.0 / (2.0 * alpha))


def truncation_bound(s: SeriesSolution, t: float, n0: int, radius: float | None = None) -> float:
    """Bound on |psi(t) - sum_{k<=n0} a_k t^(k alpha)| from the propagated coefficient bound.

    ``radius`` defaults to tau_*; any validated lower estimate of the radius may
    be passed instead.
    """
    tau = s.tau_star if radius is None else radius
    if not 0.0 < t < tau:
        raise DomainError(f"t={t} must lie in (0, {tau})")
    if n0 < 1:
        raise DomainError("n0 must be >= 1")
    alpha = s.alpha
    if radius is None:
        cst = s.c_star
    else:
        cst = abs(complex(s.equation.nu)) * radius ** alpha / float(gamma(alpha + 1.0))
    log_ratio = math.log(tau / t)
    corr = 1.0 + max(alpha - 1.0, 0.0) / (alpha * n0 * log_ratio)
    return cst * n0 ** (alpha - 1.0) / (alpha * log_ratio) * (t / tau) ** (n0 * alpha) * corr


def eval_triplet_series(s: SeriesSolution, t: float, r0: int | None = None) -> Triplet:
    """Partial sums of psi, I_1 psi and I_{1-alpha} psi at t, truncated at r0."""
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    r0 = s.r_max if r0 is None else r0
    if r0 > s.r_max:
        warnings.warn(f"r0={r0} exceeds r_max={s.r_max}; truncating at r_max", RuntimeWarning, stacklevel=2)
        r0 = s.r_max
    if t == 0 or s.is_zero:
        return Triplet(0j, 0j, 0j)
    psi, i1, i1ma = eval_scaled(s.scaled_coeffs[None, :], np.array([s.scale]), s.alpha, np.array([t]), r0)
    return Triplet(complex(psi[0]), complex(i1[0]), complex(i1ma[0]))


def r0_for_accuracy(eps0: float, theta: float, alpha: float) -> int:
    """Truncation order for accuracy eps0 when evaluating at theta times the radius."""
    if not 0.0 < eps0 < 1.0:
        raise DomainError(f"eps0 must lie in (0, 1), got {eps0}")
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    r0 = math.ceil(math.log(eps0 * (1.0 - theta)) / (alpha * math.log(theta)) - 1.0)
    return max(r0, 1)


def achieved_accuracy(r0: int, theta: float, alpha: float) -> float:
    """Inverse of r0_for_accuracy: accuracy delivered by truncating at r0."""
    return theta ** (alpha * (r0 + 1)) / (1.0 - theta)


def mu_flip_coefficients(c: RiccatiCoeffs, r_max: int = 200) -> tuple[np.ndarray, np.ndarray, int]:
    """Coefficients for (lambda, mu, nu) and (lambda, -mu, nu) plus the observed sign parity.

    Returns (a, a_flipped, p) where a_k = (-1)^(k+p) a_flipped_k; the
    recursion gives p = 1, i.e. the relative sign is (-1)^(k-1).
    """
    if not c.is_real:
        raise DomainError("mu flip requires real coefficients")
    lam, mu, nu = (complex(v).real for v in (c.lam, c.mu, c.nu))
    if not (lam > 0 and nu > 0):
        raise DomainError("mu flip requires lambda, nu > 0")
    s1 = build_coefficients(c, r_max)
    s2 = build_coefficients(RiccatiCoeffs(lam, -mu, nu, c.alpha), r_max)
    if s1.scale != s2.scale:
        raise AssertionError("tau_* must be invariant under mu -> -mu")
    a, b = s1.scaled_coeffs, s2.scaled_coeffs
    k = np.arange(1, r_max + 1)
    parity = 1
    if mu != 0:
        mask = np.abs(b) > 0
        alt = (-1.0) ** (k - 1)
        parity = 1 if np.allclose(a[mask], (alt * b)[mask], rtol=1e-10, atol=0) else 0
    return s1.coeffs, s2.coeffs, parity


def odd_subsequence_coeffs(c: RiccatiCoeffs, k_max: int) -> np.ndarray:
    """b_k = a_{2k-1} for mu = 0 via the halved recursion."""
    if complex(c.mu) != 0:
        raise DomainError("odd subsequence recursion requires mu = 0")
    alpha = c.alpha
    lam, nu = complex(c.lam), complex(c.nu)
    b = np.zeros(k_max, dtype=complex)
    b[0] = nu / complex(gamma(alpha + 1.0))
    for k in range(1, k_max):
        # b_{k+1} = lambda Gamma(2 alpha k + 1)/Gamma((2k+1) alpha + 1) b^{*2}_{k+1}
        sq = convolution_square(b[: k + 1], k + 1)
        b[k] = lam * float(gamma_ratio(2.0 * alpha * k + 1.0, (2 * k + 1) * alpha + 1.0)) * sq
    return b


@dataclass(frozen=True)
class SeriesBatch:
    """Scaled series data for many equations sharing one alpha (e.g. a frequency grid)."""
    lam: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    alpha: float
    scaled_coeffs: np.ndarray = field(repr=False)
    scale: np.ndarray
    radius_conservative: np.ndarray

    @property
    def size(self) -> int:
        return self.scaled_coeffs.shape[0]

    @property
    def r_max(self) -> int:
        return self.scaled_coeffs.shape[1]


def build_series_batch(lam, mu, nu, alpha: float, r_max: int = 250) -> SeriesBatch:
    """Vectorized build_coefficients over a batch of (lambda, mu, nu)."""
    lam, mu, nu = np.broadcast_arrays(np.atleast_1d(np.asarray(lam, dtype=complex)),
                                      np.atleast_1d(np.asarray(mu, dtype=complex)),
                                      np.atleast_1d(np.asarray(nu, dtype=complex)))
    coeffs, scale = build_scaled_batch(lam, mu, nu, alpha, r_max)
    r_hat = np.full(lam.size, np.inf)
    facs = _primed_factors(alpha, r_max)
    for i in range(lam.size):
        nz = np.flatnonzero(coeffs[i])
        if nz.size:
            m = int(nz[-1]) + 1
            r_hat[i] = _radius_from_scaled(coeffs[i, m - 1] * facs[m - 1], m, alpha, scale[i])
    return SeriesBatch(lam.copy(), mu.copy(), nu.copy(), alpha, coeffs, scale, r_hat)


def batch_from_solution(s: SeriesSolution) -> SeriesBatch:
    c = s.equation
    return SeriesBatch(np.array([complex(c.lam)]), np.array([complex(c.mu)]), np.array([complex(c.nu)]),
                       c.alpha, s.scaled_coeffs[None, :], np.array([s.scale]),
                       np.array([s.radius_conservative]))
