"""Hybrid series / Euler-with-memory scheme with Richardson-Romberg extrapolation.

On the grid t_k = kT/n the solution is taken from the power series up to
t_{k0} ~ theta R-hat and continued by the explicit product-rectangle scheme

    psi_k = h^alpha / Gamma(alpha+1) (nu k^alpha + sum_{l<k} c_{k-l-1} f(psi_l)),
    c_0 = 1, c_l = (l+1)^alpha - l^alpha, f(x) = x (lambda x + mu).

I_1 psi is completed by the trapezoid rule and I_{1-alpha} psi by the
rectangle rule with weights c^(1-alpha).  The plain scheme has an error
c_1/n + o(1/n); RR2 and RR3 cancel the leading terms.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BlowUpError, DomainError
from .series import (RiccatiCoeffs, SeriesBatch, SeriesSolution, Triplet, batch_from_solution,
                     eval_scaled, r0_for_accuracy)
from .special import gamma

OVERFLOW_GUARD = 1e12
METHODS = ("plain", "rr2", "rr3")


@dataclass(frozen=True)
class HybridConfig:
    n: int = 128
    eps0: float = 0.005
    theta_override: float | None = None
    r_max: int = 250
    switch_factor: float = 1.0
    guard: float = OVERFLOW_GUARD

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.eps0 < 1.0:
            raise DomainError(f"eps0 must lie in (0, 1), got {self.eps0}")
        if self.theta_override is not None and not 0.0 < self.theta_override < 1.0:
            raise DomainError(f"theta_override must lie in (0, 1), got {self.theta_override}")
        if not 0.0 < self.switch_factor <= 1.0:
            raise DomainError(f"switch_factor must lie in (0, 1], got {self.switch_factor}")

    def theta(self, n: int | None = None) -> float:
        if self.theta_override is not None:
            return self.theta_override
        return theta_of_n(self.n if n is None else n)


def theta_of_n(n: int) -> float:
    """Calibrated switch fraction; n is clamped to [32, 4096]."""
    n = min(max(n, 32), 4096)
    return min(0.65 + 0.3 * ((n - 32) / 4064.0) ** 0.25, 0.925)


def euler_weights(alpha: float, count: int) -> np.ndarray:
    """c_0 = 1, c_l = (l+1)^alpha - l^alpha for l = 0..count-1."""
    if count < 1:
        raise DomainError("count must be >= 1")
    l = np.arange(count, dtype=float)
    return (l + 1.0) ** alpha - l ** alpha


def _raise_blowup(rows, k, h, batch_index_base=0):
    i = int(rows[0])
    raise BlowUpError(f"|psi| exceeded the overflow guard at t = {k * h:.6g} (equation {i + batch_index_base})",
                      time=k * h, index=i)


def hybrid_grid_batch(b: SeriesBatch, T: float, n: int, cfg: HybridConfig):
    """Plain hybrid scheme for every equation in a batch; returns (psi, i1, i1ma) arrays."""
    alpha = b.alpha
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"the hybrid scheme needs alpha in (0, 1], got {alpha}")
    if T <= 0:
        raise DomainError(f"T must be positive, got {T}")
    theta = cfg.theta(n)
    r0 = min(r0_for_accuracy(cfg.eps0, theta, alpha), b.r_max)
    h = T / n
    size = b.size
    with np.errstate(over="ignore", invalid="ignore"):
        reach = cfg.switch_factor * theta * b.radius_conservative
        k0f = np.floor(n * reach / T)
    k0 = np.where(np.isfinite(k0f), np.minimum(k0f, n), n).astype(int)
    short = reach > T
    psi_out = np.zeros(size, dtype=complex)
    i1_out = np.zeros(size, dtype=complex)
    i1ma_out = np.zeros(size, dtype=complex)

    if np.any(short):
        p, a, c = eval_scaled(b.scaled_coeffs[short], b.scale[short], alpha, np.full(short.sum(), T), r0)
        psi_out[short], i1_out[short], i1ma_out[short] = p, a, c
    rows = np.flatnonzero(~short)
    if rows.size == 0:
        return psi_out, i1_out, i1ma_out

    lam, mu, nu = b.lam[rows], b.mu[rows], b.nu[rows]
    k0r = np.minimum(k0[rows], n - 1)
    m = rows.size
    grid = np.zeros((m, n + 1), dtype=complex)
    kmax = int(k0r.max())
    i1_head = np.zeros(m, dtype=complex)
    if kmax >= 1:
        tk = h * np.arange(1, kmax + 1, dtype=float)
        p, a, _ = eval_scaled(b.scaled_coeffs[rows], b.scale[rows], alpha,
                              np.broadcast_to(tk, (m, kmax)), r0)
        cols = np.arange(1, kmax + 1)
        use = cols[None, :] <= k0r[:, None]
        grid[:, 1:kmax + 1] = np.where(use, p, 0.0)
        sel = k0r >= 1
        i1_head[sel] = a[sel, k0r[sel] - 1]

    w = euler_weights(alpha, n)
    pref = h ** alpha / float(gamma(alpha + 1.0))
    f = np.zeros((m, n + 1), dtype=complex)
    kpow = np.arange(n + 1, dtype=float) ** alpha
    for k in range(1, n + 1):
        if k >= 2:
            f[:, k - 1] = grid[:, k - 1] * (lam * grid[:, k - 1] + mu)
            memory = f[:, 1:k] @ w[k - 2::-1]
        else:
            memory = 0.0
        step = pref * (nu * kpow[k] + memory)
        active = k > k0r
        grid[:, k] = np.where(active, step, grid[:, k])
        bad = np.abs(grid[:, k]) > cfg.guard
        if np.any(bad):
            _raise_blowup(rows[bad], k, h)

    idx = np.arange(m)
    psi_k0 = grid[idx, k0r]
    csum = np.cumsum(grid[:, :n], axis=1)
    tail_sum = csum[:, n - 1] - np.where(k0r >= 1, csum[idx, k0r - 1], 0.0)
    i1 = i1_head + h * tail_sum + 0.5 * h * (grid[:, n] - psi_k0)
    if alpha == 1.0:
        # I_0 is the identity
        i1ma = grid[:, n]
    else:
        w1 = euler_weights(1.0 - alpha, n)
        i1ma = h ** (1.0 - alpha) / float(gamma(2.0 - alpha)) * (grid[:, 1:n] @ w1[n - 2::-1]) if n >= 2 \
            else np.zeros(m, dtype=complex)
    psi_out[rows], i1_out[rows], i1ma_out[rows] = grid[:, n], i1, i1ma
    return psi_out, i1_out, i1ma_out


def _check_method(method: str, n: int):
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")
    if method == "rr2" and n % 2:
        raise DomainError(f"RR2 needs an even n, got {n}")
    if method == "rr3" and n % 4:
        raise DomainError(f"RR3 needs n divisible by 4, got {n}")


def solve_batch(b: SeriesBatch, T: float, cfg: HybridConfig, method: str = "rr3"):
    """Plain, RR2 or RR3 hybrid triplets for a batch; arrays of shape (batch,)."""
    n = cfg.n
    _check_method(method, n)
    top = np.array(hybrid_grid_batch(b, T, n, cfg))
    if method == "plain":
        return tuple(top)
    half = np.array(hybrid_grid_batch(b, T, n // 2, cfg))
    if method == "rr2":
        return tuple(2.0 * top - half)
    quarter = np.array(hybrid_grid_batch(b, T, n // 4, cfg))
    return tuple(quarter / 3.0 - 2.0 * half + 8.0 / 3.0 * top)


def _single(s: SeriesSolution, T: float, cfg: HybridConfig, method: str) -> Triplet:
    if s.is_zero:
        return Triplet(0j, 0j, 0j)
    psi, i1, i1ma = solve_batch(batch_from_solution(s), T, cfg, method)
    return Triplet(complex(psi[0]), complex(i1[0]), complex(i1ma[0]))


def hybrid_solve(s: SeriesSolution, T: float, cfg: HybridConfig | None = None) -> Triplet:
    """Plain hybrid triplet at T (series up to k0, Euler with memory afterwards)."""
    return _single(s, T, cfg or HybridConfig(), "plain")


def rr2(s: SeriesSolution, T: float, cfg: HybridConfig | None = None) -> Triplet:
    """Two-level extrapolation 2 Psi^n - Psi^(n/2)."""
    return _single(s, T, cfg or HybridConfig(), "rr2")


def rr3(s: SeriesSolution, T: float, cfg: HybridConfig | None = None) -> Triplet:
    """Three-level extrapolation Psi^(n/4)/3 - 2 Psi^(n/2) + 8/3 Psi^n."""
    return _single(s, T, cfg or HybridConfig(), "rr3")


def solve_triplet(s: SeriesSolution, T: float, cfg: HybridConfig | None = None,
                  method: str = "rr3") -> Triplet:
    return _single(s, T, cfg or HybridConfig(), method)


def error_expansion_diag(s: SeriesSolution, T: float, n: int, cfg: HybridConfig | None = None) -> float:
    """c1-bar = 2n (psi^n(T) - psi^(2n)(T)), estimating the first-order error constant."""
    if n < 4:
        raise DomainError("n must be >= 4")
    base = cfg or HybridConfig()
    b = batch_from_solution(s)
    p_n = hybrid_grid_batch(b, T, n, replace(base, n=n))[0][0]
    p_2n = hybrid_grid_batch(b, T, 2 * n, replace(base, n=2 * n))[0][0]
    value = 2.0 * n * (p_n - p_2n)
    return float(value.real) if s.equation.is_real else complex(value)


def lambda_rescale(c: RiccatiCoeffs) -> tuple[RiccatiCoeffs, complex]:
    """(1, mu, lambda nu) together with the factor 1/lambda mapping its solution back.

    phi = lambda psi solves D^alpha phi = phi^2 + mu phi + lambda nu.
    """
    lam = complex(c.lam)
    if lam == 0:
        raise DomainError("lambda rescaling needs lambda != 0")
    if c.is_real:
        return RiccatiCoeffs(1.0, c.mu, c.lam * c.nu, c.alpha), 1.0 / c.lam
    return RiccatiCoeffs(1.0, c.mu, lam * complex(c.nu), c.alpha), 1.0 / lam
