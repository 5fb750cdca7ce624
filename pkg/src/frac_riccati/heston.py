"""Rough Heston characteristic functions through the fractional Riccati solvers.

With X_T = log(S_T / S_0) and zero rates,

    E exp(u1 X_T) = exp(m eta I_1 psi(T) + V_0 I_{1-alpha} psi(T)),

where psi solves the Riccati equation with lambda = (eta zeta)^2 / 2,
mu = eta (u1 rho zeta - 1) and nu = (u1^2 - u1) / 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adams import adams_batch
from .errors import DomainError
from .hybrid import HybridConfig, solve_batch
from .nonhomog import build_double_coefficients, eval_double_triplet
from .series import RiccatiCoeffs, SeriesBatch, build_series_batch, eval_scaled

SOLVERS = ("series", "hybrid", "adams")


@dataclass(frozen=True)
class HestonParams:
    alpha: float
    eta: float
    m: float
    zeta: float
    rho: float
    v0: float
    s0: float = 100.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        for name in ("eta", "m", "zeta", "s0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")
        if self.v0 < 0:
            raise DomainError("v0 must be non-negative")

    @property
    def hurst(self) -> float:
        return self.alpha - 0.5

    @classmethod
    def from_hurst(cls, hurst: float, **kw) -> "HestonParams":
        return cls(alpha=hurst + 0.5, **kw)

    def with_alpha(self, alpha: float) -> "HestonParams":
        return HestonParams(alpha, self.eta, self.m, self.zeta, self.rho, self.v0, self.s0)


def reference_params(alpha: float = 0.62) -> HestonParams:
    """Calibrated rough Heston set used throughout the benchmarks (H = 0.12)."""
    return HestonParams(alpha=alpha, eta=0.1, m=0.3156, zeta=0.331, rho=-0.681, v0=0.0392, s0=100.0)


def riccati_from_heston(p: HestonParams, u1: complex) -> RiccatiCoeffs:
    lam, mu, nu = riccati_arrays(p, u1)
    return RiccatiCoeffs(complex(lam[0]), complex(mu[0]), complex(nu[0]), p.alpha)


def riccati_arrays(p: HestonParams, u1):
    u1 = np.atleast_1d(np.asarray(u1, dtype=complex))
    lam = np.full(u1.shape, 0.5 * (p.eta * p.zeta) ** 2, dtype=complex)
    mu = p.eta * (u1 * p.rho * p.zeta - 1.0)
    nu = 0.5 * (u1 * u1 - u1)
    return lam, mu, nu


def heston_series_batch(p: HestonParams, u1, r_max: int = 250) -> SeriesBatch:
    lam, mu, nu = riccati_arrays(p, u1)
    return build_series_batch(lam, mu, nu, p.alpha, r_max)


def triplet_batch(p: HestonParams, u1, T: float, solver: str = "hybrid", cfg: HybridConfig | None = None,
                  method: str = "rr3", adams_steps: int = 128, batch: SeriesBatch | None = None):
    """(psi, I_1 psi, I_{1-alpha} psi)(T) for an array of frequencies u1."""
    if solver not in SOLVERS:
        raise DomainError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
    cfg = cfg or HybridConfig()
    if solver == "adams":
        lam, mu, nu = riccati_arrays(p, u1)
        return adams_batch(lam, mu, nu, p.alpha, T, adams_steps)
    b = batch if batch is not None else heston_series_batch(p, u1, cfg.r_max)
    if solver == "series":
        outside = T >= b.radius_conservative
        if np.any(outside):
            i = int(np.flatnonzero(outside)[0])
            raise DomainError(f"T={T} lies outside the series radius {b.radius_conservative[i]:.6g} "
                              f"for u1={np.atleast_1d(u1)[i]}")
        return eval_scaled(b.scaled_coeffs, b.scale, p.alpha, np.full(b.size, float(T)), b.r_max)
    return solve_batch(b, T, cfg, method)


def cf_from_triplet(p: HestonParams, i1, i1ma):
    return np.exp(p.m * p.eta * np.asarray(i1) + p.v0 * np.asarray(i1ma))


def log_price_cf_batch(p: HestonParams, u1, T: float, solver: str = "hybrid", **kw) -> np.ndarray:
    """E exp(u1 X_T) for an array of u1."""
    u1 = np.atleast_1d(np.asarray(u1, dtype=complex))
    out = np.ones(u1.shape, dtype=complex)
    live = 0.5 * (u1 * u1 - u1) != 0
    if np.any(live):
        if "batch" in kw and kw["batch"] is not None:
            raise DomainError("pass a prebuilt batch only through triplet_batch")
        _, i1, i1ma = triplet_batch(p, u1[live], T, solver, **kw)
        out[live] = cf_from_triplet(p, i1, i1ma)
    return out


def log_price_cf(p: HestonParams, u1: complex, T: float, solver: str = "hybrid", **kw) -> complex:
    """E exp(u1 X_T), X_T = log(S_T / S_0), using the chosen Riccati solver."""
    if T <= 0:
        raise DomainError("T must be positive")
    return complex(log_price_cf_batch(p, [u1], T, solver, **kw)[0])


def joint_transform(p: HestonParams, u1: complex, u2: complex, T: float,
                    L_max: int = 20, k_cap: int = 80, tol: float = 1e-12, **kw) -> complex:
    """E exp(u1 X_T + u2 V_T) via the doubly-indexed series with I_{1-alpha} psi(0) = u2."""
    u1, u2 = complex(u1), complex(u2)
    if not 0.0 <= u1.real <= 1.0 or u2.real > 0:
        raise DomainError("joint transform requires Re(u1) in [0, 1] and Re(u2) <= 0")
    if T <= 0:
        raise DomainError("T must be positive")
    if u2 == 0:
        return log_price_cf(p, u1, T, **kw)
    if not 0.5 < p.alpha < 1.0:
        raise DomainError("the doubly-indexed solver needs alpha in (1/2, 1)")
    c = riccati_from_heston(p, u1)
    ds = build_double_coefficients(c, u2, 0j, L_max=L_max, k_cap=k_cap)
    trip, _ = eval_double_triplet(ds, T, tol)
    return complex(np.exp(p.m * p.eta * trip.i1_psi + p.v0 * trip.i1ma_psi))
