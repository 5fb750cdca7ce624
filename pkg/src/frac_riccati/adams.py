"""Fractional Adams predictor-corrector (PECE) baseline.

Solves psi = I_alpha(lambda psi^2 + mu psi + nu) on a uniform grid with the
product-rectangle predictor and the product-trapezoid corrector, one
corrector pass per step.
"""
from __future__ import annotations

import numpy as np

from .errors import BlowUpError, DomainError
from .hybrid import OVERFLOW_GUARD, euler_weights
from .series import RiccatiCoeffs, Triplet
from .special import gamma


def _corrector_weights(alpha: float, n: int) -> np.ndarray:
    # d_j = (j+2)^(a+1) + j^(a+1) - 2 (j+1)^(a+1), j = k - l for interior nodes
    j = np.arange(n + 1, dtype=float)
    a1 = alpha + 1.0
    return (j + 2.0) ** a1 + j ** a1 - 2.0 * (j + 1.0) ** a1


def adams_batch(lam, mu, nu, alpha: float, T: float, n: int, guard: float = OVERFLOW_GUARD):
    """PECE triplets for a batch of equations; returns (psi, i1, i1ma) arrays."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"Adams baseline needs alpha in (0, 1], got {alpha}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if T <= 0:
        raise DomainError(f"T must be positive, got {T}")
    lam, mu, nu = np.broadcast_arrays(np.atleast_1d(np.asarray(lam, dtype=complex)),
                                      np.atleast_1d(np.asarray(mu, dtype=complex)),
                                      np.atleast_1d(np.asarray(nu, dtype=complex)))
    m = lam.size
    h = T / n
    rhs = lambda y: lam * y * y + mu * y + nu  # noqa: E731
    y = np.zeros((m, n + 1), dtype=complex)
    f = np.zeros((m, n + 1), dtype=complex)
    f[:, 0] = nu
    b = euler_weights(alpha, n)
    d = _corrector_weights(alpha, n)
    cp = h ** alpha / float(gamma(alpha + 1.0))
    cc = h ** alpha / float(gamma(alpha + 2.0))
    for k in range(n):
        # predictor for y_{k+1}: sum_{j=0}^k b_{k-j} f_j
        pred = cp * (f[:, : k + 1] @ b[k::-1])
        a0 = k ** (alpha + 1.0) - (k - alpha) * (k + 1.0) ** alpha
        corr = a0 * f[:, 0]
        if k >= 1:
            corr = corr + f[:, 1: k + 1] @ d[k - 1::-1]
        y[:, k + 1] = cc * (rhs(pred) + corr)
        f[:, k + 1] = rhs(y[:, k + 1])
        bad = ~np.isfinite(y[:, k + 1]) | (np.abs(y[:, k + 1]) > guard)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise BlowUpError(f"|psi| exceeded the overflow guard at t = {(k + 1) * h:.6g} (equation {i})",
                              time=(k + 1) * h, index=i)
    i1 = h * (y[:, 1:n].sum(axis=1) + 0.5 * y[:, n])
    if alpha == 1.0:
        i1ma = y[:, n].copy()
    elif n >= 2:
        w1 = euler_weights(1.0 - alpha, n)
        i1ma = h ** (1.0 - alpha) / float(gamma(2.0 - alpha)) * (y[:, 1:n] @ w1[n - 2::-1])
    else:
        i1ma = np.zeros(m, dtype=complex)
    return y[:, n], i1, i1ma


def adams_solve(c: RiccatiCoeffs, T: float, n: int) -> Triplet:
    """Triplet at T from the fractional Adams PECE scheme with n steps."""
    if complex(c.nu) == 0:
        return Triplet(0j, 0j, 0j)
    psi, i1, i1ma = adams_batch(c.lam, c.mu, c.nu, c.alpha, T, n)
    return Triplet(complex(psi[0]), complex(i1[0]), complex(i1ma[0]))
