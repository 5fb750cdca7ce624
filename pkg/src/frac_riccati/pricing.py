"""European calls by Carr-Madan inversion of the rough Heston characteristic function.

The damped call transform is integrated on the uniform frequency grid
v = 0, dv, ..., v_max with the composite trapezoid rule.  The log-spot
characteristic function phi(w) = E exp(i w log S_T) is needed at
w = v - (alpha_cm + 1) i, which corresponds to the Riccati frequency
u1 = i w = (alpha_cm + 1) + i v.  One Riccati solve per frequency and
maturity is shared by all strikes.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .errors import BlowUpError, DomainError
from .heston import HestonParams, cf_from_triplet, heston_series_batch, triplet_batch
from .hybrid import HybridConfig

DAY = 1.0 / 252.0
BOOK_MATURITIES = (1 * DAY, 5 * DAY, 21 * DAY, 126 * DAY, 252 * DAY, 504 * DAY)
BOOK_STRIKES = (80.0, 85.0, 90.0, 95.0, 100.0, 105.0, 110.0, 115.0, 120.0)
ADAMS_STEPS = tuple(range(10, 151, 10))
IV_TOL = 1e-2


@dataclass(frozen=True)
class OptionSpec:
    strike_pct: float
    maturity: float

    def __post_init__(self):
        if not self.strike_pct > 0:
            raise DomainError("strike_pct must be positive")
        if not self.maturity > 0:
            raise DomainError("maturity must be positive")


@dataclass(frozen=True)
class PriceResult:
    spec: OptionSpec
    price: float
    implied_vol: float | None
    cpu_millis: float
    solver: str
    steps: int
    flags: str = ""


@dataclass(frozen=True)
class FourierGrid:
    v_max: float = 250.0
    dv: float = 0.1

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        count = int(round(self.v_max / self.dv))
        v = self.dv * np.arange(count + 1, dtype=float)
        w = np.full(v.size, self.dv)
        w[0] = w[-1] = 0.5 * self.dv
        return v, w


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("FRAC_RICCATI_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def bs_call(s0: float, strike: float, maturity: float, sigma: float) -> float:
    """Black-Scholes call with zero rates."""
    if sigma <= 0 or maturity <= 0:
        return max(s0 - strike, 0.0)
    sd = sigma * math.sqrt(maturity)
    d1 = (math.log(s0 / strike) + 0.5 * sd * sd) / sd
    return s0 * norm.cdf(d1) - strike * norm.cdf(d1 - sd)


def implied_vol(price: float, s0: float, strike: float, maturity: float, tol: float = 1e-10) -> float | None:
    """Zero-rate Black-Scholes implied volatility; None outside the no-arbitrage band."""
    lower = max(s0 - strike, 0.0)
    if not (lower < price < s0) or maturity <= 0:
        return None
    f = lambda s: bs_call(s0, strike, maturity, s) - price  # noqa: E731
    lo, hi = 1e-8, 1.0
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e3:
            return None
    if f(lo) > 0:
        return None
    try:
        return float(brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))
    except ValueError:
        return None


def _damped_cf(p: HestonParams, T: float, v: np.ndarray, alpha_cm: float, solver: str,
               cfg: HybridConfig, method: str, adams_steps: int, batch=None) -> np.ndarray:
    u1 = (alpha_cm + 1.0) + 1j * v
    try:
        _, i1, i1ma = triplet_batch(p, u1, T, solver, cfg=cfg, method=method,
                                    adams_steps=adams_steps, batch=batch)
    except BlowUpError as exc:
        freq = v[exc.index] if exc.index is not None else None
        raise BlowUpError(f"characteristic function blew up at v={freq} (T={T})",
                          time=exc.time, frequency=None if freq is None else complex(u1[exc.index]),
                          index=exc.index) from exc
    # phi(v - (alpha_cm+1) i) = S0^{u1} E exp(u1 X_T)
    phi = np.exp(u1 * math.log(p.s0)) * cf_from_triplet(p, i1, i1ma)
    denom = alpha_cm ** 2 + alpha_cm - v ** 2 + 1j * (2.0 * alpha_cm + 1.0) * v
    return phi / denom


def _prices_from_transform(transform, v, w, strikes, alpha_cm):
    k = np.log(np.asarray(strikes, dtype=float))
    phase = np.exp(-1j * np.outer(k, v))
    integral = (phase * transform[None, :]).real @ w
    return np.exp(-alpha_cm * k) / math.pi * integral


def price_maturity(p: HestonParams, T: float, strikes, solver: str = "hybrid", alpha_cm: float = 1.1,
                   grid: FourierGrid = FourierGrid(), cfg: HybridConfig | None = None, method: str = "rr3",
                   adams_steps: int = 128, batch=None) -> np.ndarray:
    """Call prices for several strikes at one maturity."""
    if alpha_cm <= 0:
        raise DomainError("alpha_cm must be positive")
    cfg = cfg or HybridConfig()
    v, w = grid.nodes()
    transform = _damped_cf(p, T, v, alpha_cm, solver, cfg, method, adams_steps, batch)
    return _prices_from_transform(transform, v, w, strikes, alpha_cm)


def carr_madan_price(p: HestonParams, specs, solver: str = "hybrid", alpha_cm: float = 1.1,
                     grid: FourierGrid = FourierGrid(), cfg: HybridConfig | None = None,
                     method: str = "rr3", adams_steps: int = 128, threads: int | None = None) -> list[PriceResult]:
    """Prices and implied vols for a list of OptionSpec (strikes in percent of spot)."""
    specs = list(specs)
    cfg = cfg or HybridConfig()
    v, _ = grid.nodes()
    batch = heston_series_batch(p, (alpha_cm + 1.0) + 1j * v, cfg.r_max) if solver != "adams" else None
    by_maturity: dict[float, list[int]] = {}
    for i, s in enumerate(specs):
        by_maturity.setdefault(s.maturity, []).append(i)

    def run(T):
        idx = by_maturity[T]
        strikes = [specs[i].strike_pct * p.s0 / 100.0 for i in idx]
        t0 = time.process_time()
        prices = price_maturity(p, T, strikes, solver, alpha_cm, grid, cfg, method, adams_steps, batch)
        ms = 1e3 * (time.process_time() - t0)
        return idx, strikes, prices, ms

    steps = cfg.n if solver == "hybrid" else (adams_steps if solver == "adams" else cfg.r_max)
    results: list[PriceResult | None] = [None] * len(specs)
    with ThreadPoolExecutor(max_workers=worker_count(threads)) as pool:
        for idx, strikes, prices, ms in pool.map(run, list(by_maturity)):
            for i, k, c in zip(idx, strikes, prices):
                spec = specs[i]
                iv = implied_vol(float(c), p.s0, k, spec.maturity)
                results[i] = PriceResult(spec, float(c), iv, ms / len(idx), solver, steps)
    return results  # type: ignore[return-value]


def atm_skew(p: HestonParams, maturities, dk: float = 1e-3, **kw) -> list[tuple[float, float]]:
    """d sigma_imp / d log-strike at the money by central differences."""
    if dk <= 0:
        raise DomainError("dk must be positive")
    specs = []
    for T in maturities:
        specs += [OptionSpec(100.0 * math.exp(-dk), T), OptionSpec(100.0 * math.exp(dk), T)]
    res = carr_madan_price(p, specs, **kw)
    out = []
    for j, T in enumerate(maturities):
        lo, hi = res[2 * j].implied_vol, res[2 * j + 1].implied_vol
        if lo is None or hi is None:
            raise DomainError(f"implied vol unavailable for the skew at T={T}")
        out.append((T, (hi - lo) / (2.0 * dk)))
    return out


@dataclass
class BookCell:
    spec: OptionSpec
    hybrid: PriceResult
    adams: PriceResult | None = None
    adams_flags: str = ""


@dataclass
class BookTable:
    cells: list[BookCell] = field(default_factory=list)

    def rows(self):
        """Flat rows (maturity_days, strike_pct, method, steps, price, implied_vol, cpu_ms, flags)."""
        for c in self.cells:
            days = int(round(c.spec.maturity * 252))
            for r, flags in ((c.hybrid, c.hybrid.flags), (c.adams, c.adams_flags)):
                if r is None:
                    continue
                yield (days, c.spec.strike_pct, r.solver, r.steps, r.price, r.implied_vol, r.cpu_millis, flags)


def default_book() -> list[OptionSpec]:
    return [OptionSpec(k, T) for k in BOOK_STRIKES for T in BOOK_MATURITIES]


def price_book(p: HestonParams, book=None, solvers=("hybrid", "adams"), adams_step_search: bool = True,
               alpha_cm: float = 1.1, grid: FourierGrid = FourierGrid(), cfg: HybridConfig | None = None,
               steps_grid=ADAMS_STEPS, threads: int | None = None) -> BookTable:
    """Hybrid (n = 128, RR3) prices with an optional Adams column and step search.

    For Adams the smallest step count with |iv_hybrid - iv_adams| <= 1e-2 is
    kept; '*' marks cells where no step count reaches the tolerance and '**'
    marks Adams prices below intrinsic value.
    """
    book = list(book) if book is not None else default_book()
    cfg = cfg or HybridConfig(n=128)
    hyb = carr_madan_price(p, book, "hybrid", alpha_cm, grid, cfg, threads=threads)
    table = BookTable([BookCell(s, r) for s, r in zip(book, hyb)])
    if "adams" not in solvers:
        return table
    candidates = list(steps_grid) if adams_step_search else [max(steps_grid)]
    by_maturity: dict[float, list[int]] = {}
    for i, spec in enumerate(book):
        by_maturity.setdefault(spec.maturity, []).append(i)

    def search(T):
        idx = by_maturity[T]
        found: dict[int, PriceResult] = {}
        last: dict[int, PriceResult] = {}
        for n_steps in candidates:
            pending = [i for i in idx if i not in found]
            if not pending:
                break
            try:
                res = carr_madan_price(p, [book[i] for i in pending], "adams", alpha_cm, grid, cfg,
                                       adams_steps=n_steps, threads=1)
            except BlowUpError:
                continue
            for i, r in zip(pending, res):
                last[i] = r
                h = table.cells[i].hybrid
                if h.implied_vol is not None and r.implied_vol is not None:
                    ok = abs(h.implied_vol - r.implied_vol) <= IV_TOL
                else:
                    ok = abs(h.price - r.price) <= IV_TOL * 1e-2 * p.s0
                if ok:
                    found[i] = r
        return idx, found, last

    with ThreadPoolExecutor(max_workers=worker_count(threads)) as pool:
        for idx, found, last in pool.map(search, list(by_maturity)):
            for i in idx:
                cell = table.cells[i]
                r = found.get(i, last.get(i))
                flags = "" if i in found else "*"
                intrinsic = max(p.s0 - cell.spec.strike_pct * p.s0 / 100.0, 0.0)
                if r is not None and r.price < intrinsic:
                    flags += "**"
                cell.adams, cell.adams_flags = r, flags
    return table
