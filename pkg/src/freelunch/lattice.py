"""Discretised market: grid, noise/drift/price paths and the one-period return split.

Grid times are ``s_i = t0 + (i - floor(n t0)) / n``; the buyer enters at step
``j0 = floor(n t0)``. Buying at step ``j`` and selling at ``j + 1`` earns

    x_j + y_j + z_{j+1} - lambda

where ``x_j`` collects drift and the increment of the deterministic past
``J``, ``y_j`` is linear in the history ``xi_{j0+1..j}`` and ``z_{j+1}`` is the
fresh innovation scaled by ``K(s_{j+1}, s_j) / sqrt(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.signal import fftconvolve

from .errors import ConfigError, DomainError, GDomainError, LengthMismatch, SingularityError
from .innovation import InnovationLaw, LawProvider, law_at, sample_array
from .kernel import Kernel

__all__ = [
    "GridSpec",
    "PriceMap",
    "IDENTITY",
    "EXPONENTIAL",
    "MarketSpec",
    "PathDecomposition",
    "SimulatedPath",
    "snap_floor",
    "grid_times",
    "x_term",
    "decompose",
    "noise_coefficients",
    "simulate_path",
    "simulate_noise_path",
    "price_path",
    "single_period_return",
    "buy_level",
]


def snap_floor(x: float, tol: float = 1e-9) -> int:
    """floor(x), except values within ``tol`` below an integer snap up to it.

    ``0.3 * 10`` and similar products must not lose a grid step to rounding.
    """
    r = round(x)
    if abs(x - r) <= tol * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)


@dataclass(frozen=True)
class GridSpec:
    n: int
    t0: float
    T: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.t0 < 0:
            raise DomainError("t0 must be nonnegative")
        if self.T is not None and not self.T > self.t0:
            raise DomainError("horizon T must exceed t0")

    @property
    def j0(self) -> int:
        return snap_floor(self.n * self.t0)

    @property
    def sqrt_n(self) -> float:
        return math.sqrt(self.n)

    def time(self, i):
        """Grid time s_i; vectorised over arrays of step indices."""
        if np.ndim(i):
            return self.t0 + (np.asarray(i) - self.j0) / self.n
        return self.t0 + (int(i) - self.j0) / self.n

    @property
    def j_last(self) -> int:
        """Last step whose time does not exceed T."""
        if self.T is None:
            raise DomainError("grid has no horizon T")
        return self.j0 + snap_floor(self.n * (self.T - self.t0))

    def steps(self) -> int:
        return self.j_last - self.j0


def grid_times(grid: GridSpec) -> np.ndarray:
    return grid.time(np.arange(grid.j0, grid.j_last + 1))


@dataclass(frozen=True)
class PriceMap:
    """Strictly increasing map G from log-level A + Z to price."""

    kind: str = "identity"
    x: tuple = ()
    y: tuple = ()

    def __post_init__(self):
        if self.kind not in ("identity", "exponential", "custom"):
            raise ConfigError(f"unknown price map {self.kind!r}")
        if self.kind == "custom":
            xs, ys = np.asarray(self.x, float), np.asarray(self.y, float)
            if xs.size < 2 or xs.shape != ys.shape:
                raise DomainError("custom price map needs two equal-length columns with >= 2 rows")
            if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
                raise DomainError("custom price map must be strictly increasing")
            object.__setattr__(self, "x", tuple(map(float, xs)))
            object.__setattr__(self, "y", tuple(map(float, ys)))

    def __call__(self, z):
        if self.kind == "identity":
            return z
        if self.kind == "exponential":
            return np.exp(z)
        arr = np.asarray(z, float)
        if np.any(arr < self.x[0]) or np.any(arr > self.x[-1]):
            raise GDomainError(f"level outside tabulated price map range [{self.x[0]}, {self.x[-1]}]")
        out = np.interp(arr, self.x, self.y)
        return float(out) if arr.ndim == 0 else out

    def to_dict(self) -> dict:
        if self.kind == "custom":
            return {"type": "custom", "x": list(self.x), "y": list(self.y)}
        return {"type": self.kind}


IDENTITY = PriceMap("identity")
EXPONENTIAL = PriceMap("exponential")


def zero_function(t: float) -> float:
    return 0.0


def unit_buy_cost(u: float, s_buy: float) -> float:
    return 1.0


def zero_sell_cost(u: float, s_buy: float, s_sell: float) -> float:
    return 0.0


@dataclass(frozen=True)
class MarketSpec:
    """Kernel, innovation law, drift ``a``, past ``J``, price map and costs.

    ``holder_exponent`` is declared metadata for the regularity of ``J``; it is
    not verified. ``x_grouping`` picks how the J-increment enters ``x_j``:
    ``"proof"`` gives ``a(s_j)/n + J(s_{j+1}) - J(s_j)`` (consistent with the
    price path), ``"printed"`` gives ``(a(s_j) + J(s_{j+1}) - J(s_j)) / n``.
    """

    kernel: Kernel
    law: LawProvider
    drift: Callable[[float], float] = zero_function
    past: Callable[[float], float] = zero_function
    price_map: PriceMap = IDENTITY
    lam: float = 0.0
    buy_cost: Callable[[float, float], float] = unit_buy_cost
    sell_cost: Callable[[float, float, float], float] = zero_sell_cost
    holder_exponent: Optional[float] = None
    x_grouping: str = "proof"

    def __post_init__(self):
        if self.lam < 0:
            raise DomainError("transaction cost scale lambda must be >= 0")
        if self.x_grouping not in ("proof", "printed"):
            raise DomainError("x_grouping must be 'proof' or 'printed'")

    def law_for(self, n: int) -> InnovationLaw:
        return law_at(self.law, n)

    @property
    def unit_costs(self) -> bool:
        return self.buy_cost is unit_buy_cost and self.sell_cost is zero_sell_cost


@dataclass
class PathDecomposition:
    j: int
    x: float
    y_coeffs: np.ndarray
    z_coeff: float


@dataclass
class SimulatedPath:
    j: np.ndarray
    times: np.ndarray
    xi: np.ndarray
    Z: np.ndarray
    A: np.ndarray
    S: np.ndarray
    meta: dict = field(default_factory=dict)


def _lag_kappa(kernel: Kernel, n: int, lags) -> np.ndarray:
    return np.asarray(kernel.kappa(np.asarray(lags, dtype=float) / n), dtype=float)


def _check_finite(values, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise SingularityError(f"{what} hit a kernel singularity; move t0 off the singular point")


def x_term(market: MarketSpec, grid: GridSpec, j: int) -> float:
    s_j, s_next = grid.time(j), grid.time(j + 1)
    a = market.drift(s_j)
    dJ = market.past(s_next) - market.past(s_j)
    if market.x_grouping == "proof":
        return a / grid.n + dJ
    return (a + dJ) / grid.n


def raw_increments(market: MarketSpec, grid: GridSpec, j: int) -> tuple[np.ndarray, float]:
    """Unscaled history weights ``K(s_{j+1}, s_i) - K(s_j, s_i)`` for i = j0..j-1 and ``K(s_{j+1}, s_j)``.

    Difference kernels are evaluated on exact lags ``(j + 1 - i) / n``.
    """
    j0 = grid.j0
    if j < j0:
        raise DomainError(f"step j={j} precedes entry step j0={j0}")
    kern = market.kernel
    if kern.is_difference:
        lags = np.arange(j - j0, 0, -1)  # j - i for i = j0..j-1
        hist = _lag_kappa(kern, grid.n, lags + 1) - _lag_kappa(kern, grid.n, lags)
        diag = float(kern.kappa(1.0 / grid.n))
    else:
        s_buy, s_sell = grid.time(j), grid.time(j + 1)
        hist = np.array([kern(s_sell, grid.time(i)) - kern(s_buy, grid.time(i)) for i in range(j0, j)])
        diag = kern(s_sell, s_buy)
    _check_finite(hist, "history weights")
    _check_finite(diag, "innovation weight")
    return hist, diag


def decompose(market: MarketSpec, grid: GridSpec, j: int) -> PathDecomposition:
    hist, diag = raw_increments(market, grid, j)
    return PathDecomposition(j=j, x=x_term(market, grid, j), y_coeffs=hist / grid.sqrt_n, z_coeff=diag / grid.sqrt_n)


def noise_coefficients(market: MarketSpec, grid: GridSpec, j: int) -> np.ndarray:
    """Weights ``K(s_j, s_i) / sqrt(n)`` of xi_{i+1}, i = j0..j-1, in Z(s_j)."""
    j0 = grid.j0
    if j < j0:
        raise DomainError(f"step j={j} precedes entry step j0={j0}")
    kern = market.kernel
    if kern.is_difference:
        w = _lag_kappa(kern, grid.n, np.arange(j - j0, 0, -1))
    else:
        w = np.array([kern(grid.time(j), grid.time(i)) for i in range(j0, j)])
    _check_finite(w, "noise weights")
    return w / grid.sqrt_n


def _noise_from_xi(market: MarketSpec, grid: GridSpec, xi: np.ndarray) -> np.ndarray:
    steps = xi.shape[-1]
    kern = market.kernel
    if kern.is_difference:
        c = np.zeros(steps + 1)
        c[1:] = _lag_kappa(kern, grid.n, np.arange(1, steps + 1))
        _check_finite(c, "noise weights")
        conv = np.convolve(xi, c) if steps <= 4096 else fftconvolve(xi, c)
        mem = conv[: steps + 1]
    else:
        j0 = grid.j0
        W = np.zeros((steps + 1, steps))
        for p in range(1, steps + 1):
            for k in range(p):
                W[p, k] = kern(grid.time(j0 + p), grid.time(j0 + k))
        _check_finite(W, "noise weights")
        mem = W @ xi
    return mem / grid.sqrt_n


def simulate_path(
    market: MarketSpec,
    grid: GridSpec,
    rng: Optional[np.random.Generator] = None,
    xi: Optional[np.ndarray] = None,
    steps: Optional[int] = None,
) -> SimulatedPath:
    """One path of (Z, A, S) on ``s_{j0}, ..., s_{j0+steps}``.

    Either draw innovations from ``rng`` or pass them as ``xi`` (length ``steps``).
    """
    if xi is None:
        if steps is None:
            steps = grid.steps()
        if rng is None:
            raise DomainError("simulate_path needs rng or xi")
        xi = sample_array(market.law_for(grid.n), rng, steps)
    else:
        xi = np.asarray(xi, dtype=float)
        if steps is not None and xi.size != steps:
            raise LengthMismatch(f"xi has {xi.size} entries, expected {steps}")
        steps = xi.size
    idx = np.arange(grid.j0, grid.j0 + steps + 1)
    times = grid.time(idx)
    J = np.array([market.past(t) for t in times])
    Z = J + _noise_from_xi(market, grid, xi)
    a = np.array([market.drift(t) for t in times[:-1]])
    A = np.concatenate(([0.0], np.cumsum(a) / grid.n))
    S = np.asarray(market.price_map(A + Z), dtype=float)
    return SimulatedPath(j=idx, times=times, xi=xi, Z=Z, A=A, S=S)


def simulate_noise_path(market: MarketSpec, grid: GridSpec, rng: np.random.Generator) -> np.ndarray:
    return simulate_path(market, grid, rng).Z


def price_path(market: MarketSpec, grid: GridSpec, rng: np.random.Generator) -> np.ndarray:
    return simulate_path(market, grid, rng).S


def buy_level(market: MarketSpec, grid: GridSpec, j: int, history) -> float:
    """Log-level ``A(s_j) + Z(s_j)`` given the realised history xi_{j0+1..j}."""
    history = np.asarray(history, dtype=float)
    w = noise_coefficients(market, grid, j)
    if history.size != w.size:
        raise LengthMismatch(f"history has {history.size} entries, expected {w.size}")
    drift = math.fsum(market.drift(grid.time(i)) for i in range(grid.j0, j)) / grid.n
    return drift + market.past(grid.time(j)) + float(history @ w)


def single_period_return(
    market: MarketSpec, grid: GridSpec, j: int, history, innovation: float, u: float = 1.0
) -> float:
    """Net return from buying ``u`` units at step ``j`` and selling at ``j + 1``."""
    history = np.asarray(history, dtype=float)
    dec = decompose(market, grid, j)
    if history.size != dec.y_coeffs.size:
        raise LengthMismatch(f"history has {history.size} entries, expected {dec.y_coeffs.size}")
    move = dec.x + float(history @ dec.y_coeffs) + dec.z_coeff * innovation
    if market.price_map.kind == "identity" and market.unit_costs:
        return u * move - market.lam
    zeta_buy = buy_level(market, grid, j, history)
    s_buy = float(market.price_map(zeta_buy))
    s_sell = float(market.price_map(zeta_buy + move))
    costs = market.buy_cost(u, s_buy) + market.sell_cost(u, s_buy, s_sell)
    if market.price_map.kind == "identity":
        return u * move - market.lam * costs
    return u * (s_sell - s_buy) - market.lam * costs
