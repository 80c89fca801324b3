"""Arbitrage and FLVR detection for the wait-buy-sell-next-period strategy.

All worst/best cases are exact: the innovations are independent with finite
support, and the one-period return is linear in them, so the essential
supremum over histories picks the top or bottom atom per coefficient sign.

Sums that cancel to near zero (the Ornstein-Uhlenbeck telescoping sum tends to
``-kappa(inf) = 0``) are accumulated with exactly rounded summation so their
sign is reliable far below the working precision of the individual terms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from ._quad import integrate
from .errors import DomainError, HypothesisViolated, NonDifferenceKernel
from .innovation import InnovationLaw, LawProvider, law_at
from .kernel import Kernel, kernel_dt, total_variation
from .lattice import GridSpec, MarketSpec, PriceMap, raw_increments, snap_floor, x_term

__all__ = [
    "Verdict",
    "ArbitrageCertificate",
    "CriterionResult",
    "SymmetricCriterionResult",
    "TheoremLRecord",
    "FlvrEntry",
    "FlvrReport",
    "gamma",
    "beta",
    "esssup_xy",
    "essinf_z",
    "lambda_bar",
    "lambda_bar_scan",
    "scan_rows",
    "certificate_at",
    "search_arbitrage",
    "integral_criterion",
    "symmetric_criterion",
    "check_theorem_L",
    "min_arbitrage_steps_fbm",
    "expected_return_on_event",
    "flvr_scan",
    "transaction_cost_bound",
]


class Verdict(str, enum.Enum):
    STRICT = "arbitrage_strict"
    BOUNDARY = "arbitrage_at_boundary"
    NONE = "none"


class _ExactSum:
    """Running sum kept as non-overlapping partials (Shewchuk), rounded once on read."""

    __slots__ = ("partials",)

    def __init__(self):
        self.partials: list[float] = []

    def add(self, x: float) -> None:
        partials = self.partials
        i = 0
        for y in partials:
            if abs(x) < abs(y):
                x, y = y, x
            hi = x + y
            lo = y - (hi - x)
            if lo:
                partials[i] = lo
                i += 1
            x = hi
        partials[i:] = [x]

    def value(self, *extra: float) -> float:
        return math.fsum([*self.partials, *extra])


def _best_atom(coeff: float, law: InnovationLaw) -> float:
    # ties (coeff == 0) go to the largest atom
    return law.M if coeff >= 0 else -law.m


def _worst_atom(coeff: float, law: InnovationLaw) -> float:
    return -law.m if coeff >= 0 else law.M


def gamma(market: MarketSpec, grid: GridSpec, i: int, j: int) -> float:
    """Best history atom for xi_{i+1} when buying at step j."""
    if not (grid.j0 <= i < j):
        raise DomainError(f"gamma needs j0 <= i < j, got i={i}, j={j}, j0={grid.j0}")
    law = market.law_for(grid.n)
    kern = market.kernel
    if kern.is_difference:
        up = float(kern.kappa((j + 1 - i) / grid.n))
        down = float(kern.kappa((j - i) / grid.n))
    else:
        s_i = grid.time(i)
        up, down = kern(grid.time(j + 1), s_i), kern(grid.time(j), s_i)
    return law.M if up >= down else -law.m


def beta(market: MarketSpec, grid: GridSpec, j: int) -> float:
    """Worst next innovation when buying at step j."""
    if j < grid.j0:
        raise DomainError(f"step j={j} precedes entry step j0={grid.j0}")
    law = market.law_for(grid.n)
    kern = market.kernel
    diag = float(kern.kappa(1.0 / grid.n)) if kern.is_difference else kern(grid.time(j + 1), grid.time(j))
    return -law.m if diag >= 0 else law.M


def _history_terms(hist: np.ndarray, law: InnovationLaw) -> list[float]:
    return [float(d) * _best_atom(d, law) for d in hist]


def esssup_xy(market: MarketSpec, grid: GridSpec, j: int) -> tuple[float, np.ndarray]:
    """Essential supremum of x_j + y_j over histories, and the attaining history."""
    law = market.law_for(grid.n)
    hist, _ = raw_increments(market, grid, j)
    witness = np.array([_best_atom(d, law) for d in hist])
    x = x_term(market, grid, j)
    return x + math.fsum(_history_terms(hist, law)) / grid.sqrt_n, witness


def essinf_z(market: MarketSpec, grid: GridSpec, j: int) -> float:
    law = market.law_for(grid.n)
    _, diag = raw_increments(market, grid, j)
    return diag * _worst_atom(diag, law) / grid.sqrt_n


def lambda_bar(market: MarketSpec, grid: GridSpec, j: int) -> float:
    """Critical transaction cost: esssup(x_j + y_j) + essinf z_{j+1}."""
    law = market.law_for(grid.n)
    hist, diag = raw_increments(market, grid, j)
    x = x_term(market, grid, j)
    terms = _history_terms(hist, law)
    terms.append(diag * _worst_atom(diag, law))
    terms.append(x * grid.sqrt_n)
    return math.fsum(terms) / grid.sqrt_n


@dataclass
class _ScanRow:
    j: int
    lambda_bar: float
    expected: float
    esssup_xy: float


def _scan(market: MarketSpec, grid: GridSpec, j_max: int) -> Iterator[_ScanRow]:
    """lambda_bar and the on-event expected return for j = j0..j_max.

    Difference kernels reuse one running sum (the history weights for step j
    are those for step j-1 plus one new lag), so a scan is linear in j_max.
    """
    j0 = grid.j0
    if j_max < j0:
        raise DomainError(f"j_max={j_max} precedes entry step j0={j0}")
    law = market.law_for(grid.n)
    rn = grid.sqrt_n
    kern = market.kernel
    if kern.is_difference:
        _, diag = raw_increments(market, grid, j0)
        kap = np.asarray(kern.kappa(np.arange(1, j_max - j0 + 2, dtype=float) / grid.n), dtype=float)
        if not np.all(np.isfinite(kap)):
            raw_increments(market, grid, j_max)  # raises with the standard message
        steps = kap[1:] - kap[:-1]  # steps[l-1] = kappa((l+1)/n) - kappa(l/n)
        acc = _ExactSum()
        for h in range(0, j_max - j0 + 1):
            if h:
                d = float(steps[h - 1])
                acc.add(d * _best_atom(d, law))
            xr = x_term(market, grid, j0 + h) * rn
            lb = acc.value(diag * _worst_atom(diag, law), xr) / rn
            ex = acc.value(diag * law.mean, xr) / rn
            yield _ScanRow(j0 + h, lb, ex, acc.value(xr) / rn)
    else:
        for j in range(j0, j_max + 1):
            hist, diag = raw_increments(market, grid, j)
            terms = _history_terms(hist, law)
            xr = x_term(market, grid, j) * rn
            lb = math.fsum([*terms, diag * _worst_atom(diag, law), xr]) / rn
            ex = math.fsum([*terms, diag * law.mean, xr]) / rn
            yield _ScanRow(j, lb, ex, math.fsum([*terms, xr]) / rn)


def lambda_bar_scan(market: MarketSpec, grid: GridSpec, j_max: int) -> np.ndarray:
    """lambda_bar(j) for j = j0..j_max."""
    return np.array([row.lambda_bar for row in _scan(market, grid, j_max)])


def scan_rows(market: MarketSpec, grid: GridSpec, j_max: int) -> list[tuple[int, float, float, float]]:
    """``(j, lambda_bar, esssup_xy, essinf_z)`` for j = j0..j_max."""
    ez = essinf_z(market, grid, grid.j0) if market.kernel.is_difference else None
    rows = []
    for row in _scan(market, grid, j_max):
        z = ez if ez is not None else essinf_z(market, grid, row.j)
        rows.append((row.j, row.lambda_bar, row.esssup_xy, z))
    return rows


@dataclass
class ArbitrageCertificate:
    verdict: Verdict
    lam: float
    n: int
    t0: float
    j0: int
    j_star: Optional[int] = None
    lambda_bar: Optional[float] = None
    esssup_xy: Optional[float] = None
    essinf_z: Optional[float] = None
    witness: tuple = ()
    worst_innovation: Optional[float] = None

    @property
    def found(self) -> bool:
        return self.verdict is not Verdict.NONE

    @property
    def sell_step(self) -> Optional[int]:
        return None if self.j_star is None else self.j_star + 1

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "t0": self.t0,
            "j0": self.j0,
            "j_star": self.j_star,
            "sell_step": self.sell_step,
            "lambda": self.lam,
            "lambda_bar": self.lambda_bar,
            "esssup_xy": self.esssup_xy,
            "essinf_z": self.essinf_z,
            "witness": list(self.witness),
            "worst_innovation": self.worst_innovation,
            "verdict": self.verdict.value,
        }


def _innovation_spread(market: MarketSpec, grid: GridSpec, j: int) -> bool:
    law = market.law_for(grid.n)
    _, diag = raw_increments(market, grid, j)
    return diag != 0 and len(law.values) > 1


def certificate_at(market: MarketSpec, grid: GridSpec, j: int, lam: Optional[float] = None) -> ArbitrageCertificate:
    """Certificate for buying at step ``j``, whatever its verdict."""
    lam = market.lam if lam is None else lam
    lb = lambda_bar(market, grid, j)
    if lb > lam:
        verdict = Verdict.STRICT
    elif lb == lam and _innovation_spread(market, grid, j):
        # finite support: the esssup history and the worst innovation both carry point mass
        verdict = Verdict.BOUNDARY
    else:
        verdict = Verdict.NONE
    sup, witness = esssup_xy(market, grid, j)
    law = market.law_for(grid.n)
    _, diag = raw_increments(market, grid, j)
    return ArbitrageCertificate(
        verdict=verdict,
        lam=lam,
        n=grid.n,
        t0=grid.t0,
        j0=grid.j0,
        j_star=j,
        lambda_bar=lb,
        esssup_xy=sup,
        essinf_z=essinf_z(market, grid, j),
        witness=tuple(float(w) for w in witness),
        worst_innovation=_worst_atom(diag, law),
    )


def search_arbitrage(
    market: MarketSpec, grid: GridSpec, j_max: int, lam: Optional[float] = None
) -> ArbitrageCertificate:
    """Smallest buy step j <= j_max whose worst-case one-period return clears ``lam``.

    The answer depends only on (kernel, law, grid, j): no realised path enters.
    """
    lam = market.lam if lam is None else lam
    for row in _scan(market, grid, j_max):
        if row.lambda_bar > lam or (row.lambda_bar == lam and _innovation_spread(market, grid, row.j)):
            cert = certificate_at(market, grid, row.j, lam)
            if cert.found:
                return cert
    return ArbitrageCertificate(verdict=Verdict.NONE, lam=lam, n=grid.n, t0=grid.t0, j0=grid.j0)


# --------------------------------------------------------------------------
# Integral and total-variation criteria


@dataclass
class CriterionResult:
    lhs: float
    rhs: float
    j_star: int
    epsilon: float
    holds: bool
    beyond_horizon: bool


def _j_star_for(grid: GridSpec, T: float) -> int:
    # j* + 1 = floor(nT - n t0 + floor(n t0))
    return snap_floor(grid.n * T - grid.n * grid.t0 + grid.j0) - 1


def integral_criterion(market: MarketSpec, grid: GridSpec, T: float, epsilon: float = 0.0) -> CriterionResult:
    """Compare int_{t0}^T K'_1(T, s) Gamma(T, s) ds with |K(s_{j*+1}, s_{j*}) beta_{j*}|.

    Gamma is the step function of best history atoms on [s_i, s_{i+1}),
    i = j0..j*-1, and vanishes on [s_{j*}, T]. The criterion holds when
    ``lhs > rhs + epsilon``.
    """
    j_star = _j_star_for(grid, T)
    if j_star < grid.j0:
        raise DomainError(f"T={T} leaves no buy step after t0={grid.t0} at n={grid.n}")
    kern = market.kernel
    cells = []
    for i in range(grid.j0, j_star):
        a, b = grid.time(i), grid.time(i + 1)
        if kern.is_difference:
            # the s-integral of kappa'(T - s) over a cell is a kappa difference
            cell = float(kern.kappa(T - a)) - float(kern.kappa(T - b))
        else:
            cell = integrate(lambda s: kernel_dt(kern, T, s), a, b)
        cells.append(cell * gamma(market, grid, i, j_star))
    lhs = math.fsum(cells)
    _, diag = raw_increments(market, grid, j_star)
    rhs = abs(diag * beta(market, grid, j_star))
    beyond = grid.time(j_star + 1) > T + 1e-12 * max(1.0, abs(T))
    return CriterionResult(lhs, rhs, j_star, epsilon, lhs > rhs + epsilon, beyond)


@dataclass
class SymmetricCriterionResult:
    sup_value: float
    T_at_sup: float
    T_values: np.ndarray
    values: np.ndarray

    @property
    def holds(self) -> bool:
        return self.sup_value > 0


def symmetric_criterion(market: MarketSpec, grid: GridSpec, max_steps: int) -> SymmetricCriterionResult:
    """Symmetric-support version of the integral criterion over grid-compatible T.

    For each T = t0 + h/n, h = 1..max_steps, evaluates
    ``int_{t0}^{T - 1/n} |K'_1(T, s)| ds - |K(T, T - 1/n)|``; the integral runs
    over the support of Gamma only.
    """
    kern = market.kernel
    n, t0 = grid.n, grid.t0
    hs = np.arange(1, max_steps + 1)
    Ts = t0 + hs / n
    vals = []
    for h, T in zip(hs, Ts):
        if kern.is_difference:
            tv = total_variation(kern, 1.0 / n, h / n) if h > 1 else 0.0
            vals.append(tv - abs(float(kern.kappa(1.0 / n))))
        else:
            tv = integrate(lambda s: abs(kern.dt(T, s)), t0, T - 1.0 / n) if h > 1 else 0.0
            vals.append(tv - abs(kern(T, T - 1.0 / n)))
    vals = np.asarray(vals)
    k = int(np.argmax(vals))
    return SymmetricCriterionResult(float(vals[k]), float(Ts[k]), Ts, vals)


@dataclass
class TheoremLRecord:
    kappa_zero: float
    kappa_on_grid: list
    sign_change: bool
    condition1: bool
    total_variation: float
    law_ratio: float
    variation_bound: float
    condition2: bool
    support_separated: bool
    conclusion: str
    notes: list = field(default_factory=list)

    @property
    def arbitrage(self) -> bool:
        return self.condition1 or self.condition2


def check_theorem_L(
    kernel: Kernel, law_provider: LawProvider, n_sequence: Sequence[int], nu: Optional[float] = None
) -> TheoremLRecord:
    """Check the two difference-kernel arbitrage conditions along ``n_sequence``.

    liminf |kappa(1/n)| is taken as the closed-form right limit kappa(0+) (every
    built-in kernel has one); the finite-sequence values are reported alongside.
    The law ratio max(M, m)/min(M, m) is taken as its minimum over the sequence.
    """
    if not kernel.is_difference:
        raise NonDifferenceKernel(f"{type(kernel).__name__} has no difference form")
    if not n_sequence:
        raise DomainError("n_sequence must not be empty")
    k0 = abs(kernel.kappa_zero())
    on_grid = [abs(float(kernel.kappa(1.0 / n))) for n in n_sequence]
    sign_change = kernel.changes_sign()
    cond1 = k0 == 0.0 or sign_change
    tv = total_variation(kernel, 0.0, math.inf)
    laws = [law_at(law_provider, n) for n in n_sequence]
    ratios = []
    for law in laws:
        lo, hi = min(law.M, law.m), max(law.M, law.m)
        ratios.append(math.inf if lo <= 0 else hi / lo)
    ratio = min(ratios)
    bound = 0.0 if k0 == 0.0 else k0 * ratio
    cond2 = tv > bound
    sep = all(law.separates(nu or 0.0) for law in laws)
    notes = []
    if not sep:
        notes.append("innovation support does not straddle zero by nu on every n")
    if cond1 or cond2:
        conclusion = "arbitrage for all large enough n, admitting small transaction costs"
    else:
        conclusion = "no arbitrage conclusion from either condition"
    return TheoremLRecord(k0, on_grid, sign_change, cond1, tv, ratio, bound, cond2, sep, conclusion, notes)


def min_arbitrage_steps_fbm(H: float, point_mass: bool = True) -> int:
    """Fewest steps after entry for the fBm moving-average arbitrage at n with x = 0.

    The smallest integer k with k^(H-1/2) > 2, or >= 2 when the esssup carries
    point mass. Compared exactly in integers: with H - 1/2 = p/q in lowest
    terms, k^(H-1/2) >= 2 iff k^p >= 2^q.
    """
    if not (0.5 < H < 1.0):
        raise DomainError(f"H must lie in (1/2, 1), got {H}")
    alpha = Fraction(repr(float(H))) - Fraction(1, 2)
    p, q = alpha.numerator, alpha.denominator
    target = 2**q

    def ok(k: int) -> bool:
        v = k**p
        return v >= target if point_mass else v > target

    k = max(1, int(math.floor(2.0 ** (q / p))) - 2)
    while not ok(k):
        k += 1
    while k > 1 and ok(k - 1):
        k -= 1
    return k


# --------------------------------------------------------------------------
# FLVR


def expected_return_on_event(market: MarketSpec, grid: GridSpec, j: int) -> float:
    """x_j + esssup y_j + E[z_{j+1}]: mean return given the best history occurred."""
    law = market.law_for(grid.n)
    hist, diag = raw_increments(market, grid, j)
    terms = _history_terms(hist, law)
    terms.append(diag * law.mean)
    terms.append(x_term(market, grid, j) * grid.sqrt_n)
    return math.fsum(terms) / grid.sqrt_n


@dataclass
class FlvrEntry:
    j: int
    ratio: float
    expected_return: float
    epsilon: float = 0.0


@dataclass
class FlvrReport:
    entries: list
    achieved_delta: float
    targets: dict

    @property
    def all_met(self) -> bool:
        return all(j is not None for j in self.targets.values())


def flvr_hypotheses(market: MarketSpec, grid: GridSpec, nu: Optional[float] = None) -> None:
    """Raise :class:`HypothesisViolated` naming the first failed FLVR hypothesis."""
    kern = market.kernel
    law = market.law_for(grid.n)
    if market.lam != 0:
        raise HypothesisViolated("zero_transaction_cost", f"lambda = {market.lam}")
    if not kern.is_difference:
        raise HypothesisViolated("difference_kernel", type(kern).__name__)
    if law.M != law.m:
        raise HypothesisViolated("symmetric_support", f"M = {law.M}, m = {law.m}")
    if not law.separates(nu or 0.0):
        raise HypothesisViolated("support_separation", f"support [{-law.m}, {law.M}], nu = {nu or 0.0}")
    if not law.mean / law.m > -1:
        raise HypothesisViolated("mean_bound", f"E[xi]/m = {law.mean / law.m}")
    if kern.changes_sign():
        raise HypothesisViolated("kappa_one_sign")
    if kern.inf_abs_kappa() != 0.0:
        raise HypothesisViolated("inf_kappa_zero", f"inf |kappa| = {kern.inf_abs_kappa()}")
    if not abs(float(kern.kappa(1.0 / grid.n))) > 0:
        raise HypothesisViolated("kappa_grid_positive", f"kappa(1/n) = 0 at n = {grid.n}")


def flvr_scan(
    market: MarketSpec,
    grid: GridSpec,
    j_max: int,
    delta_targets: Iterable[float] = (0.5, 0.1, 0.02),
    nu: Optional[float] = None,
) -> FlvrReport:
    """Downside-to-mean ratios on the best-history event for j = j0..j_max.

    With finite support the best history has positive probability, so the
    conditioning event is exact attainment (epsilon = 0). The ratio is the
    worst-case return over the expected return on that event; a target delta
    is met once some ratio exceeds -delta.
    """
    flvr_hypotheses(market, grid, nu)
    entries = []
    for row in _scan(market, grid, j_max):
        if row.expected > 0:
            entries.append(FlvrEntry(row.j, row.lambda_bar / row.expected, row.expected))
    targets = {}
    for delta in delta_targets:
        targets[float(delta)] = next((e.j for e in entries if e.ratio > -delta), None)
    if entries:
        achieved = max(0.0, -max(e.ratio for e in entries))
    else:
        achieved = math.inf
    return FlvrReport(entries, achieved, targets)


# --------------------------------------------------------------------------
# Transaction-cost bound for non-identity price maps


def transaction_cost_bound(
    price_map, zeta_star: float, c: float, Lambda_star: float, Lambda_upper: float
) -> float:
    """Largest lambda for which a simple-model margin ``c`` survives the price map.

    ``(G(zeta_* + c) - G(zeta_*)) / (Lambda^* + Lambda_*)``.
    """
    if isinstance(price_map, str):
        price_map = PriceMap(price_map)
    if not c > 0:
        raise DomainError(f"margin c must be positive, got {c}")
    denom = Lambda_star + Lambda_upper
    if not (Lambda_star >= 0 and Lambda_upper >= 0 and denom > 0):
        raise DomainError("cost weights must be nonnegative with a positive sum")
    return float(price_map(zeta_star + c) - price_map(zeta_star)) / denom
