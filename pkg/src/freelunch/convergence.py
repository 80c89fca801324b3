"""Finite-dimensional checks that the discretised noise approaches the continuous one.

Covariances of ``Z^(n)`` are Riemann sums of ``K(T, s) K(t, s)``; they are
compared with the quadrature limit, and Monte Carlo variances are checked
against the exact discrete value with an exact fourth-moment standard error.
Tightness of the path laws is not observable numerically and is not tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._quad import integrate
from .errors import DomainError
from .innovation import InnovationLaw, sample_array
from .kernel import Kernel, kernel_to_dict
from .lattice import GridSpec, MarketSpec, noise_coefficients, snap_floor

__all__ = [
    "TIGHTNESS_NOTE",
    "ConvergenceReport",
    "MomentCheck",
    "covariance_discrete",
    "covariance_limit",
    "convergence_table",
    "mc_moment_check",
]

TIGHTNESS_NOTE = "finite-dimensional covariances only; tightness of the path laws is not checked"

_MC_BATCH = 10_000


def covariance_discrete(market: MarketSpec, grid: GridSpec, t: float, T: float) -> float:
    """E[Z^(n)(T) Z^(n)(t)] with J = 0, summed exactly over the grid."""
    law = market.law_for(grid.n)
    if law.mean != 0.0 or abs(law.central_moment(2) - 1.0) > 1e-12:
        raise DomainError(f"covariance_discrete needs E[xi] = 0 and E[xi^2] = 1, got {law.mean}, {law.variance}")
    if t > T:
        t, T = T, t
    if t < grid.t0:
        raise DomainError(f"t={t} precedes entry time t0={grid.t0}")
    n = grid.n
    kt, kT = snap_floor(n * t) / n, snap_floor(n * T) / n
    kern = market.kernel
    terms = [kern(kT, s) * kern(kt, s) for s in (grid.time(i) for i in range(grid.j0, snap_floor(n * t)))]
    if not all(math.isfinite(v) for v in terms):
        raise DomainError("covariance sum hit a kernel singularity")
    return math.fsum(terms) / n


def covariance_limit(kernel: Kernel, t0: float, t: float, T: float) -> float:
    """int_{t0}^t K(T, s) K(t, s) ds by adaptive quadrature."""
    if t > T:
        t, T = T, t
    if not t >= t0:
        raise DomainError(f"t={t} precedes t0={t0}")
    if t == t0:
        return 0.0
    if kernel.is_difference:
        return integrate(lambda s: float(kernel.kappa(T - s)) * float(kernel.kappa(t - s)), t0, t)
    return integrate(lambda s: kernel(T, s) * kernel(t, s), t0, t)


@dataclass
class ConvergenceReport:
    kernel: dict
    law: dict
    t0: float
    pairs: list
    n_list: list
    rows: list  # (n, t, T, discrete, limit, abs_error)
    slopes: dict  # (t, T) -> fitted log-log slope, None when an error is zero
    note: str = TIGHTNESS_NOTE

    def errors(self, pair) -> list:
        return [r[5] for r in self.rows if (r[1], r[2]) == tuple(pair)]

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "law": self.law,
            "t0": self.t0,
            "n_list": self.n_list,
            "pairs": [
                {"t": t, "T": T, "slope": self.slopes[(t, T)], "errors": self.errors((t, T))} for t, T in self.pairs
            ],
            "note": self.note,
        }


def _slope(ns: Sequence[int], errs: Sequence[float]) -> Optional[float]:
    if len(ns) < 2 or any(e <= 0 for e in errs):
        return None
    return float(np.polyfit(np.log(ns), np.log(errs), 1)[0])


def convergence_table(kernel: Kernel, law: InnovationLaw, t0: float, pairs, n_list) -> ConvergenceReport:
    """Discrete-versus-limit covariance table with a log-log slope per (t, T)."""
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise DomainError("n_list must be strictly increasing")
    pairs = [(float(min(p)), float(max(p))) for p in pairs]
    market = MarketSpec(kernel=kernel, law=law)
    rows, slopes = [], {}
    for t, T in pairs:
        limit = covariance_limit(kernel, t0, t, T)
        errs = []
        for n in n_list:
            disc = covariance_discrete(market, GridSpec(n, t0), t, T)
            err = abs(disc - limit)
            rows.append((n, t, T, disc, limit, err))
            errs.append(err)
        slopes[(t, T)] = _slope(n_list, errs)
    return ConvergenceReport(kernel_to_dict(kernel), law.to_dict(), t0, pairs, n_list, rows, slopes)


@dataclass
class MomentCheck:
    num_paths: int
    seed: int
    step: int
    mean: float
    variance: float
    analytic_mean: float
    analytic_variance: float
    z_mean: float
    z_variance: float
    extra: dict = field(default_factory=dict)


def _zscore(diff: float, se: float) -> float:
    if se > 0:
        return diff / se
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def mc_moment_check(market: MarketSpec, grid: GridSpec, t: float, num_paths: int, seed: int) -> MomentCheck:
    """Monte Carlo mean and variance of Z^(n)(t) (J = 0) against exact values.

    Paths are drawn in fixed batches, each from its own child of
    ``SeedSequence(seed)``, so results do not depend on how work is split.
    The variance z-score uses the exact standard error of the unbiased sample
    variance, built from the fourth cumulant of the innovation law.
    """
    if num_paths < 2:
        raise DomainError("need at least two paths")
    law = market.law_for(grid.n)
    j = grid.j0 + snap_floor(grid.n * (t - grid.t0))
    if j < grid.j0:
        raise DomainError(f"t={t} precedes t0={grid.t0}")
    w = noise_coefficients(market, grid, j)
    mu_xi, var_xi, k4_xi = law.mean, law.variance, law.fourth_cumulant
    mu = mu_xi * math.fsum(w)
    sigma2 = var_xi * math.fsum(w**2)
    mu4 = k4_xi * math.fsum(w**4) + 3.0 * sigma2**2

    n_batches = -(-num_paths // _MC_BATCH)
    children = np.random.SeedSequence(seed).spawn(n_batches)
    values = np.empty(num_paths)
    for b, child in enumerate(children):
        lo = b * _MC_BATCH
        size = min(_MC_BATCH, num_paths - lo)
        rng = np.random.Generator(np.random.PCG64(child))
        xi = sample_array(law, rng, (size, w.size))
        values[lo : lo + size] = xi @ w
    N = num_paths
    mean = float(values.mean())
    var = float(values.var(ddof=1))
    se_var = math.sqrt(max(0.0, (mu4 - sigma2**2 * (N - 3) / (N - 1)) / N))
    se_mean = math.sqrt(sigma2 / N)
    return MomentCheck(
        num_paths=N,
        seed=seed,
        step=j,
        mean=mean,
        variance=var,
        analytic_mean=mu,
        analytic_variance=sigma2,
        z_mean=_zscore(mean - mu, se_mean),
        z_variance=_zscore(var - sigma2, se_var),
        extra={"se_variance": se_var, "se_mean": se_mean},
    )
