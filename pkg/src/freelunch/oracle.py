"""Exhaustive enumeration over innovation histories.

This is the independent check on :func:`freelunch.lunch.lambda_bar`: it never
uses the sign rules for best/worst atoms, only the price increment evaluated
from the kernel at grid times for every atom combination.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EnumerationTooLarge
from .lattice import GridSpec, MarketSpec, single_period_return

__all__ = ["OracleResult", "brute_force_oracle", "FullModelOutcomes", "full_model_outcomes"]


@dataclass
class OracleResult:
    max_worstcase_return: float
    history: tuple
    essinf_z: float
    n_histories: int


def _digits(idx: np.ndarray, base: int, length: int) -> np.ndarray:
    """Mixed-radix digits, most significant first, so index order is lexicographic."""
    out = np.empty((idx.size, length), dtype=np.int64)
    rem = idx.copy()
    for pos in range(length - 1, -1, -1):
        out[:, pos] = rem % base
        rem //= base
    return out


def brute_force_oracle(
    market: MarketSpec,
    grid: GridSpec,
    j: int,
    lam: Optional[float] = None,
    cap: int = 10**7,
    chunk: int = 1 << 16,
) -> OracleResult:
    """Max over all histories of the worst-case one-period net return at step ``j``.

    Ties between histories go to the lexicographically largest atom choice.
    """
    lam = market.lam if lam is None else lam
    law = market.law_for(grid.n)
    atoms = np.asarray(law.values)
    r = atoms.size
    j0 = grid.j0
    h = j - j0
    if h < 0:
        raise ValueError(f"step j={j} precedes entry step j0={j0}")
    total = r**h
    if total > cap:
        raise EnumerationTooLarge(f"{r}^{h} = {total} histories exceed the cap of {cap}")

    kern = market.kernel
    rn = grid.sqrt_n
    s_buy, s_sell = grid.time(j), grid.time(j + 1)
    w_sell = np.array([kern(s_sell, grid.time(i)) for i in range(j0, j + 1)]) / rn
    w_buy = np.array([kern(s_buy, grid.time(i)) for i in range(j0, j)]) / rn
    a = market.drift(s_buy)
    dJ = market.past(s_sell) - market.past(s_buy)
    base = a / grid.n + dJ if market.x_grouping == "proof" else (a + dJ) / grid.n

    innovations = w_sell[-1] * atoms
    worst_z = float(innovations.min())

    best_val = -np.inf
    best_idx = 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        hist = atoms[_digits(idx, r, h)]
        # column-by-column sums: bit-identical whatever the chunk size
        sell = np.zeros(idx.size)
        buy = np.zeros(idx.size)
        for k in range(h):
            sell += hist[:, k] * w_sell[k]
            buy += hist[:, k] * w_buy[k]
        vals = base + (sell - buy) + worst_z - lam
        top = vals.max()
        if top >= best_val:
            best_val = float(top)
            best_idx = int(idx[np.flatnonzero(vals == top)[-1]])
    history = tuple(float(v) for v in atoms[_digits(np.array([best_idx]), r, h)[0]]) if h else ()
    return OracleResult(best_val, history, worst_z, total)


@dataclass
class FullModelOutcomes:
    histories: np.ndarray
    innovations: np.ndarray
    returns: np.ndarray
    on_event: np.ndarray


def full_model_outcomes(
    market: MarketSpec, grid: GridSpec, j: int, event_history=None, u: float = 1.0, cap: int = 10**5
) -> FullModelOutcomes:
    """Every (history, innovation) outcome of the full model at step ``j``.

    Returns are computed through the market's price map and cost functions.
    ``on_event`` flags outcomes whose history equals ``event_history``.
    """
    law = market.law_for(grid.n)
    h = j - grid.j0
    if len(law.values) ** (h + 1) > cap:
        raise EnumerationTooLarge(f"{len(law.values)}^{h + 1} outcomes exceed the cap of {cap}")
    hs, zs, rs, ev = [], [], [], []
    target = None if event_history is None else tuple(float(v) for v in event_history)
    for hist in itertools.product(law.values, repeat=h):
        for z in law.values:
            hs.append(hist)
            zs.append(z)
            rs.append(single_period_return(market, grid, j, hist, z, u=u))
            ev.append(target is not None and tuple(hist) == target)
    return FullModelOutcomes(np.array(hs).reshape(len(hs), h), np.array(zs), np.array(rs), np.array(ev, dtype=bool))
