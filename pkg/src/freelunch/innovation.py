"""Finite-support innovation laws and seeded sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "InnovationLaw",
    "LawProvider",
    "PRNG_ID",
    "law_rademacher",
    "law_two_point",
    "law_degenerate",
    "law_from_atoms",
    "law_at",
    "law_from_dict",
    "moments",
    "make_rng",
    "sample",
    "sample_array",
]

PRNG_ID = "numpy.random.PCG64"


@dataclass(frozen=True)
class InnovationLaw:
    """Distribution of one innovation xi, given by its atoms.

    ``M`` is the largest atom and ``m`` minus the smallest, so the essential
    support is ``[-m, M]`` and both bounds carry point mass.
    """

    values: tuple
    probs: tuple
    label: str = field(default="atoms", compare=False)

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        ps = tuple(float(p) for p in self.probs)
        if not vals or len(vals) != len(ps):
            raise DomainError("law needs equally many atoms and probabilities")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise DomainError("atom values must be strictly increasing")
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("atoms must be finite")
        if any(not (0.0 < p <= 1.0) for p in ps):
            raise DomainError("atom probabilities must lie in (0, 1]")
        if abs(math.fsum(ps) - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {math.fsum(ps)!r}, not 1")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "probs", ps)

    @property
    def M(self) -> float:
        return self.values[-1]

    @property
    def m(self) -> float:
        return -self.values[0]

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    def central_moment(self, k: int) -> float:
        mu = self.mean
        return math.fsum(p * (v - mu) ** k for v, p in zip(self.values, self.probs))

    @property
    def variance(self) -> float:
        return self.central_moment(2)

    @property
    def fourth_cumulant(self) -> float:
        return self.central_moment(4) - 3.0 * self.variance**2

    @property
    def is_symmetric_support(self) -> bool:
        return self.M == self.m

    def separates(self, nu: float = 0.0) -> bool:
        """True when essinf < -nu and esssup > nu."""
        return self.values[0] < -nu and self.values[-1] > nu

    def to_dict(self) -> dict:
        if self.label == "rademacher":
            return {"type": "rademacher"}
        if self.label == "two_point":
            return {"type": "two_point", "down": self.values[0], "up": self.values[1]}
        return {"type": "atoms", "values": list(self.values), "probs": list(self.probs)}


LawProvider = Union[InnovationLaw, Callable[[int], InnovationLaw]]


def law_at(provider: LawProvider, n: int) -> InnovationLaw:
    """Resolve the law used at discretisation level ``n``."""
    if isinstance(provider, InnovationLaw):
        return provider
    law = provider(n)
    if not isinstance(law, InnovationLaw):
        raise DomainError(f"law provider returned {type(law).__name__} for n={n}")
    return law


def law_rademacher() -> InnovationLaw:
    return InnovationLaw((-1.0, 1.0), (0.5, 0.5), label="rademacher")


def law_two_point(down: float, up: float) -> InnovationLaw:
    """Zero-mean two-point law on ``{down, up}``."""
    if not (down < 0 < up):
        raise DomainError(f"two_point law needs down < 0 < up, got down={down}, up={up}")
    p_up = -down / (up - down)
    return InnovationLaw((down, up), (1.0 - p_up, p_up), label="two_point")


def law_degenerate(value: float = 0.0) -> InnovationLaw:
    return InnovationLaw((value,), (1.0,), label="atoms")


def law_from_atoms(values, probs) -> InnovationLaw:
    pairs = sorted(zip(values, probs))
    return InnovationLaw(tuple(v for v, _ in pairs), tuple(p for _, p in pairs))


def law_from_dict(d: dict) -> InnovationLaw:
    kind = d.get("type")
    try:
        if kind == "rademacher":
            return law_rademacher()
        if kind == "two_point":
            return law_two_point(float(d["down"]), float(d["up"]))
        if kind == "atoms":
            return law_from_atoms(d["values"], d["probs"])
    except KeyError as exc:
        raise ConfigError(f"law spec {d!r} is missing {exc}") from None
    raise ConfigError(f"unknown law type {kind!r}; choose rademacher, two_point or atoms")


def moments(law: InnovationLaw) -> tuple[float, float]:
    return law.mean, law.variance


def make_rng(seed: int) -> np.random.Generator:
    if not (0 <= int(seed) < 2**64):
        raise DomainError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.PCG64(int(seed)))


def sample_array(law: InnovationLaw, rng: np.random.Generator, size) -> np.ndarray:
    """Draw atoms by inverse CDF on uniform variates."""
    cdf = np.cumsum(law.probs)
    cdf[-1] = 1.0
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    return np.asarray(law.values)[np.minimum(idx, len(law.values) - 1)]


def sample(law: InnovationLaw, rng: np.random.Generator) -> float:
    return float(sample_array(law, rng, None))
