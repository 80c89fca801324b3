"""Volterra kernels K(t, s) and their difference forms kappa(theta).

Every built-in kernel except :class:`FbmSottinen` is a difference kernel,
``K(t, s) = kappa((t - s)_+)``. Kernels are frozen dataclasses, so they are
hashable and safe to share between threads.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import ClassVar

import numpy as np

from ._quad import integrate
from .errors import ConfigError, DomainError, NonDifferenceKernel, SingularDerivative

__all__ = [
    "Kernel",
    "BrownianConstant",
    "FbmMovingAverage",
    "FbmSottinen",
    "OrnsteinUhlenbeck",
    "Rogers",
    "MixedBm",
    "Tabulated",
    "hurst_offset",
    "kappa_eval",
    "kernel_eval",
    "kernel_dt",
    "total_variation",
    "square_integral",
    "load_tabulated_csv",
    "kernel_from_dict",
    "kernel_to_dict",
    "KERNEL_TYPES",
]


def hurst_offset(H: float) -> float:
    """Return ``H - 1/2`` rounded once from the decimal value of ``H``.

    ``0.6 - 0.5`` in binary floating point is ``0.09999999999999998``; that
    one-ulp shortfall is enough to move ``1024 ** (H - 1/2)`` below 2 and
    shift exact arbitrage boundaries by a step. Interpreting ``H`` through
    its shortest decimal repr keeps boundaries where the user put them.
    """
    return float(Fraction(repr(float(H))) - Fraction(1, 2))


def _as_output(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def _check_hurst(H: float, low: float, high: float, allow_half: bool = False) -> None:
    if not (low < H < high) or (not allow_half and H == 0.5):
        raise DomainError(f"Hurst exponent {H} outside ({low}, {high})" + ("" if allow_half else " minus {1/2}"))


@dataclass(frozen=True)
class Kernel:
    """Base class. Subclasses implement the kappa-level hooks."""

    domain_floor: float = field(default=1e-12, kw_only=True)

    type_name: ClassVar[str] = ""
    is_difference: ClassVar[bool] = True
    # kappa' blows up as theta -> 0+
    singular_derivative_at_zero: ClassVar[bool] = False

    # -- kappa-level interface (difference kernels) -------------------------
    def _kappa(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _kappa_prime(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def kappa(self, theta):
        """Vectorised kappa(theta) for theta >= 0; theta = 0 gives the right limit."""
        if not self.is_difference:
            raise NonDifferenceKernel(f"{type(self).__name__} has no difference form")
        arr = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._kappa(arr)
        return _as_output(out, arr.ndim == 0)

    def kappa_prime(self, theta):
        arr = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._kappa_prime(arr)
        return _as_output(out, arr.ndim == 0)

    def kappa_zero(self) -> float:
        """Right limit kappa(0+); may be +inf."""
        return float(self.kappa(0.0))

    def kappa_infinity(self) -> float:
        raise NotImplementedError

    def is_monotone(self) -> bool:
        return True

    def changes_sign(self) -> bool:
        return False

    def inf_abs_kappa(self) -> float:
        """inf over theta > 0 of |kappa(theta)|."""
        if self.changes_sign():
            return 0.0
        return min(abs(self.kappa_zero()), abs(self.kappa_infinity()))

    # -- two-parameter interface --------------------------------------------
    def __call__(self, t: float, s: float) -> float:
        if s >= t:
            return 0.0
        return float(self.kappa(t - s))

    def dt(self, t: float, s: float) -> float:
        """Partial derivative in the first argument, for s < t."""
        return float(self.kappa_prime(t - s))

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class BrownianConstant(Kernel):
    type_name: ClassVar[str] = "brownian"

    def _kappa(self, theta):
        return np.ones_like(theta)

    def _kappa_prime(self, theta):
        return np.zeros_like(theta)

    def kappa_infinity(self) -> float:
        return 1.0


@dataclass(frozen=True)
class FbmMovingAverage(Kernel):
    """kappa(theta) = theta^(H - 1/2)."""

    H: float = 0.75
    type_name: ClassVar[str] = "fbm_ma"
    singular_derivative_at_zero: ClassVar[bool] = True

    def __post_init__(self):
        _check_hurst(self.H, 0.0, 1.0)

    @property
    def alpha(self) -> float:
        return hurst_offset(self.H)

    def _kappa(self, theta):
        out = np.power(theta, self.alpha)
        return np.where(theta == 0.0, 0.0 if self.alpha > 0 else math.inf, out)

    def _kappa_prime(self, theta):
        return self.alpha * np.power(theta, self.alpha - 1.0)

    def kappa_infinity(self) -> float:
        return math.inf if self.alpha > 0 else 0.0

    def params(self) -> dict:
        return {"H": self.H}


@dataclass(frozen=True)
class OrnsteinUhlenbeck(Kernel):
    """kappa(theta) = kappa0 * exp(-v * theta)."""

    kappa0: float = 1.0
    v: float = 1.0
    type_name: ClassVar[str] = "ou"

    def __post_init__(self):
        if not (self.kappa0 > 0 and self.v > 0):
            raise DomainError("OrnsteinUhlenbeck needs kappa0 > 0 and v > 0")

    def _kappa(self, theta):
        return self.kappa0 * np.exp(-self.v * theta)

    def _kappa_prime(self, theta):
        return -self.v * self.kappa0 * np.exp(-self.v * theta)

    def kappa_infinity(self) -> float:
        return 0.0

    def params(self) -> dict:
        return {"kappa0": self.kappa0, "v": self.v}


@dataclass(frozen=True)
class Rogers(Kernel):
    """kappa(theta) = k * (theta^2 + v)^((H - 1/2) / 2), a semimartingale fBm proxy."""

    k: float = 1.0
    v: float = 1.0
    H: float = 0.75
    type_name: ClassVar[str] = "rogers"

    def __post_init__(self):
        if not (self.k > 0 and self.v > 0):
            raise DomainError("Rogers needs k > 0 and v > 0")
        _check_hurst(self.H, 0.0, 1.0)

    @property
    def alpha(self) -> float:
        return hurst_offset(self.H)

    def _kappa(self, theta):
        return self.k * np.power(theta * theta + self.v, self.alpha / 2.0)

    def _kappa_prime(self, theta):
        return self.k * self.alpha * theta * np.power(theta * theta + self.v, self.alpha / 2.0 - 1.0)

    def kappa_infinity(self) -> float:
        return math.inf if self.alpha > 0 else 0.0

    def params(self) -> dict:
        return {"k": self.k, "v": self.v, "H": self.H}


@dataclass(frozen=True)
class MixedBm(Kernel):
    """Brownian motion at volatility sigma mixed with fBm: sqrt(sigma^2 + theta^(2H - 1))."""

    sigma: float = 1.0
    H: float = 0.75
    type_name: ClassVar[str] = "mixed_bm"
    singular_derivative_at_zero: ClassVar[bool] = True

    def __post_init__(self):
        if self.sigma < 0:
            raise DomainError("MixedBm needs sigma >= 0")
        _check_hurst(self.H, 0.5, 1.0)

    @property
    def alpha(self) -> float:
        return hurst_offset(self.H)

    def _kappa(self, theta):
        return np.sqrt(self.sigma**2 + np.power(theta, 2.0 * self.alpha))

    def _kappa_prime(self, theta):
        p = 2.0 * self.alpha
        return 0.5 * p * np.power(theta, p - 1.0) / np.sqrt(self.sigma**2 + np.power(theta, p))

    def kappa_zero(self) -> float:
        return float(self.sigma)

    def kappa_infinity(self) -> float:
        return math.inf

    def params(self) -> dict:
        return {"sigma": self.sigma, "H": self.H}


@dataclass(frozen=True)
class Tabulated(Kernel):
    """Piecewise-linear kappa through sample points, constant beyond the table."""

    theta: tuple = ()
    values: tuple = ()
    type_name: ClassVar[str] = "tabulated"
    _theta_arr: np.ndarray = field(init=False, repr=False, compare=False)
    _values_arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        ka = np.asarray(self.values, dtype=float)
        if th.ndim != 1 or th.size < 2 or th.shape != ka.shape:
            raise DomainError("Tabulated kernel needs two equal-length columns with >= 2 rows")
        if th[0] < 0 or np.any(np.diff(th) <= 0):
            raise DomainError("Tabulated theta column must be nonnegative and strictly increasing")
        if not np.all(np.isfinite(ka)):
            raise DomainError("Tabulated kappa values must be finite")
        object.__setattr__(self, "theta", tuple(float(x) for x in th))
        object.__setattr__(self, "values", tuple(float(x) for x in ka))
        object.__setattr__(self, "_theta_arr", th)
        object.__setattr__(self, "_values_arr", ka)

    def _kappa(self, theta):
        return np.interp(theta, self._theta_arr, self._values_arr)

    def _kappa_prime(self, theta):
        h = np.maximum(1e-6, 1e-6 * theta)
        lo = np.maximum(theta - h, 0.0)
        return (self._kappa(theta + h) - self._kappa(lo)) / (theta + h - lo)

    def dt(self, t: float, s: float) -> float:
        h = max(1e-6, 1e-6 * abs(t))
        lo = max(t - h, s)
        return (self(t + h, s) - self(lo, s)) / (t + h - lo)

    def kappa_infinity(self) -> float:
        return self.values[-1]

    def is_monotone(self) -> bool:
        d = np.diff(self._values_arr)
        return bool(np.all(d >= 0) or np.all(d <= 0))

    def changes_sign(self) -> bool:
        return bool(np.any(self._values_arr > 0) and np.any(self._values_arr < 0))

    def inf_abs_kappa(self) -> float:
        if self.changes_sign():
            return 0.0
        return float(np.min(np.abs(self._values_arr)))

    def params(self) -> dict:
        return {"theta": list(self.theta), "kappa": list(self.values)}


@functools.lru_cache(maxsize=65536)
def _sottinen_value(alpha: float, t: float, s: float) -> float:
    # u = s + w^(1/alpha) absorbs the (u - s)^(alpha - 1) endpoint singularity
    upper = (t - s) ** alpha
    inv = 1.0 / alpha

    def integrand(w):
        return ((s + w**inv) / s) ** alpha

    return integrate(integrand, 0.0, upper, rel_tol=1e-11) / alpha


@dataclass(frozen=True)
class FbmSottinen(Kernel):
    """K(t, s) = int_s^t (u/s)^(H - 1/2) (u - s)^(H - 3/2) du, normalising constant 1."""

    H: float = 0.75
    type_name: ClassVar[str] = "fbm_sottinen"
    is_difference: ClassVar[bool] = False
    singular_derivative_at_zero: ClassVar[bool] = True

    def __post_init__(self):
        _check_hurst(self.H, 0.5, 1.0)

    @property
    def alpha(self) -> float:
        return hurst_offset(self.H)

    def __call__(self, t: float, s: float) -> float:
        if s >= t:
            return 0.0
        if s <= 0:
            raise DomainError("FbmSottinen kernel needs s > 0")
        return _sottinen_value(self.alpha, float(t), float(s))

    def dt(self, t: float, s: float) -> float:
        a = self.alpha
        return (t / s) ** a * (t - s) ** (a - 1.0)

    def kappa_zero(self) -> float:
        raise NonDifferenceKernel("FbmSottinen has no difference form")

    def kappa_infinity(self) -> float:
        raise NonDifferenceKernel("FbmSottinen has no difference form")

    def params(self) -> dict:
        return {"H": self.H}


# --------------------------------------------------------------------------
# Operation-level functions


def kappa_eval(spec: Kernel, theta: float) -> float:
    """kappa(theta); theta = 0 gives kappa(0+), which is ``inf`` for fBm with H < 1/2."""
    if not spec.is_difference:
        raise NonDifferenceKernel(f"{type(spec).__name__} has no difference form")
    if theta < 0:
        raise DomainError(f"theta must be nonnegative, got {theta}")
    return float(spec.kappa(theta))


def kernel_eval(spec: Kernel, t: float, s: float) -> float:
    return spec(t, s)


def kernel_dt(spec: Kernel, t: float, s: float) -> float:
    if s >= t:
        raise DomainError(f"kernel_dt needs s < t, got t={t}, s={s}")
    if spec.singular_derivative_at_zero and t - s < spec.domain_floor:
        raise SingularDerivative(f"{type(spec).__name__} derivative is singular at lag {t - s:g}")
    return spec.dt(t, s)


def total_variation(spec: Kernel, a: float, b: float = math.inf) -> float:
    """Total variation of kappa over (a, b); ``inf`` when kappa is unbounded there."""
    if not spec.is_difference:
        raise NonDifferenceKernel(f"{type(spec).__name__} has no difference form")
    if not (0 <= a < b):
        raise DomainError(f"total_variation needs 0 <= a < b, got a={a}, b={b}")
    if isinstance(spec, Tabulated):
        th = spec._theta_arr
        hi = b if math.isfinite(b) else max(th[-1], a)
        pts = np.concatenate(([a], th[(th > a) & (th < hi)], [hi]))
        return float(np.sum(np.abs(np.diff(spec.kappa(pts)))))
    ka = spec.kappa_zero() if a == 0 else float(spec.kappa(a))
    kb = spec.kappa_infinity() if math.isinf(b) else float(spec.kappa(b))
    if math.isinf(ka) or math.isinf(kb):
        return math.inf
    return abs(kb - ka)


def square_integral(spec: Kernel, t0: float, t: float) -> float:
    """int_{t0}^t K(t, s)^2 ds, i.e. Var(Z(t) - J(t))."""
    if not (t > t0 >= 0):
        raise DomainError(f"square_integral needs t > t0 >= 0, got t0={t0}, t={t}")
    if spec.is_difference:
        return integrate(lambda th: float(spec.kappa(th)) ** 2, 0.0, t - t0)
    return integrate(lambda s: spec(t, s) ** 2, t0, t)


# --------------------------------------------------------------------------
# Serialisation

KERNEL_TYPES: dict[str, type[Kernel]] = {
    cls.type_name: cls
    for cls in (BrownianConstant, FbmMovingAverage, FbmSottinen, OrnsteinUhlenbeck, Rogers, MixedBm, Tabulated)
}


def load_tabulated_csv(path) -> Tabulated:
    """Read a ``theta,kappa`` CSV; rejects non-increasing theta."""
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["theta", "kappa"]:
            raise DomainError("tabulated kernel CSV must have header 'theta,kappa'")
        rows = [(float(r["theta"]), float(r["kappa"])) for r in reader]
    if not rows:
        raise DomainError("tabulated kernel CSV has no rows")
    theta, kappa = zip(*rows)
    return Tabulated(theta=theta, values=kappa)


def kernel_to_dict(spec: Kernel) -> dict:
    return {"type": spec.type_name, **spec.params()}


def kernel_from_dict(d: dict) -> Kernel:
    d = dict(d)
    try:
        kind = d.pop("type")
    except KeyError:
        raise ConfigError("kernel spec needs a 'type'") from None
    if kind not in KERNEL_TYPES:
        raise ConfigError(f"unknown kernel type {kind!r}; choose from {sorted(KERNEL_TYPES)}")
    if kind == "tabulated":
        if "path" in d:
            return load_tabulated_csv(d["path"])
        return Tabulated(theta=tuple(d.get("theta", ())), values=tuple(d.get("kappa", ())))
    try:
        return KERNEL_TYPES[kind](**d)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for kernel {kind!r}: {exc}") from None
