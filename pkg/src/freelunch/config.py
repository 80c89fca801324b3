"""JSON experiment configuration for the command-line driver.

A config names a kernel, an innovation law, grid parameters, drift and past
selectors, a price map, the cost scale ``lambda`` and a seed. Missing keys are
filled with defaults, so the resolved form round-trips through JSON unchanged.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

from .errors import ConfigError, FreeLunchError
from .innovation import InnovationLaw, law_from_dict
from .kernel import Kernel, kernel_from_dict
from .lattice import GridSpec, MarketSpec, PriceMap, snap_floor

__all__ = ["ExperimentConfig", "load_config", "function_from_dict", "canonical_json", "config_hash"]

_DEFAULTS: dict[str, Any] = {
    "law": {"type": "rademacher"},
    "drift": {"type": "zero"},
    "past": {"type": "zero"},
    "price_map": {"type": "identity"},
    "lambda": 0.0,
    "seed": 0,
    "options": {},
}
_TOP_KEYS = {"kernel", "grid", *_DEFAULTS}
_GRID_KEYS = {"n", "t0", "T", "steps"}


class _Constant:
    def __init__(self, value: float):
        self.value = value

    def __call__(self, t: float) -> float:
        return self.value


class _Linear:
    def __init__(self, intercept: float, slope: float):
        self.intercept, self.slope = intercept, slope

    def __call__(self, t: float) -> float:
        return self.intercept + self.slope * t


def function_from_dict(d: dict) -> Callable[[float], float]:
    """Drift or past selector: ``zero``, ``constant`` (value) or ``linear`` (intercept, slope)."""
    kind = d.get("type")
    try:
        if kind == "zero":
            return _Constant(0.0)
        if kind == "constant":
            return _Constant(float(d["value"]))
        if kind == "linear":
            return _Linear(float(d.get("intercept", 0.0)), float(d["slope"]))
    except KeyError as exc:
        raise ConfigError(f"function spec {d!r} is missing {exc}") from None
    raise ConfigError(f"unknown function type {kind!r}; choose zero, constant or linear")


def _price_map_from(d) -> PriceMap:
    if isinstance(d, str):
        d = {"type": d}
    kind = d.get("type")
    if kind == "custom":
        return PriceMap("custom", tuple(d.get("x", ())), tuple(d.get("y", ())))
    return PriceMap(kind)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(resolved: dict) -> str:
    return hashlib.sha256(canonical_json(resolved).encode()).hexdigest()


@dataclass
class ExperimentConfig:
    """Resolved configuration plus the objects built from it."""

    raw: dict
    kernel: Kernel
    law: InnovationLaw
    drift: Callable[[float], float]
    past: Callable[[float], float]
    price_map: PriceMap
    lam: float
    seed: int
    n_list: list
    t0: float
    T: Optional[float]
    steps: Optional[int]
    options: dict
    base_dir: Optional[Path] = None

    @classmethod
    def from_dict(cls, d: dict, base_dir: Optional[Path] = None) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kernel" not in d or "grid" not in d:
            raise ConfigError("config needs 'kernel' and 'grid'")
        raw = copy.deepcopy(_DEFAULTS)
        raw.update(copy.deepcopy(d))
        grid = raw["grid"]
        if not isinstance(grid, dict) or "n" not in grid or "t0" not in grid:
            raise ConfigError("grid needs 'n' and 't0'")
        if set(grid) - _GRID_KEYS:
            raise ConfigError(f"unknown grid keys: {sorted(set(grid) - _GRID_KEYS)}")
        kspec = dict(raw["kernel"])
        if kspec.get("type") == "tabulated" and "path" in kspec and base_dir is not None:
            kspec["path"] = str((base_dir / kspec["path"]).resolve())
        try:
            n_raw = grid["n"]
            n_list = [int(n) for n in (n_raw if isinstance(n_raw, list) else [n_raw])]
            if not n_list or any(n < 1 for n in n_list):
                raise ConfigError("grid n must be positive")
            seed = int(raw["seed"])
            if not 0 <= seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            cfg = cls(
                raw=raw,
                kernel=kernel_from_dict(kspec),
                law=law_from_dict(raw["law"]),
                drift=function_from_dict(raw["drift"]),
                past=function_from_dict(raw["past"]),
                price_map=_price_map_from(raw["price_map"]),
                lam=float(raw["lambda"]),
                seed=seed,
                n_list=n_list,
                t0=float(grid["t0"]),
                T=None if grid.get("T") is None else float(grid["T"]),
                steps=None if grid.get("steps") is None else int(grid["steps"]),
                options=dict(raw["options"]),
                base_dir=base_dir,
            )
            if cfg.T is None and cfg.steps is None:
                raise ConfigError("grid needs 'T' or 'steps'")
            cfg.grid(n_list[0])
            cfg.market()
        except ConfigError:
            raise
        except (FreeLunchError, TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(str(exc)) from None
        return cfg

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        if seed is None:
            return self
        d = copy.deepcopy(self.raw)
        d["seed"] = seed
        return ExperimentConfig.from_dict(d, base_dir=self.base_dir)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    def grid(self, n: int) -> GridSpec:
        return GridSpec(n, self.t0, self.T)

    def j_max(self, n: int) -> int:
        """Last buy step: ``j0 + steps``, or the last step whose sale falls within T."""
        g = self.grid(n)
        if self.steps is not None:
            return g.j0 + self.steps
        return g.j0 + snap_floor(n * (self.T - self.t0)) - 1

    def market(self) -> MarketSpec:
        return MarketSpec(
            kernel=self.kernel,
            law=self.law,
            drift=self.drift,
            past=self.past,
            price_map=self.price_map,
            lam=self.lam,
        )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return ExperimentConfig.from_dict(data, base_dir=path.parent)
