"""Thin wrapper around QUADPACK's adaptive Gauss-Kronrod (QAGS) routine."""

from __future__ import annotations

import math
import warnings

from scipy.integrate import IntegrationWarning, quad

from .errors import DivergentIntegral, QuadratureFailure


def integrate(f, a: float, b: float, *, rel_tol: float = 1e-9, points=None, limit: int = 500) -> float:
    """Integrate ``f`` over ``[a, b]`` to relative tolerance ``rel_tol``.

    QAGS never evaluates the endpoints and extrapolates over integrable
    endpoint singularities, so kernels that blow up at zero lag are fine.
    """
    if a == b:
        return 0.0
    kwargs = dict(epsabs=0.0, epsrel=rel_tol * 1e-2, limit=limit)
    if points is not None:
        inner = [p for p in points if a < p < b]
        if inner:
            kwargs["points"] = inner
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, abserr = quad(f, a, b, **kwargs)
        except IntegrationWarning as exc:
            text = str(exc).lower()
            if "divergent" in text:
                raise DivergentIntegral(f"integral over [{a}, {b}] appears divergent") from exc
            raise QuadratureFailure(f"quadrature over [{a}, {b}] failed: {exc}") from exc
    if not math.isfinite(value):
        raise DivergentIntegral(f"integral over [{a}, {b}] is not finite")
    if abserr > rel_tol * abs(value) and abserr > 1e-300:
        raise QuadratureFailure(f"error estimate {abserr:g} exceeds tolerance for value {value:g}")
    return value
