# An exponential price map keeps the five-step arbitrage alive under proportional costs.
import numpy as np

from freelunch import (
    EXPONENTIAL,
    FbmMovingAverage,
    GridSpec,
    MarketSpec,
    full_model_outcomes,
    law_rademacher,
    search_arbitrage,
    transaction_cost_bound,
)

grid = GridSpec(1, 0.5)
simple = MarketSpec(FbmMovingAverage(H=0.95), law_rademacher())
cert = search_arbitrage(simple, grid, grid.j0 + 50)
c = cert.lambda_bar

bound = transaction_cost_bound(EXPONENTIAL, zeta_star=0.0, c=c, Lambda_star=1.0, Lambda_upper=0.0)
print("margin c =", c, " safe lambda up to", bound)

full = MarketSpec(FbmMovingAverage(H=0.95), law_rademacher(), price_map=EXPONENTIAL, lam=0.9 * bound)
out = full_model_outcomes(full, grid, cert.j_star, event_history=cert.witness)
print("outcomes on the event:", out.returns[out.on_event])
print("all nonnegative:", bool(np.all(out.returns[out.on_event] >= 0)))
print("worst outcome off the event:", out.returns[~out.on_event].min())
