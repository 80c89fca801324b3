# Ornstein-Uhlenbeck noise: no arbitrage, but a free lunch with vanishing risk.
import math

from freelunch import GridSpec, MarketSpec, OrnsteinUhlenbeck, check_theorem_L, flvr_scan, law_rademacher, search_arbitrage
from freelunch.lunch import lambda_bar_scan

ou = OrnsteinUhlenbeck(kappa0=1.0, v=1.0)
market = MarketSpec(kernel=ou, law=law_rademacher())
grid = GridSpec(n=4, t0=0.5)

# lambda_bar = -kappa((h+1)/n)/sqrt(n): always negative, creeping up to zero
lbs = lambda_bar_scan(market, grid, grid.j0 + 200)
print("lambda_bar at h = 0, 10, 50, 200:", lbs[[0, 10, 50, 200]])
print("closed form at h = 200:", -math.exp(-201 / 4) / 2)
print("arbitrage verdict:", search_arbitrage(market, grid, grid.j0 + 200).verdict.value)

# the variation condition fails exactly at equality
rec = check_theorem_L(ou, law_rademacher(), [1, 2, 4, 8, 16])
print("TV =", rec.total_variation, "bound =", rec.variation_bound, "->", rec.conclusion)

# downside / expected return on the best-history event
rep = flvr_scan(market, grid, grid.j0 + 200, delta_targets=(0.5, 0.1, 0.02))
for e in rep.entries[:6]:
    print(f"j={e.j}: ratio {e.ratio:+.5f}, expected return {e.expected_return:.5f}")
print("first step meeting each delta:", rep.targets)
