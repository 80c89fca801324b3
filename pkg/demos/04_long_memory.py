# Long memory gives arbitrage: Rogers' kernel, a Brownian/fBm mixture, and step counts.
from freelunch import (
    FbmMovingAverage,
    GridSpec,
    MarketSpec,
    MixedBm,
    Rogers,
    law_rademacher,
    min_arbitrage_steps_fbm,
    search_arbitrage,
)

R = law_rademacher()

for kern in (Rogers(k=1.0, v=1.0, H=0.75), MixedBm(sigma=1.0, H=0.75)):
    for n in (1, 4, 16):
        grid = GridSpec(n, 0.5)
        cert = search_arbitrage(MarketSpec(kern, R, lam=0.01), grid, grid.j0 + 400)
        where = f"sell at j0+{cert.sell_step - grid.j0}" if cert.found else "-"
        print(f"{kern.type_name:<9} n={n:<3} {cert.verdict.value:<22} {where}  lambda_bar={cert.lambda_bar}")

# fewest steps for the pure fBm kernel at n = 1, cross-checked by the scan
for H in (0.6, 0.75, 0.85, 0.95):
    steps = min_arbitrage_steps_fbm(H)
    grid = GridSpec(1, 0.5)
    cert = search_arbitrage(MarketSpec(FbmMovingAverage(H=H), R), grid, grid.j0 + 2 * steps)
    print(f"H={H}: formula {steps}, scan {cert.sell_step - grid.j0} ({cert.verdict.value}),"
          f" strict needs {min_arbitrage_steps_fbm(H, point_mass=False)}")
