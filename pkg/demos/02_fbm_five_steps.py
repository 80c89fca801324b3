# The five-step arbitrage under a moving-average fBm kernel with H = 0.95.
from freelunch import (
    FbmMovingAverage,
    GridSpec,
    MarketSpec,
    brute_force_oracle,
    decompose,
    lambda_bar,
    law_rademacher,
    search_arbitrage,
    single_period_return,
)

market = MarketSpec(kernel=FbmMovingAverage(H=0.95), law=law_rademacher())
grid = GridSpec(n=1, t0=0.5)

# one-period return = x + y . history + z_coeff * innovation - lambda
dec = decompose(market, grid, grid.j0 + 4)
print("history weights:", dec.y_coeffs)
print("innovation weight:", dec.z_coeff)

# worst-case return after the best history, step by step
for h in range(7):
    print(f"buy at j0+{h}: lambda_bar = {lambda_bar(market, grid, grid.j0 + h):+.6f}")

cert = search_arbitrage(market, grid, j_max=grid.j0 + 50)
print(cert.verdict.value, "sell at j0 +", cert.sell_step - grid.j0, "lambda_bar =", cert.lambda_bar)
print("closed form 5^0.45 - 2 =", 5**0.45 - 2)

# exhaustive check over all 2^4 histories
orc = brute_force_oracle(market, grid, cert.j_star)
print("oracle:", orc.max_worstcase_return, "on history", orc.history)

# whatever the last innovation, the trade after four up-moves makes money
for z in (-1.0, 1.0):
    print(f"innovation {z:+}: return {single_period_return(market, grid, cert.j_star, cert.witness, z):+.6f}")
