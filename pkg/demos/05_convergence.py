# The discretised noise approaches its continuous limit: covariances and Monte Carlo.
from freelunch import (
    BrownianConstant,
    FbmMovingAverage,
    GridSpec,
    MarketSpec,
    OrnsteinUhlenbeck,
    convergence_table,
    law_rademacher,
    mc_moment_check,
)

R = law_rademacher()
ns = [4, 8, 16, 32, 64, 128, 256]

for kern in (OrnsteinUhlenbeck(kappa0=1.0, v=1.0), FbmMovingAverage(H=0.75)):
    rep = convergence_table(kern, R, t0=1.0, pairs=[(1.5, 2.0)], n_list=ns)
    print(kern.type_name, "limit", rep.rows[0][4])
    for n, t, T, disc, lim, err in rep.rows:
        print(f"  n={n:<4} discrete={disc:.8f}  error={err:.2e}")
    print("  log-log slope:", rep.slopes[(1.5, 2.0)])
print(rep.note)

# empirical variance of Z(t0 + 1) against the exact discrete sum
for kern in (BrownianConstant(), OrnsteinUhlenbeck(kappa0=1.0, v=1.0), FbmMovingAverage(H=0.45)):
    c = mc_moment_check(MarketSpec(kern, R), GridSpec(16, 1.0), 2.0, num_paths=100_000, seed=12345)
    print(f"{kern.type_name:<10} var {c.variance:.5f} vs {c.analytic_variance:.5f}  z = {c.z_variance:+.2f}")
