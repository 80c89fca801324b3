# Built-in kernels: values, derivatives, variation and variance of the noise.
import math

from freelunch import (
    BrownianConstant,
    FbmMovingAverage,
    FbmSottinen,
    MixedBm,
    OrnsteinUhlenbeck,
    Rogers,
    kappa_eval,
    kernel_dt,
    kernel_eval,
    square_integral,
    total_variation,
)

kernels = [
    BrownianConstant(),
    FbmMovingAverage(H=0.75),
    FbmMovingAverage(H=0.3),
    OrnsteinUhlenbeck(kappa0=1.0, v=1.0),
    Rogers(k=1.0, v=1.0, H=0.75),
    MixedBm(sigma=1.0, H=0.75),
]

# kappa on a few lags; kappa(0) is the right limit (inf for H < 1/2)
lags = (0.0, 0.25, 1.0, 4.0)
print(f"{'kernel':<12}" + "".join(f"{th:>10}" for th in lags))
for k in kernels:
    print(f"{k.type_name:<12}" + "".join(f"{kappa_eval(k, th):>10.4f}" for th in lags))

# total variation of kappa on (0, inf): finite for OU, infinite for long memory
for k in kernels:
    print(k.type_name, k.params(), "TV =", total_variation(k, 0.0))

# Var(Z(t) - J(t)) = int_{t0}^t K(t,s)^2 ds
print("fbm H=0.75 on [0,1]:", square_integral(FbmMovingAverage(H=0.75), 0.0, 1.0), "(exact 2/3)")
print("OU kappa0=2 on [0,1]:", square_integral(OrnsteinUhlenbeck(kappa0=2.0, v=1.0), 0.0, 1.0),
      "(exact", 2 * (1 - math.exp(-2)), ")")

# the Sottinen kernel is not a difference kernel; K(t, s) comes from quadrature
sott = FbmSottinen(H=0.75)
print("Sottinen K(1.5, 1) =", kernel_eval(sott, 1.5, 1.0))
print("Sottinen dK/dt(1.5, 1) =", kernel_dt(sott, 1.5, 1.0))
