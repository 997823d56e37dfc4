"""Compare achieved space against the space lower bounds."""
from dsfilter import build_pointwise, PointSet
from dsfilter.bounds import bound_report, lb_average, lb_pointwise, lb_small_c, lb_zero_error
import numpy as np

print("zero-error, n=16 d=64 cr=4:", lb_zero_error(16, 64, 1, 4))
print("average, n=16 d=64 r=8 eps=2^-10:", lb_average(16, 64, 8, 2**-10))
print("point-wise, n=4 d=1024 r=32 c=2:", lb_pointwise(4, 1024, 32, 2, 2**-10))
print("small c, n=16 c=1.5:", lb_small_c(16, 1.5, 2**-10))

n, d, r, c, eps = 100, 1024, 8, 2, 2**-6
f = build_pointwise(PointSet.random(n, d, np.random.default_rng(0)), r, c, eps, seed=1)
rep = bound_report(n, d, r, c, eps, achieved_bits=f.bits_per_element)
for key, value in rep.rows():
    print(f"{key:>32}: {value}")
