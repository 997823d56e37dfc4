"""What a signature is, and how the gap tracks Hamming distance.

sigma(x) = floor(smod(M x, c_mod) / c_div) for a sparse random +-1 matrix M.
Flipping bits of x moves the gap between signatures roughly in proportion.
"""
import numpy as np

from dsfilter import HammingVector
from dsfilter.signature import derive_params, gap, sketch, signature, smod

print("smod(a, 5) for a in -6..6:", [smod(a, 5) for a in range(-6, 7)])

cfg = derive_params(d=256, r=4, c=3, eps=1e-3)
print(f"m={cfg.m}, entries in {cfg.entry_range}, psi={cfg.psi}")

rng = np.random.default_rng(1)
x = HammingVector.random(256, rng)
seed = 2024
print("first sketch entries:", sketch(x, cfg, seed)[:8])
sx = signature(x, cfg, seed)

for k in (0, 1, 2, 4, 8, 12, 24, 48):
    y = x.flip(rng.choice(256, k, replace=False)) if k else x
    g = gap(sx, signature(y, cfg, seed), cfg)
    print(f"distance {k:3d}: gap {g.gamma:6.0f}  {'near' if g.is_near else 'far'}")

# Large c switches to the other parameter regime
big = derive_params(d=65536, r=6000, c=600, eps=2**-3)
print(f"large-c: m={big.m} c_mod={big.c_mod} c_div={big.c_div:.5f} delta={big.delta} psi={big.psi}")
