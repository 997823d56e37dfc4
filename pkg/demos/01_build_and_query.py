"""Build a point-wise filter over random 64-bit vectors and ask it questions.

Members and anything within distance r must come back "yes".  Far vectors
(distance > c*r from every member) should mostly come back "no".
"""
import numpy as np

from dsfilter import PointSet, build_pointwise
from dsfilter.hamming import batch_distance_to_set
from dsfilter.oracle import sample_far_many, sample_near_many

rng = np.random.default_rng(0)
S = PointSet.random(8, 64, rng)
f = build_pointwise(S, r=2, c=2, eps=2**-6, seed=7)

cfg = f.config
print(f"regime={cfg.regime.name} m={cfg.m} psi={cfg.psi} per-signature eps={cfg.eps:.2e}")

# A member is always at gap 0
ans = f.query(S[0])
print("member:", ans.decision, "gap", ans.best_gap)

near = sample_near_many(S, 2, 1000, rng)
yes, _, _ = f.query_many(near)
print(f"near queries answered yes: {yes.sum()}/{near.n}")

far = sample_far_many(S, 4, 1000, rng)
print("closest far query is at distance", batch_distance_to_set(far, S).min())
yes, gaps, _ = f.query_many(far)
print(f"far queries answered yes: {yes.sum()}/{far.n}, smallest gap {gaps.min()}")
