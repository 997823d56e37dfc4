"""Ground truth for validating filters.

Exact ball sizes, samplers for near and far queries, and false-positive
rate measurements.  Sampling uses numpy's PCG64 generator, which is
unrelated to the Philox stream that builds the filters.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import norm

from .filter import DistSenseFilter, Mode, build_average, build_pointwise
from .hamming import (
    DimensionError,
    PointSet,
    batch_distance_to_set,
    pack_bits,
)

MAX_BALL_DIMENSION = 4096
MAX_EXHAUSTIVE_DIMENSION = 20
CONFIDENCE = 0.99


class FalseNegativeError(AssertionError):
    """A near query was answered No.  The construction forbids this."""

    def __init__(self, message: str, points: np.ndarray | None = None):
        super().__init__(message)
        self.points = points


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class BallSize:
    r: int
    d: int
    exact: int
    log2: float


def ball_size(r: int, d: int) -> BallSize:
    """Number of points within Hamming distance ``r`` of a fixed centre."""
    if not 0 <= r <= d:
        raise ValueError(f"need 0 <= r <= d, got r={r}, d={d}")
    if d > MAX_BALL_DIMENSION:
        raise ValueError(f"d={d} exceeds {MAX_BALL_DIMENSION}")
    exact = sum(math.comb(d, i) for i in range(r + 1))
    return BallSize(r, d, exact, math.log2(exact))


def union_ball_count(S: PointSet, r: int) -> int:
    """``|union of B(x, r)|`` over the members of ``S`` by breadth-first expansion.

    Intended for tiny instances (d <= 16); independent of ``batch_distance_to_set``.
    """
    members = {int("".join(map(str, row[::-1])), 2) for row in S.bits}
    seen = set(members)
    frontier = set(members)
    for _ in range(r):
        nxt = set()
        for p in frontier:
            for j in range(S.d):
                q = p ^ (1 << j)
                if q not in seen:
                    seen.add(q)
                    nxt.add(q)
        frontier = nxt
    return len(seen)


def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("Wilson interval needs at least one trial")
    z = float(norm.ppf(0.5 + confidence / 2))
    p = successes / trials
    z2n = z * z / trials
    centre = (p + z2n / 2) / (1 + z2n)
    half = z * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials)) / (1 + z2n)
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


class ReportMode(enum.Enum):
    EXHAUSTIVE_PER_SEED = "exhaustive"
    SAMPLED_AVERAGE = "sampled"
    PER_POINT_OVER_SEEDS = "per-point"


@dataclass(frozen=True)
class FprReport:
    mode: ReportMode
    trials: int
    far_count: int
    accepted: int
    near_count: int = 0
    epsilon_target: float | None = None

    def __post_init__(self):
        if self.far_count <= 0:
            raise ValueError("a report needs at least one far query")
        if not 0 <= self.accepted <= self.far_count:
            raise ValueError("accepted count out of range")

    @property
    def rate(self) -> float:
        return self.accepted / self.far_count

    @property
    def wilson_interval(self) -> tuple[float, float]:
        return wilson_interval(self.accepted, self.far_count)

    @property
    def passed(self) -> bool | None:
        """Exhaustive runs compare the exact rate, sampled runs the upper bound."""
        if self.epsilon_target is None:
            return None
        if self.mode is ReportMode.EXHAUSTIVE_PER_SEED:
            return bool(self.rate <= self.epsilon_target)
        return bool(self.wilson_interval[1] <= self.epsilon_target)

    def merge(self, other: FprReport) -> FprReport:
        if other.mode is not self.mode or other.epsilon_target != self.epsilon_target:
            raise ValueError("can only merge reports of the same kind")
        return dataclasses.replace(
            self,
            trials=self.trials + other.trials,
            far_count=self.far_count + other.far_count,
            accepted=self.accepted + other.accepted,
            near_count=self.near_count + other.near_count,
        )

    def as_dict(self) -> dict:
        lo, hi = self.wilson_interval
        return {
            "mode": self.mode.value,
            "trials": self.trials,
            "far_count": self.far_count,
            "accepted": self.accepted,
            "rate": self.rate,
            "ci_lo": lo,
            "ci_hi": hi,
            "epsilon_target": self.epsilon_target,
            "pass": None if self.passed is None else bool(self.passed),
        }

    def to_text(self) -> str:
        return "".join(f"{k}={_fmt(v)}\n" for k, v in self.as_dict().items())


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def reports_to_json(reports: Sequence[FprReport], **extra) -> str:
    return json.dumps({"reports": [r.as_dict() for r in reports], **extra}, indent=2)


def far_threshold(f: DistSenseFilter) -> float:
    """Distance beyond which a query counts as far for this filter's guarantee."""
    if f.mode is Mode.AVERAGE:
        return float(f.config.r)
    return f.config.c * f.config.r


def _flip_rows(base: np.ndarray, k: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # flip the first k[i] positions of a random permutation of each row
    count, d = base.shape
    order = np.argsort(rng.random((count, d)), axis=1)
    mask = np.zeros((count, d), dtype=np.uint8)
    chosen = np.arange(d)[None, :] < k[:, None]
    np.put_along_axis(mask, order, chosen.astype(np.uint8), axis=1)
    return base ^ mask


def sample_near_many(S: PointSet, r: int, count: int, rng: np.random.Generator) -> PointSet:
    """``count`` queries each made by flipping ``k ~ U{0..r}`` positions of a random member."""
    if not 0 <= r <= S.d:
        raise ValueError(f"need 0 <= r <= d, got r={r}")
    if S.n == 0:
        raise ValueError("cannot sample near an empty set")
    base = S.bits[rng.integers(0, S.n, size=count)]
    k = rng.integers(0, r + 1, size=count)
    Q = PointSet.from_bits(_flip_rows(base, k, rng))
    if count and batch_distance_to_set(Q, S).max() > r:
        raise AssertionError("near sampler produced a point beyond r")
    return Q


def sample_near(S: PointSet, r: int, rng: np.random.Generator):
    return sample_near_many(S, r, 1, rng)[0]


def _far_precondition(S: PointSet, threshold: float) -> None:
    radius = min(math.ceil(threshold), S.d)
    ball = ball_size(radius, S.d).exact
    if 2 * S.n * ball >= 2 ** S.d:
        raise SamplingError(
            f"far region too small for rejection sampling: n*b({radius},{S.d})/2^{S.d} >= 1/2"
        )


def sample_far_many(
    S: PointSet,
    threshold: float,
    count: int,
    rng: np.random.Generator,
    max_attempts: int | None = None,
) -> PointSet:
    """Uniform samples from ``{q : D(q, S) > threshold}`` by rejection from the cube."""
    _far_precondition(S, threshold)
    if max_attempts is None:
        max_attempts = 4 * count + 64
    kept: list[np.ndarray] = []
    have = 0
    attempts = 0
    while have < count:
        if attempts >= max_attempts:
            raise SamplingError("far region too small for rejection sampling")
        batch = min(max(2 * (count - have), 16), max_attempts - attempts)
        cand = PointSet.from_bits(rng.integers(0, 2, size=(batch, S.d), dtype=np.uint8))
        attempts += batch
        ok = batch_distance_to_set(cand, S) > threshold
        kept.append(cand.words[ok])
        have += int(ok.sum())
    words = np.concatenate(kept)[:count]
    Q = PointSet(S.d, words)
    if count and batch_distance_to_set(Q, S).min() <= threshold:
        raise AssertionError("far sampler produced a point inside the threshold")
    return Q


def sample_far(S: PointSet, r: int, c: float, rng: np.random.Generator, max_attempts: int = 10_000):
    return sample_far_many(S, c * r, 1, rng, max_attempts)[0]


def _cube_chunks(d: int, chunk: int = 1 << 14):
    cols = np.arange(d, dtype=np.int64)
    for lo in range(0, 1 << d, chunk):
        idx = np.arange(lo, min(lo + chunk, 1 << d), dtype=np.int64)
        yield ((idx[:, None] >> cols[None, :]) & 1).astype(np.uint8)


def fpr_exhaustive(f: DistSenseFilter, S: PointSet) -> FprReport:
    """Query every point of the cube; far queries feed the rate, near ones must say yes."""
    if S.d != f.d:
        raise DimensionError("point set and filter dimensions differ")
    if S.d > MAX_EXHAUSTIVE_DIMENSION:
        raise ValueError(f"exhaustive check limited to d <= {MAX_EXHAUSTIVE_DIMENSION}, got {S.d}")
    far_t = far_threshold(f)
    r = f.config.r
    near_count = far_count = accepted = 0
    for bits in _cube_chunks(S.d):
        Q = PointSet(S.d, pack_bits(bits))
        dist = batch_distance_to_set(Q, S)
        yes, _, _ = f.query_many(bits)
        near = dist <= r
        far = dist > far_t
        if (near & ~yes).any():
            raise FalseNegativeError("near point answered No", bits[near & ~yes])
        near_count += int(near.sum())
        far_count += int(far.sum())
        accepted += int((yes & far).sum())
    return FprReport(ReportMode.EXHAUSTIVE_PER_SEED, 1 << S.d, far_count, accepted,
                     near_count, f.eps)


def _rebuild(S: PointSet, r: int, c: float, eps: float, seed: int, mode: Mode) -> DistSenseFilter:
    if mode is Mode.AVERAGE:
        return build_average(S, r, eps, seed)
    return build_pointwise(S, r, c, eps, seed)


def fpr_per_point(
    S: PointSet,
    r: int,
    c: float,
    eps: float,
    far_points: PointSet,
    seeds: int | Iterable[int],
    mode: Mode = Mode.POINT_WISE,
) -> list[FprReport]:
    """Acceptance frequency of each fixed far point over independently seeded rebuilds.

    ``seeds`` is either a count (seeds ``0 .. seeds-1``) or explicit seed values.
    """
    seed_list = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    if not seed_list:
        raise ValueError("need at least one seed")
    if far_points.d != S.d:
        raise DimensionError("far points and set dimensions differ")
    threshold = float(r) if mode is Mode.AVERAGE else c * r
    dist = batch_distance_to_set(far_points, S)
    if (dist <= threshold).any():
        bad = np.flatnonzero(dist <= threshold).tolist()
        raise ValueError(f"points {bad} are not far (distance <= {threshold})")
    hits = np.zeros(far_points.n, dtype=np.int64)
    for seed in seed_list:
        f = _rebuild(S, r, c, eps, seed, mode)
        yes, _, _ = f.query_many(far_points)
        hits += yes
    return [
        FprReport(ReportMode.PER_POINT_OVER_SEEDS, len(seed_list), len(seed_list), int(h),
                  epsilon_target=eps)
        for h in hits
    ]


def fpr_sampled_average(
    f: DistSenseFilter,
    S: PointSet,
    trials: int,
    rng: np.random.Generator,
    r_eff: float | None = None,
) -> FprReport:
    """Rate of Yes answers over uniform samples from ``{D(q,S) > r_eff}``.

    ``r_eff`` defaults to ``r`` for average filters and ``c*r`` otherwise.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if S.d != f.d:
        raise DimensionError("point set and filter dimensions differ")
    threshold = far_threshold(f) if r_eff is None else float(r_eff)
    Q = sample_far_many(S, threshold, trials, rng)
    yes, _, _ = f.query_many(Q)
    return FprReport(ReportMode.SAMPLED_AVERAGE, trials, trials, int(yes.sum()),
                     epsilon_target=f.eps)
