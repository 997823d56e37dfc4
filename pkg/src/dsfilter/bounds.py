"""Numeric evaluation of the space lower bounds for distance-sensitive filters.

The asymptotic statements hide constants; the values here use the explicit
constants that fall out of the encoding arguments (``n log2(1/(2 eps))`` and
``n (2 r^2/d + 1) log2(e)``) and are labelled as such in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .filter import Hypothesis, average_hypotheses
from .oracle import ball_size

LOG2E = math.log2(math.e)
DEFAULT_DELTA_PRIME = 4
CONSTANTS_LABEL = "proof-constant evaluation"


def _check_common(n: int, d: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0, 1), got {eps}")


def _far_radius(c: float, r: int, d: int) -> int:
    return min(math.ceil(c * r), d)


def lb_zero_error(n: int, d: int, c: float, r: int) -> float:
    """Bits needed with no errors at all: ``n (d - log2(e n) - log2 b(cr, d))``."""
    _check_common(n, d)
    if r < 0 or c < 1:
        raise ValueError(f"need r >= 0 and c >= 1, got r={r}, c={c}")
    if c * r > d:
        raise ValueError(f"need c*r <= d, got c*r={c * r}, d={d}")
    ball = ball_size(math.ceil(c * r), d)
    return max(0.0, n * (d - math.log2(math.e * n) - ball.log2))


def lb_average(n: int, d: int, r: int, eps: float) -> float:
    """Average-error bound: the larger of the two encoding-argument terms."""
    _check_common(n, d)
    _check_eps(eps)
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    error_term = n * math.log2(1.0 / (2.0 * eps))
    geometry_term = n * (2.0 * r * r / d + 1.0) * LOG2E
    return max(0.0, error_term, geometry_term)


@dataclass(frozen=True)
class PointwiseBound:
    bits: float
    branch: str  # "reduced-dimension" or "full-dimension"
    d_evaluated: int


def reduced_dimension_holds(n: int, d: int, r: int, c: float, eps: float,
                            delta_prime: float = DEFAULT_DELTA_PRIME) -> tuple[bool, int]:
    """Whether ``n b(cr, d') / 2^d' < eps < 1/4`` at ``d' = ceil(delta' c r) <= d``."""
    d_red = math.ceil(delta_prime * c * r)
    if d_red > d or d_red < 1:
        return False, d_red
    ball = ball_size(_far_radius(c, r, d_red), d_red).exact
    holds = n * ball < Fraction(eps) * 2 ** d_red and eps < 0.25
    return holds, d_red


def lb_pointwise(n: int, d: int, r: int, c: float, eps: float,
                 delta_prime: float = DEFAULT_DELTA_PRIME) -> PointwiseBound:
    """Point-wise bound via dimension reduction, falling back to the average bound."""
    _check_common(n, d)
    _check_eps(eps)
    if r < 1 or c < 1:
        raise ValueError(f"need r >= 1 and c >= 1, got r={r}, c={c}")
    holds, d_red = reduced_dimension_holds(n, d, r, c, eps, delta_prime)
    if holds:
        return PointwiseBound(lb_average(n, d_red, r, eps), "reduced-dimension", d_red)
    return PointwiseBound(lb_average(n, d, r, eps), "full-dimension", d)


def lb_small_c(n: int, c: float, eps: float) -> float:
    """``n/(c-1) * log2(1/eps)`` for ``1 < c <= 2`` and ``eps <= (c-1)/n``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 < c <= 2:
        raise ValueError(f"small-c bound needs 1 < c <= 2, got c={c}")
    _check_eps(eps)
    if eps > (c - 1) / n:
        raise ValueError(f"small-c bound needs eps <= (c-1)/n = {(c - 1) / n}")
    return max(0.0, n / (c - 1) * math.log2(1.0 / eps))


def _small_c_dimension_rhs(r: int, c: float, eps: float) -> float:
    k = r * (c - 1)
    try:
        return ((c - 1) / eps) ** (6.0 / k) + k ** 3
    except (OverflowError, ZeroDivisionError):
        return math.inf


def check_hypotheses(n: int, d: int, r: int, c: float, eps: float,
                     delta_prime: float = DEFAULT_DELTA_PRIME) -> list[Hypothesis]:
    """Evaluate the side conditions of every bound; nothing is enforced."""
    _check_common(n, d)
    _check_eps(eps)
    radius = _far_radius(c, r, d)
    ball = ball_size(radius, d)
    n_ball_log2 = math.log2(n) + ball.log2
    hyps = [
        Hypothesis("n*b(cr,d)/2^d < eps", n * ball.exact < Fraction(eps) * 2 ** d,
                   n_ball_log2 - d, math.log2(eps), log2=True),
        Hypothesis("eps < 1/4", eps < 0.25, eps, 0.25),
        Hypothesis("n*b(cr,d) <= 2^(d-2)", n * ball.exact <= 2 ** (d - 2),
                   n_ball_log2, d - 2.0, log2=True),
    ]
    holds, d_red = reduced_dimension_holds(n, d, r, c, eps, delta_prime)
    if d_red <= d:
        red_ball = ball_size(_far_radius(c, r, d_red), d_red)
        lhs = math.log2(n) + red_ball.log2 - d_red
    else:
        lhs = math.inf
    hyps.append(Hypothesis(f"n*b(cr,d')/2^d' < eps < 1/4 with d'={d_red}, d' <= d", holds,
                           lhs, math.log2(eps), log2=True))
    hyps.extend(average_hypotheses(n, d, r, eps))
    small_c = 1 < c <= 2
    hyps.append(Hypothesis("1 < c <= 2", small_c, c, 2.0))
    hyps.append(Hypothesis("eps <= (c-1)/n", eps <= (c - 1) / n, eps, (c - 1) / n))
    if small_c and r >= 1:
        rhs = _small_c_dimension_rhs(r, c, eps)
        hyps.append(Hypothesis("d(c-1) >= ((c-1)/eps)^(6/(r(c-1))) + (r(c-1))^3",
                               d * (c - 1) >= rhs, d * (c - 1), rhs))
    return hyps


@dataclass
class BoundReport:
    n: int
    d: int
    r: int
    c: float
    eps: float
    zero_error_bits: float | None
    average_lb_bits: float
    pointwise_lb: PointwiseBound
    small_c_lb_bits: float | None
    hypotheses: list[Hypothesis] = field(default_factory=list)
    achieved_bits: float | None = None
    label: str = CONSTANTS_LABEL

    @property
    def pointwise_lb_bits(self) -> float:
        return self.pointwise_lb.bits

    def rows(self) -> list[tuple[str, object]]:
        out: list[tuple[str, object]] = [
            ("constants", self.label),
            ("zero_error_bits", "not applicable" if self.zero_error_bits is None
             else self.zero_error_bits),
            ("average_lb_bits", self.average_lb_bits),
            ("pointwise_lb_bits", self.pointwise_lb.bits),
            ("pointwise_branch", self.pointwise_lb.branch),
            ("pointwise_d_evaluated", self.pointwise_lb.d_evaluated),
            ("small_c_lb_bits", "not applicable" if self.small_c_lb_bits is None
             else self.small_c_lb_bits),
        ]
        if self.achieved_bits is not None:
            out.append(("achieved_bits", self.achieved_bits))
        return out

    def as_dict(self) -> dict:
        return {
            "n": self.n, "d": self.d, "r": self.r, "c": self.c, "eps": self.eps,
            **{k: v for k, v in self.rows()},
            "hypotheses": [
                {"condition": h.text, "satisfied": h.satisfied, "lhs": h.lhs,
                 "rhs": h.rhs, "log2": h.log2}
                for h in self.hypotheses
            ],
        }


def bound_report(n: int, d: int, r: int, c: float, eps: float,
                 delta_prime: float = DEFAULT_DELTA_PRIME,
                 achieved_bits: float | None = None) -> BoundReport:
    zero = lb_zero_error(n, d, c, r) if c * r <= d else None
    try:
        small = lb_small_c(n, c, eps)
    except ValueError:
        small = None
    return BoundReport(
        n, d, r, c, eps,
        zero_error_bits=zero,
        average_lb_bits=lb_average(n, d, r, eps),
        pointwise_lb=lb_pointwise(n, d, r, c, eps, delta_prime),
        small_c_lb_bits=small,
        hypotheses=check_hypotheses(n, d, r, c, eps, delta_prime),
        achieved_bits=achieved_bits,
    )
