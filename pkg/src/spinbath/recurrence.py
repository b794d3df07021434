"""Exact recurrence times of |r(t)|^2 for rational couplings.

A coupling g = p/q makes f_i periodic with period pi*q/p. |r(t)|^2 returns to 1
exactly when every factor does, i.e. when t/pi is a common multiple of all the
q_i/p_i. For lowest-terms fractions the least such multiple is

    lcm(q_1, ..., q_N) / gcd(p_1, ..., p_N).

The product of the denominators, prod(q_i), is also reported: it is always a
common multiple (so pi*prod(q_i) is a recurrence time) but rarely the least one.
All arithmetic uses Python integers, which are unbounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

EQUAL = "equal-couplings"
INTEGER_MULTIPLES = "integer-multiples"
GENERIC = "generic-rational"
CASE_LABELS = (EQUAL, INTEGER_MULTIPLES, GENERIC)

DEFAULT_MAX_DENOMINATOR = 10**6


class RecurrenceError(ValueError):
    pass


@dataclass(frozen=True)
class RationalCoupling:
    """Coupling p/q, reduced to lowest terms on construction."""

    p: int
    q: int

    def __post_init__(self):
        p, q = self.p, self.q
        if isinstance(p, bool) or isinstance(q, bool) or int(p) != p or int(q) != q:
            raise RecurrenceError(f"p and q must be integers, got {p!r}/{q!r}")
        p, q = int(p), int(q)
        if p < 1 or q < 1:
            raise RecurrenceError(f"p and q must be positive, got {p}/{q}")
        d = math.gcd(p, q)
        object.__setattr__(self, "p", p // d)
        object.__setattr__(self, "q", q // d)

    @classmethod
    def from_fraction(cls, x: Fraction) -> "RationalCoupling":
        return cls(x.numerator, x.denominator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __float__(self) -> float:
        return self.p / self.q

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class RecurrenceReport:
    case_label: str
    exact_time_over_pi: Fraction
    product_bound_over_pi: int
    per_particle_times: tuple[Fraction, ...]

    @property
    def exact_time(self) -> float:
        """t_P as a float; inf when it exceeds the double range."""
        try:
            return math.pi * float(self.exact_time_over_pi)
        except OverflowError:
            return math.inf

    @property
    def log10_bound(self) -> float:
        return math.log10(self.product_bound_over_pi)

    @property
    def log10_exact(self) -> float:
        x = self.exact_time_over_pi
        return math.log10(x.numerator) - math.log10(x.denominator)

    def witnesses(self) -> list[int]:
        """n_i = exact time / per-particle time, each a positive integer."""
        out = []
        for t_i in self.per_particle_times:
            n = self.exact_time_over_pi / t_i
            assert n.denominator == 1
            out.append(n.numerator)
        return out

    def to_dict(self) -> dict:
        x = self.exact_time_over_pi
        return {
            "case": self.case_label,
            "n_particles": len(self.per_particle_times),
            "exact_time_over_pi": f"{x.numerator}/{x.denominator}",
            "exact_time": self.exact_time,
            "log10_exact_time_over_pi": self.log10_exact,
            "product_bound_over_pi": str(self.product_bound_over_pi),
            "log10_product_bound_over_pi": self.log10_bound,
            "bound_is_tight": Fraction(self.product_bound_over_pi) == x,
            "per_particle_times_over_pi": [
                f"{t.numerator}/{t.denominator}" for t in self.per_particle_times
            ],
        }


def _require(couplings: Sequence[RationalCoupling]):
    if len(couplings) == 0:
        raise RecurrenceError("coupling list is empty")


def per_particle_recurrence(g: RationalCoupling) -> Fraction:
    """t_i / pi = q/p, the first return of f_i to 1."""
    return Fraction(g.q, g.p)


def classify_case(couplings: Sequence[RationalCoupling]) -> str:
    _require(couplings)
    values = [c.value for c in couplings]
    g_min = min(values)
    if all(v == g_min for v in values):
        return EQUAL
    if all((v / g_min).denominator == 1 for v in values):
        return INTEGER_MULTIPLES
    return GENERIC


def exact_recurrence(couplings: Sequence[RationalCoupling]) -> RecurrenceReport:
    _require(couplings)
    lcm_q = reduce(math.lcm, (c.q for c in couplings))
    gcd_p = reduce(math.gcd, (c.p for c in couplings))
    bound = math.prod(c.q for c in couplings)
    return RecurrenceReport(
        case_label=classify_case(couplings),
        exact_time_over_pi=Fraction(lcm_q, gcd_p),
        product_bound_over_pi=bound,
        per_particle_times=tuple(per_particle_recurrence(c) for c in couplings),
    )


def rationalize(g: float, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> RationalCoupling:
    """Closest positive fraction to ``g`` with denominator at most ``max_denominator``."""
    if not (isinstance(g, (int, float)) and math.isfinite(g) and g > 0):
        raise RecurrenceError(f"coupling must be positive and finite, got {g!r}")
    if int(max_denominator) != max_denominator or max_denominator < 1:
        raise RecurrenceError(f"max_denominator must be a positive integer, got {max_denominator!r}")
    x = Fraction(g).limit_denominator(int(max_denominator))
    if x <= 0:
        # 1/max_denominator is the closest fraction with p >= 1
        x = Fraction(1, int(max_denominator))
    return RationalCoupling.from_fraction(x)


def rationalize_all(couplings: Iterable[float], max_denominator: int = DEFAULT_MAX_DENOMINATOR):
    return [rationalize(float(g), max_denominator) for g in couplings]


def bound_log_samples(denominator_ceiling: int, n_particles: int, seed: int,
                      draws: int = 100, mean: float = 0.5, half_width: float = 0.1) -> np.ndarray:
    """ln(prod q_i) for ``draws`` independent batches of random couplings.

    Each batch draws ``n_particles`` couplings uniformly on
    [mean - half_width, mean + half_width] and rationalizes them with
    ``denominator_ceiling`` as the maximal denominator.
    """
    if int(denominator_ceiling) != denominator_ceiling or denominator_ceiling < 2:
        raise RecurrenceError("denominator_ceiling must be an integer >= 2")
    if int(n_particles) != n_particles or n_particles < 1:
        raise RecurrenceError("n_particles must be a positive integer")
    if draws < 1:
        raise RecurrenceError("draws must be positive")
    if not mean - half_width > 0 or half_width < 0:
        raise RecurrenceError("coupling interval must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    out = np.empty(draws)
    for k in range(draws):
        g = rng.uniform(mean - half_width, mean + half_width, size=int(n_particles))
        qs = [rationalize(float(x), denominator_ceiling).q for x in g]
        # sum of logs; the product itself is exact but only its size matters here
        out[k] = sum(math.log(q) for q in qs)
    return out


def bound_growth_estimate(denominator_ceiling: int, n_particles: int, seed: int, **kwargs) -> float:
    """Sample mean of ln(prod q_i): grows linearly in N, i.e. the bound grows exponentially."""
    return float(np.mean(bound_log_samples(denominator_ceiling, n_particles, seed, **kwargs)))
