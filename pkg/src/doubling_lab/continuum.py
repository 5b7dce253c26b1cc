"""Closed-form checks on the real line and on R^n.

Everything here evaluates a formula directly; nothing is discretized or
sampled.  Decimal floats passed as parameters are read by their shortest
decimal representation (``0.99`` means ``99/100``) wherever a floor or
ceiling is involved, so integer parts do not flip on binary round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, InvalidAlpha
from .metric import Scalar, ceil_log2, parse_rational, to_fraction

LP_EXPONENTS = ("1", "2", "inf")


@dataclass(frozen=True)
class AlphaMeasureQuery:
    """Interval ``(center - radius, center + radius)`` under ``|x|**alpha dx``."""

    alpha: float
    center: float
    radius: float

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.radius > 0:
            raise DomainError(f"radius must be positive, got {self.radius}")

    def mass(self) -> float:
        return mu_alpha_mass(self.alpha, self.center - self.radius, self.center + self.radius)

    def doubling_ratio(self) -> float:
        doubled = AlphaMeasureQuery(self.alpha, self.center, 2 * self.radius)
        return doubled.mass() / self.mass()


def _decimal(value) -> Fraction:
    if isinstance(value, float):
        return parse_rational(repr(value))
    return to_fraction(value)


def _check_alpha(alpha) -> float:
    a = float(alpha)
    if not math.isfinite(a) or a <= -1:
        raise InvalidAlpha(f"alpha must be a finite number > -1, got {alpha}")
    return a


def _antiderivative(alpha: float, x: float) -> float:
    p = alpha + 1
    return math.copysign(abs(x) ** p, x) / p


def mu_alpha_mass(alpha, a, b) -> float:
    """``int_a^b |x|**alpha dx``.  The antiderivative ``sign(x)|x|**(alpha+1)/(alpha+1)``
    is continuous through 0, so intervals straddling the origin need no
    separate treatment."""
    alpha = _check_alpha(alpha)
    a, b = float(a), float(b)
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    return _antiderivative(alpha, b) - _antiderivative(alpha, a)


def mu_alpha_ratios(alpha) -> tuple[float, float]:
    """Ball ratios at center 0 (radius 1) and at center 2 (radius 1)."""
    alpha = _check_alpha(alpha)
    at_origin = AlphaMeasureQuery(alpha, 0.0, 1.0).doubling_ratio()
    off_origin = AlphaMeasureQuery(alpha, 2.0, 1.0).doubling_ratio()
    return at_origin, off_origin


def mu_alpha_lower_bound(alpha) -> float:
    """``max(2**(alpha+1), 4**(alpha+1) / (3**(alpha+1) - 1))``, taken from
    the two ball ratios and checked against the closed forms."""
    alpha = _check_alpha(alpha)
    at_origin, off_origin = mu_alpha_ratios(alpha)
    p = alpha + 1
    closed = (2.0**p, 4.0**p / (3.0**p - 1))
    for direct, formula in zip((at_origin, off_origin), closed):
        if not math.isclose(direct, formula, rel_tol=1e-9):
            raise ArithmeticError(f"ball ratio {direct} disagrees with closed form {formula}")
    return max(at_origin, off_origin)


def lebesgue_ratio(n: int, p="inf") -> int:
    """``vol B_p(x, 2r) / vol B_p(x, r)``: every l^p ball in R^n is a
    dilate of the unit ball, so the ratio is ``2**n`` for every ``r``."""
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n}")
    if str(p).lower() not in LP_EXPONENTS + ("infinity",):
        raise DomainError(f"p must be one of 1, 2, inf; got {p!r}")
    return 2 ** int(n)


def _packing_args(n, k, c) -> tuple[int, int, Fraction]:
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n}")
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    c = _decimal(c)
    if not 0 < c <= 1:
        raise DomainError(f"packing constant must lie in (0, 1], got {c}")
    return int(n), int(k), c


def packing_lower_bound(n, k, c_p=1) -> float:
    """``k**(n / ceil(log2(2k / c_p)))``: ``k**n`` disjoint balls of radius
    ``c_p / k`` inside the unit ball, fed through the separated-balls
    inequality with its exact integer exponent."""
    n, k, c = _packing_args(n, k, c_p)
    e = ceil_log2(2 * k / c)
    return float(k) ** (n / e)


def packing_lower_bound_smooth(n, k, c_p=1) -> float:
    """``k**(n / (1 + log2(2k / c_p)))``: the same bound with the exponent
    relaxed to its upper estimate; smaller, but monotone in ``k``."""
    n, k, c = _packing_args(n, k, c_p)
    return float(k) ** (n / (1 + math.log2(2 * k / float(c))))


def d2_disjoint_count(r) -> int:
    """Number of disjoint radius-1/2 balls of ``d/(1+d)`` inside a radius-``r`` ball."""
    r = _decimal(r)
    if not Fraction(1, 2) < r < 1:
        raise DomainError(f"r must lie in (1/2, 1), got {r}")
    return math.floor(r / (1 - r))


def d2_divergence(r) -> Scalar:
    """``floor(r/(1-r)) ** (1 / ceil(2 + log2 r))`` for ``1/2 < r < 1``."""
    count = d2_disjoint_count(r)
    e = ceil_log2(4 * _decimal(r))
    value = float(count) ** (1.0 / e)
    root = round(value)
    return Fraction(root) if root**e == count else value


__all__ = [
    "AlphaMeasureQuery",
    "d2_disjoint_count",
    "d2_divergence",
    "lebesgue_ratio",
    "mu_alpha_lower_bound",
    "mu_alpha_mass",
    "mu_alpha_ratios",
    "packing_lower_bound",
    "packing_lower_bound_smooth",
]
