"""Positive measures and the exact doubling constant of a measure."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, EmptyAnnulus, NonPositiveWeight, SinglePointSpace
from .metric import FiniteMetricSpace, Scalar, ball, is_exact_value, to_fraction

_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Measure:
    """Point masses aligned with a space's point order.

    Integers, ``Fraction`` and ``"p/q"`` strings are kept exact; floats are
    kept as floats.  Weights need not sum to one.
    """

    weights: tuple

    def __post_init__(self):
        ws = tuple(_coerce_weight(w) for w in self.weights)
        if not ws:
            raise NonPositiveWeight("a measure needs at least one weight")
        for i, w in enumerate(ws):
            if not w > 0:
                raise NonPositiveWeight(f"weight of point {i} is {w}; every point needs positive mass")
        object.__setattr__(self, "weights", ws)

    @classmethod
    def counting(cls, n: int) -> "Measure":
        return cls((Fraction(1),) * n)

    @classmethod
    def uniform(cls, n: int) -> "Measure":
        return cls((Fraction(1, n),) * n)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total(self):
        return sum(self.weights)

    def normalized(self) -> "Measure":
        total = self.total
        return Measure(tuple(w / total for w in self.weights))

    def scaled(self, factor) -> "Measure":
        return Measure(tuple(w * factor for w in self.weights))


def _coerce_weight(w):
    if isinstance(w, bool):
        raise NonPositiveWeight(f"invalid weight {w!r}")
    if isinstance(w, (float, np.floating)):
        w = float(w)
        if not math.isfinite(w):
            raise NonPositiveWeight(f"non-finite weight {w!r}")
        return w
    if is_exact_value(w) or isinstance(w, Fraction):
        try:
            return to_fraction(w)
        except DomainError:
            raise NonPositiveWeight(f"invalid weight {w!r}") from None
    raise NonPositiveWeight(f"invalid weight {w!r}")


@dataclass(frozen=True)
class Witness:
    center: int
    radius: Scalar
    numerator_members: tuple[int, ...]
    denominator_members: tuple[int, ...]


@dataclass(frozen=True)
class CmuReport:
    value: Scalar
    witnesses: tuple[Witness, ...]
    normalized_measure: Measure


@dataclass(frozen=True)
class RatioProfile:
    center: int
    entries: tuple[tuple[Scalar, Scalar], ...]


def weight_vector(space: FiniteMetricSpace, measure: Measure) -> np.ndarray:
    """Weights in the space's arithmetic: integers over a common denominator
    (exact mode; the denominator cancels in every ratio) or ``float64``."""
    if measure.n != space.n:
        raise DomainError(f"measure has {measure.n} weights for a space of {space.n} points")
    if not space.exact:
        return np.array([float(w) for w in measure.weights], dtype=np.float64)
    fracs = [to_fraction(w) for w in measure.weights]
    den = 1
    for f in fracs:
        den = math.lcm(den, f.denominator)
    ints = [f.numerator * (den // f.denominator) for f in fracs]
    if max(ints) * space.n < 2**62:
        return np.array(ints, dtype=np.int64)
    return np.array(ints, dtype=object)


def _ratio(space: FiniteMetricSpace, num, den) -> Scalar:
    if space.exact:
        return Fraction(int(num), int(den))
    return float(num) / float(den)


def center_table(space: FiniteMetricSpace, vec: np.ndarray, center: int):
    """Ball masses at every critical radius of one center.

    Returns ``(keys, mass2, mass1, count2, count1)`` where ``mass1`` is
    ``mu(B(x, r))`` and ``mass2`` is ``mu(B(x, 2r))`` for ``r`` the radius of
    each key, and the counts give the ball sizes in the sorted order.
    """
    order, sorted_keys = space.sorted_row(center)
    prefix = np.concatenate([np.zeros(1, dtype=vec.dtype), np.cumsum(vec[order])])
    keys = space.critical_keys(center)
    count1 = np.searchsorted(sorted_keys, keys, side="left")
    count2 = np.searchsorted(sorted_keys, keys * 2, side="left")
    return keys, prefix[count2], prefix[count1], count2, count1


def cmu(space: FiniteMetricSpace, measure: Measure) -> CmuReport:
    """Exact doubling constant of ``measure``: the largest ball ratio
    ``mu(B(x,2r)) / mu(B(x,r))`` over all centers and critical radii."""
    if space.n < 2:
        raise SinglePointSpace("the doubling constant needs at least two points")
    vec = weight_vector(space, measure)
    tables = [center_table(space, vec, c) for c in range(space.n)]
    approx = [t[1].astype(np.float64) / t[2].astype(np.float64) for t in tables]
    top = max(float(a.max()) for a in approx)
    cutoff = top * (1 - _TIE_RTOL)

    candidates = []
    for c, (table, a) in enumerate(zip(tables, approx)):
        for idx in np.flatnonzero(a >= cutoff):
            candidates.append((c, int(idx), _ratio(space, table[1][idx], table[2][idx])))
    best = max(v for _, _, v in candidates)
    if not space.exact:
        winners = [x for x in candidates if x[2] >= best * (1 - 1e-12)]
    else:
        winners = [x for x in candidates if x[2] == best]

    witnesses = []
    for c, idx, _ in winners:
        keys, _, _, count2, count1 = tables[c]
        order, _ = space.sorted_row(c)
        witnesses.append(
            Witness(
                center=c,
                radius=space.key_to_radius(keys[idx]),
                numerator_members=tuple(sorted(int(i) for i in order[: count2[idx]])),
                denominator_members=tuple(sorted(int(i) for i in order[: count1[idx]])),
            )
        )
    witnesses.sort(key=lambda w: (w.center, w.radius))
    return CmuReport(best, tuple(witnesses), measure.normalized())


def ratio_profile(space: FiniteMetricSpace, measure: Measure, center) -> RatioProfile:
    if space.n < 2:
        raise SinglePointSpace("ratio profiles need at least two points")
    c = space.index(center)
    keys, mass2, mass1, _, _ = center_table(space, weight_vector(space, measure), c)
    entries = tuple(
        (space.key_to_radius(k), _ratio(space, m2, m1)) for k, m2, m1 in zip(keys, mass2, mass1)
    )
    return RatioProfile(c, entries)


def ball_mass(measure: Measure, members: Sequence[int]):
    return sum((measure.weights[i] for i in members), start=0 * measure.weights[0])


def ball_ratio(space: FiniteMetricSpace, measure: Measure, center, radius) -> Scalar:
    """``mu(B(center, 2 radius)) / mu(B(center, radius))`` evaluated directly."""
    r = to_fraction(radius)
    num = ball_mass(measure, ball(space, center, 2 * r).members)
    den = ball_mass(measure, ball(space, center, r).members)
    return num / den


def boost_measure(space: FiniteMetricSpace, measure: Measure, center, radius, n: int) -> Measure:
    """Multiply the weights on the annulus ``B(x,2r) \\ B(x,r)`` by ``n``.

    For large ``n`` the ratio at ``(center, radius)`` grows like
    ``1 + n * mu(annulus) / mu(B(x, r))``, so no upper bound on the doubling
    constant of a measure exists.
    """
    if n < 1 or int(n) != n:
        raise DomainError(f"boost factor must be a positive integer, got {n}")
    if measure.n != space.n:
        raise DomainError(f"measure has {measure.n} weights for a space of {space.n} points")
    r = to_fraction(radius) if space.exact else radius
    inner = set(ball(space, center, r).members)
    outer = ball(space, center, 2 * r).members
    annulus = [y for y in outer if y not in inner]
    if not annulus:
        raise EmptyAnnulus(f"B({center},{2 * r}) \\ B({center},{r}) is empty")
    boosted = list(measure.weights)
    for y in annulus:
        boosted[y] = boosted[y] * int(n)
    return Measure(tuple(boosted))
