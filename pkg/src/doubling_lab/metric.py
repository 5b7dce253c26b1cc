"""Finite metric spaces, open balls and critical radii.

Distances are stored densely.  In exact mode every distance is a rational
``num / den`` with a single shared denominator, so ball membership reduces
to integer comparisons; in floating mode the matrix holds ``float64``.

Internally both modes work with *keys*: ``key = 2 * num`` in exact mode and
``key = d`` in floating mode.  A radius ``r`` corresponds to the key
``r * unit`` where ``unit = 2 * den`` (exact) or ``1`` (float), so every
critical radius ``d`` or ``d / 2`` has an integral key in exact mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    AsymmetricMatrix,
    DomainError,
    NegativeOrZeroOffDiagonal,
    NonFiniteDistance,
    NonzeroDiagonal,
    NotSquare,
    SinglePointSpace,
    TriangleViolation,
)

Scalar = Union[Fraction, float]

FLOAT_TOL = 1e-12
_INT64_SAFE = 2**60


def to_fraction(value) -> Fraction:
    """Exact rational value of ``value``; floats convert by their binary value."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise NonFiniteDistance(f"non-finite value {value!r}")
        return Fraction(float(value))
    if isinstance(value, (np.integer,)):
        return Fraction(int(value))
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, an integer or a decimal literal exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational literal: {text!r}") from exc


def is_exact_value(value) -> bool:
    return isinstance(value, (int, Rational, np.integer, str)) and not isinstance(value, bool)


def ceil_log2(q) -> int:
    """Smallest integer ``n`` with ``q <= 2**n``, for rational ``q > 0``."""
    q = to_fraction(q)
    if q <= 0:
        raise DomainError(f"ceil_log2 needs a positive argument, got {q}")
    a, b = q.numerator, q.denominator
    n = a.bit_length() - b.bit_length()

    def fits(k: int) -> bool:
        return a <= (b << k) if k >= 0 else (a << -k) <= b

    while not fits(n):
        n += 1
    while fits(n - 1):
        n -= 1
    return n


def ceil_log2_ratio(r, s) -> int:
    """Smallest integer ``n`` with ``r <= 2**n * s`` (the exponent of the doubling chain).

    Computed by integer doubling on the exact rational values; floats are
    taken at their binary value, never passed through ``math.log2``.
    """
    r, s = to_fraction(r), to_fraction(s)
    if s <= 0 or s >= r:
        raise DomainError(f"ceil_log2_ratio requires 0 < s < r, got r={r}, s={s}")
    return ceil_log2(r / s)


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    points: tuple[str, ...]
    exact: bool
    _key: np.ndarray = field(repr=False)
    _unit: int = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "float"

    def __len__(self) -> int:
        return self.n

    def index(self, label) -> int:
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            if not 0 <= label < self.n:
                raise IndexError(f"point index {label} out of range for {self.n} points")
            return int(label)
        lookup = self._cache.get("labels")
        if lookup is None:
            lookup = {p: i for i, p in enumerate(self.points)}
            self._cache["labels"] = lookup
        try:
            return lookup[str(label)]
        except KeyError:
            raise IndexError(f"unknown point label {label!r}") from None

    def distance(self, i, j) -> Scalar:
        i, j = self.index(i), self.index(j)
        return self.key_to_radius(self._key[i, j])

    def distance_matrix(self) -> list[list[Scalar]]:
        return [[self.key_to_radius(k) for k in row] for row in self._key]

    def key_to_radius(self, key) -> Scalar:
        if self.exact:
            return Fraction(int(key), self._unit)
        return float(key)

    def radius_to_key(self, radius) -> Scalar:
        if self.exact:
            return to_fraction(radius) * self._unit
        return float(radius)

    def open_threshold(self, radius):
        """Threshold ``t`` with ``key < t`` exactly iff ``d < radius``."""
        if self.exact:
            return self._clip(math.ceil(to_fraction(radius) * self._unit))
        return float(radius)

    def closed_threshold(self, radius):
        """Threshold ``t`` with ``key < t`` exactly iff ``d <= radius``."""
        if self.exact:
            return self._clip(math.floor(to_fraction(radius) * self._unit) + 1)
        return float(np.nextafter(float(radius), np.inf))

    def _clip(self, value: int) -> int:
        if self._key.dtype == object:
            return value
        # thresholds beyond every stored int64 key behave identically
        return max(min(value, _INT64_SAFE), -_INT64_SAFE)

    def sorted_row(self, center: int) -> tuple[np.ndarray, np.ndarray]:
        """Point order by distance from ``center`` and the matching sorted keys."""
        cache = self._cache.setdefault("sorted", {})
        hit = cache.get(center)
        if hit is None:
            row = self._key[center]
            order = np.argsort(row, kind="stable")
            hit = (order, row[order])
            cache[center] = hit
        return hit

    def critical_keys(self, center: int) -> np.ndarray:
        cache = self._cache.setdefault("critical", {})
        hit = cache.get(center)
        if hit is None:
            row = self._key[center]
            dists = row[row > 0]
            halves = dists // 2 if self.exact else dists / 2
            hit = np.unique(np.concatenate([dists, halves]))
            cache[center] = hit
        return hit

    def submatrix_keys(self, indices: Sequence[int]) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.intp)
        if len(idx) == self.n and np.array_equal(idx, np.arange(self.n)):
            return self._key
        return self._key[np.ix_(idx, idx)]


@dataclass(frozen=True)
class Ball:
    center: int
    radius: Scalar
    members: tuple[int, ...]

    def __contains__(self, item) -> bool:
        return item in self.members


@dataclass(frozen=True)
class CriticalRadiusSet:
    center: int
    radii: tuple[Scalar, ...]


def _labels(points: Iterable | None, n: int) -> tuple[str, ...]:
    if points is None:
        return tuple(str(i) for i in range(n))
    labels = tuple(str(p) for p in points)
    if len(labels) != n:
        raise NotSquare(f"{len(labels)} labels for a {n}x{n} matrix")
    if len(set(labels)) != n:
        raise NotSquare("point labels must be unique")
    return labels


def _integer_matrix(values: np.ndarray) -> np.ndarray:
    big = max((abs(int(v)) for v in values.flat), default=0)
    if 4 * big < _INT64_SAFE:
        return values.astype(np.int64)
    return values.astype(object)


def from_keys(points, keys: np.ndarray, *, exact: bool, unit: int = 1, validate: bool = True) -> FiniteMetricSpace:
    """Build a space from a key matrix.  Used by trusted generators."""
    keys = np.asarray(keys)
    n = keys.shape[0]
    if keys.ndim != 2 or keys.shape[1] != n:
        raise NotSquare(f"distance matrix must be square, got shape {keys.shape}")
    if n < 1:
        raise NotSquare("a metric space needs at least one point")
    if exact and keys.dtype != object:
        keys = keys.astype(np.int64)
    if not exact:
        keys = keys.astype(np.float64)
    space = FiniteMetricSpace(_labels(points, n), exact, keys, unit if exact else 1)
    if validate:
        _check_invariants(space)
    return space


def validate_metric(dist, points=None, *, exact: bool | None = None) -> FiniteMetricSpace:
    """Validate a square distance matrix and return the metric space it defines.

    ``exact=None`` selects exact mode when every entry is an integer, a
    ``Fraction`` or a rational string (``"p/q"``); any float entry selects
    floating mode.  ``exact=True`` converts floats by their decimal text.
    """
    rows = [list(row) for row in dist]
    n = len(rows)
    if n == 0 or any(len(row) != n for row in rows):
        raise NotSquare("distance matrix must be square and non-empty")
    if exact is None:
        exact = all(is_exact_value(v) for row in rows for v in row)
    if exact:
        fracs = [[_exact_entry(v) for v in row] for row in rows]
        den = 1
        for row in fracs:
            for v in row:
                den = math.lcm(den, v.denominator)
        nums = np.empty((n, n), dtype=object)
        for i, row in enumerate(fracs):
            for j, v in enumerate(row):
                nums[i, j] = 2 * v.numerator * (den // v.denominator)
        keys = _integer_matrix(nums)
        space = FiniteMetricSpace(_labels(points, n), True, keys, 2 * den)
    else:
        try:
            keys = np.array([[float(v) if not isinstance(v, str) else float(parse_rational(v)) for v in row] for row in rows])
        except (TypeError, ValueError) as exc:
            raise NonFiniteDistance(str(exc)) from exc
        space = FiniteMetricSpace(_labels(points, n), False, keys, 1)
    _check_invariants(space)
    if not space.exact:
        # tolerance-level asymmetry and diagonal noise are removed once accepted
        k = space._key
        sym = (k + k.T) / 2
        np.fill_diagonal(sym, 0.0)
        object.__setattr__(space, "_key", sym)
    return space


def _exact_entry(value) -> Fraction:
    if isinstance(value, float):
        if not math.isfinite(value):
            raise NonFiniteDistance(f"non-finite distance {value!r}")
        return Fraction(repr(value))
    return to_fraction(value)


def _check_invariants(space: FiniteMetricSpace) -> None:
    k = space._key
    n = space.n
    if space.exact:
        tol = 0
    else:
        if not np.all(np.isfinite(k)):
            raise NonFiniteDistance("distances must be finite")
        tol = FLOAT_TOL * max(1.0, float(np.max(np.abs(k))))
    diag = np.diagonal(k)
    bad = np.flatnonzero(np.abs(diag) > tol) if not space.exact else np.flatnonzero(diag != 0)
    if len(bad):
        i = int(bad[0])
        raise NonzeroDiagonal(f"d({i},{i}) = {space.key_to_radius(k[i, i])} is not zero")
    asym = np.abs(k - k.T) > tol if not space.exact else (k != k.T)
    if np.any(asym):
        i, j = map(int, np.argwhere(asym)[0])
        raise AsymmetricMatrix(f"d({i},{j}) != d({j},{i})")
    off = ~np.eye(n, dtype=bool)
    nonpos = off & (k <= 0)
    if np.any(nonpos):
        i, j = map(int, np.argwhere(nonpos)[0])
        raise NegativeOrZeroOffDiagonal(f"d({i},{j}) = {space.key_to_radius(k[i, j])} must be positive")
    for j in range(n):
        via = k[:, j][:, None] + k[j, :][None, :]
        viol = k > via + tol if not space.exact else k > via
        if np.any(viol):
            i, kk = map(int, np.argwhere(viol)[0])
            raise TriangleViolation((i, j, kk))


def _as_scalar(space: FiniteMetricSpace, value) -> Scalar:
    return to_fraction(value) if space.exact else float(to_fraction(value))


def ball(space: FiniteMetricSpace, center, radius) -> Ball:
    """Open ball ``{y : d(center, y) < radius}``."""
    c = space.index(center)
    if to_fraction(radius) <= 0:
        raise DomainError(f"radius must be positive, got {radius}")
    members = np.flatnonzero(space._key[c] < space.open_threshold(radius))
    return Ball(c, _as_scalar(space, radius), tuple(int(m) for m in members))


def closed_ball(space: FiniteMetricSpace, center, radius) -> Ball:
    """Closed ball ``{y : d(center, y) <= radius}`` by non-strict comparison."""
    c = space.index(center)
    if to_fraction(radius) < 0:
        raise DomainError(f"radius must be non-negative, got {radius}")
    members = np.flatnonzero(space._key[c] < space.closed_threshold(radius))
    return Ball(c, _as_scalar(space, radius), tuple(int(m) for m in members))


def critical_radii(space: FiniteMetricSpace, center) -> CriticalRadiusSet:
    """Breakpoints where ``B(center, r)`` or ``B(center, 2r)`` changes.

    Both balls are constant on every half-open gap ``(e_k, e_{k+1}]``, so the
    ball ratio attains its supremum at one of these radii.
    """
    if space.n < 2:
        raise SinglePointSpace("critical radii need at least two points")
    c = space.index(center)
    return CriticalRadiusSet(c, tuple(space.key_to_radius(k) for k in space.critical_keys(c)))
