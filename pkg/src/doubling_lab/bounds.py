"""Lower bounds on doubling constants, each with a replayable certificate.

Every certifier recomputes the balls its inequality chain relies on (so a
certificate is checked, not assumed) and returns a ``BoundCertificate``
whose ``witness`` is enough to run the check again through
``replay_certificate``.  Bounds marked ``"all measures"`` bound the least
constant of the space; ``"given measure"`` bounds bound one ``C_mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DomainError,
    DuplicatePoints,
    SearchBudgetExceeded,
    SinglePointSpace,
    WitnessInvalid,
)
from .measures import Measure, weight_vector
from .metric import FiniteMetricSpace, Scalar, ball, ceil_log2, to_fraction

ALL_MEASURES = "all measures"
GIVEN_MEASURE = "given measure"

KINDS = (
    "separated_balls",
    "golden_ratio",
    "disjoint_pair",
    "theta_configuration",
    "spread",
    "equilateral",
    "envelope",
    "intersection_ratio",
)

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2
ROOT_TOL = 1e-12
CLIQUE_BUDGET = 10**6
THETA_BUDGET = 10**5
ENVELOPE_READING = (
    "phi1(r) = min_x mu(B(x,r)) over open balls; phi2(r) = max_x mu of the closed "
    "ball of radius r, the right-continuous majorant of the open-ball maximum"
)

# size limits for the exploratory searches run by all_certificates
_SCAN_MAX_N = 64
_SPREAD_SCAN_MAX_N = 400
_THETA_MAX_M = 8


@dataclass(frozen=True)
class BoundCertificate:
    kind: str
    value: Scalar
    witness: dict
    applies_to: str
    replay: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ThetaConfiguration:
    """Center ``points[0]`` and ``ceil(theta m)`` satellites ``points[1:]``."""

    m: int
    r: Scalar
    theta: Fraction
    points: tuple[int, ...]

    @property
    def satellites(self) -> tuple[int, ...]:
        return self.points[1:]


# ---------------------------------------------------------------------------
# helpers


def _root_value(base: int, k: int) -> Scalar:
    """``base ** (1/k)``; exact when ``base`` is a perfect ``k``-th power."""
    if k <= 0 or base == 1:
        return Fraction(1)
    guess = round(base ** (1.0 / k))
    for cand in (guess - 1, guess, guess + 1):
        if cand > 0 and cand**k == base:
            return Fraction(cand)
    return float(base) ** (1.0 / k)


def _half_plus_sqrt(m: int) -> Scalar:
    """``(1 + sqrt(m)) / 2``; exact when ``m`` is a perfect square."""
    s = math.isqrt(m)
    if s * s == m:
        return Fraction(1 + s, 2)
    return (1 + math.sqrt(m)) / 2


def _members(space: FiniteMetricSpace, center, radius) -> set[int]:
    return set(ball(space, center, radius).members)


def _distinct(space: FiniteMetricSpace, points: Sequence) -> tuple[int, ...]:
    idx = tuple(space.index(p) for p in points)
    if len(set(idx)) != len(idx):
        raise DuplicatePoints(f"repeated points in {list(points)}")
    return idx


def _close(a, b) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return math.isclose(float(a), float(b), rel_tol=1e-12, abs_tol=1e-12)


# ---------------------------------------------------------------------------
# separated balls


def separated_balls_bound(space: FiniteMetricSpace, center, r, s, disjoint_centers: Sequence) -> BoundCertificate:
    """``N`` disjoint balls ``B(y_j, s)`` inside ``B(center, r)`` force
    ``N <= C_mu ** ceil(log2(2r/s))`` for every measure."""
    c = space.index(center)
    r, s = to_fraction(r), to_fraction(s)
    if not 0 < s <= 2 * r:
        raise WitnessInvalid(f"need 0 < s <= 2r, got r={r}, s={s}")
    ys = _distinct(space, disjoint_centers)
    if not ys:
        raise WitnessInvalid("no disjoint centers given")
    outer = _members(space, c, r)
    seen: set[int] = set()
    small = {}
    for y in ys:
        b = _members(space, y, s)
        if not b <= outer:
            raise WitnessInvalid(f"B({y},{s}) is not inside B({c},{r})")
        if b & seen:
            raise WitnessInvalid(f"B({y},{s}) meets another chosen ball")
        seen |= b
        small[y] = sorted(b)
    k = ceil_log2(2 * r / s)
    value = _root_value(len(ys), k)
    return BoundCertificate(
        kind="separated_balls",
        value=value,
        witness={"center": c, "r": _radius(space, r), "s": _radius(space, s), "centers": list(ys)},
        applies_to=ALL_MEASURES,
        replay={"N": len(ys), "exponent": k, "outer_ball": sorted(outer), "inner_balls": small},
    )


def _radius(space: FiniteMetricSpace, value: Fraction) -> Scalar:
    return value if space.exact else float(value)


def find_separated_balls(space: FiniteMetricSpace, center, r, s) -> list[int]:
    """Greedy packing of disjoint balls ``B(y, s)`` inside ``B(center, r)``,
    farthest candidates first."""
    c = space.index(center)
    keys = space._key
    inside = keys[c] < space.open_threshold(r)
    small = keys < space.open_threshold(s)
    fits = ~(small & ~inside[None, :]).any(axis=1)
    candidates = [int(y) for y in np.flatnonzero(fits)]
    candidates.sort(key=lambda y: (-keys[c, y], y))
    used = np.zeros(space.n, dtype=bool)
    chosen = []
    for y in candidates:
        if not (small[y] & used).any():
            chosen.append(y)
            used |= small[y]
    return chosen


def best_separated_balls(space: FiniteMetricSpace) -> BoundCertificate | None:
    """Scan centers and radius pairs; keep the strongest greedy packing."""
    if space.n < 2:
        return None
    keys = space._key
    dvals = sorted({space.key_to_radius(k) for k in np.unique(keys) if k > 0})
    best, best_val = None, 1.0
    for c in range(space.n):
        row = sorted({space.key_to_radius(k) for k in np.unique(keys[c])})
        radii = set(row[1:])
        radii.update((a + b) / 2 for a, b in zip(row[1:], row[2:]))
        for r in sorted(radii):
            for s in dvals:
                if to_fraction(s) > 2 * to_fraction(r):
                    break
                ys = find_separated_balls(space, c, r, s)
                if len(ys) < 2:
                    continue
                k = ceil_log2(2 * to_fraction(r) / to_fraction(s))
                est = len(ys) ** (1.0 / k) if k > 0 else 1.0
                if est > best_val + 1e-15:
                    best_val, best = est, (c, r, s, ys)
    if best is None:
        return None
    return separated_balls_bound(space, *best)


# ---------------------------------------------------------------------------
# golden ratio, disjoint pair, intersection ratio


def golden_ratio_bound(space: FiniteMetricSpace, pair: Sequence | None = None) -> BoundCertificate:
    """Balls of radii r/3, 2r/3, 4r/3 around any two points give
    ``C_mu >= sup_l min(l, 1 + 1/l) = phi`` for every measure."""
    if space.n < 2:
        raise SinglePointSpace("the golden ratio bound needs two points")
    x, y = _distinct(space, pair if pair is not None else (0, 1))
    r = to_fraction(space.distance(x, y))
    checks = {}
    for a, b in ((x, y), (y, x)):
        big, small, outer = _members(space, a, 2 * r / 3), _members(space, b, r / 3), _members(space, a, 4 * r / 3)
        if big & small:
            raise WitnessInvalid(f"B({a},2r/3) meets B({b},r/3)")
        if not (big | small) <= outer:
            raise WitnessInvalid(f"B({a},2r/3) u B({b},r/3) is not inside B({a},4r/3)")
        checks[f"{a}->{b}"] = {"B(a,2r/3)": sorted(big), "B(b,r/3)": sorted(small), "B(a,4r/3)": sorted(outer)}
    return BoundCertificate(
        kind="golden_ratio",
        value=GOLDEN_RATIO,
        witness={"pair": [x, y], "r": _radius(space, r)},
        applies_to=ALL_MEASURES,
        replay=checks,
    )


def disjoint_pair_bound(space: FiniteMetricSpace, pair: Sequence | None = None) -> BoundCertificate | None:
    """A pair with ``B(x,d(x,y))`` and ``B(y,d(x,y))`` disjoint forces ``C_mu >= 2``.

    Without ``pair`` the closest pairs are tried first (their balls are
    singletons, so a finite space always has one)."""
    if space.n < 2:
        raise SinglePointSpace("the disjoint pair bound needs two points")
    if pair is not None:
        candidates = [_distinct(space, pair)]
    else:
        iu = np.triu_indices(space.n, 1)
        order = np.argsort(space._key[iu], kind="stable")
        candidates = ((int(iu[0][k]), int(iu[1][k])) for k in order)
    for x, y in candidates:
        r = space.distance(x, y)
        bx, by = _members(space, x, r), _members(space, y, r)
        if not bx & by:
            return BoundCertificate(
                kind="disjoint_pair",
                value=Fraction(2) if space.exact else 2.0,
                witness={"pair": [x, y], "r": r},
                applies_to=ALL_MEASURES,
                replay={"B(x,r)": sorted(bx), "B(y,r)": sorted(by)},
            )
        if pair is not None:
            raise WitnessInvalid(f"B({x},{r}) and B({y},{r}) intersect")
    return None


def _pair_epsilon(space: FiniteMetricSpace, vec: np.ndarray, x: int, y: int):
    keys = space._key
    r = space.key_to_radius(keys[x, y])
    t1 = space.open_threshold(r)
    t2 = space.open_threshold(2 * to_fraction(r)) if space.exact else 2 * r
    small = (keys[x] < t1) & (keys[y] < t1)
    big = (keys[x] < t2) & (keys[y] < t2)
    num, den = vec[small].sum(), vec[big].sum()
    eps = Fraction(int(num), int(den)) if space.exact else float(num) / float(den)
    return r, eps, small, big


def intersection_ratio_bound(space: FiniteMetricSpace, measure: Measure, pair: Sequence | None = None) -> BoundCertificate:
    """``C_mu >= 2 / (1 + eps)`` where ``eps`` is the measure of
    ``B(x,r) n B(y,r)`` relative to ``B(x,2r) n B(y,2r)`` at ``r = d(x,y)``;
    the pair minimizing ``eps`` is reported unless one is given."""
    if space.n < 2:
        raise SinglePointSpace("the intersection ratio bound needs two points")
    vec = weight_vector(space, measure)
    if pair is not None:
        pairs = [_distinct(space, pair)]
    else:
        pairs = [(i, j) for i in range(space.n) for j in range(i + 1, space.n)]
    best = None
    for x, y in pairs:
        r, eps, small, big = _pair_epsilon(space, vec, x, y)
        if best is None or eps < best[3]:
            best = (x, y, r, eps, small, big)
    x, y, r, eps, small, big = best
    return BoundCertificate(
        kind="intersection_ratio",
        value=2 / (1 + eps),
        witness={"pair": [x, y], "r": r},
        applies_to=GIVEN_MEASURE,
        replay={
            "epsilon": eps,
            "small_intersection": [int(i) for i in np.flatnonzero(small)],
            "large_intersection": [int(i) for i in np.flatnonzero(big)],
        },
    )


# ---------------------------------------------------------------------------
# theta configurations


def _theta_count(m: int, theta) -> int:
    return math.ceil(to_fraction(theta) * m)


def _check_theta_args(m, theta) -> Fraction:
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    theta = to_fraction(theta)
    if not 0 < theta <= 1:
        raise DomainError(f"theta must lie in (0, 1], got {theta}")
    return theta


def find_theta_configuration(space: FiniteMetricSpace, m: int, theta=1, budget: int = THETA_BUDGET) -> ThetaConfiguration | None:
    """Exhaustive search for an ``(m, r, theta)``-configuration.

    For a fixed center the admissible radii of one satellite at distance
    ``t`` form ``[t 2m/(4m-1), t 2m/(2m+1)]``.  Shrinking ``r`` only relaxes
    the separation ``r/m``, so it suffices to try the left endpoints
    ``r = t 2m/(4m-1)``; satellites are then picked by depth-first search
    with ``budget`` nodes in total.
    """
    theta = _check_theta_args(m, theta)
    need = _theta_count(m, theta)
    keys = space._key
    nodes = 0
    for x0 in range(space.n):
        row = keys[x0]
        for t in np.unique(row[row > 0]):
            # (4m-1) d(x0,y) >= (2m+1) t,  d(x0,y) <= t,  (4m-1) d(y,y') >= 2 t
            window = [int(y) for y in np.flatnonzero(((4 * m - 1) * row >= (2 * m + 1) * t) & (row <= t))]
            if len(window) < need:
                continue
            sep = (4 * m - 1) * keys[np.ix_(window, window)] >= 2 * t
            chosen: list[int] = []

            def extend(start: int) -> bool:
                nonlocal nodes
                if len(chosen) == need:
                    return True
                for a in range(start, len(window)):
                    if len(window) - a < need - len(chosen):
                        return False
                    if all(sep[a, b] for b in chosen):
                        nodes += 1
                        if nodes > budget:
                            raise SearchBudgetExceeded(f"theta configuration search exceeded {budget} nodes")
                        chosen.append(a)
                        if extend(a + 1):
                            return True
                        chosen.pop()
                return False

            if extend(0):
                r = space.key_to_radius(t)
                r = r * Fraction(2 * m, 4 * m - 1) if space.exact else r * 2 * m / (4 * m - 1)
                return ThetaConfiguration(m, r, theta, (x0, *(window[a] for a in chosen)))
    return None


def verify_theta_configuration(space: FiniteMetricSpace, config: ThetaConfiguration) -> None:
    """Check the annulus and separation constraints in the space's arithmetic."""
    m, theta = config.m, _check_theta_args(config.m, config.theta)
    pts = _distinct(space, config.points)
    sats = pts[1:]
    if len(sats) != _theta_count(m, theta):
        raise WitnessInvalid(f"need {_theta_count(m, theta)} satellites, got {len(sats)}")
    exact = space.exact
    r = to_fraction(config.r) if exact else float(config.r)
    if r <= 0:
        raise WitnessInvalid(f"radius must be positive, got {config.r}")
    lo = r * (1 + Fraction(1, 2 * m)) if exact else r * (1 + 1 / (2 * m))
    hi = r * (2 - Fraction(1, 2 * m)) if exact else r * (2 - 1 / (2 * m))
    sep = r / m
    if not exact:
        # float radii are rounded products of a pairwise distance; allow one
        # relative rounding step on each constraint
        slack = 1 + 1e-12
        lo, hi, sep = lo / slack, hi * slack, sep / slack
    for i in sats:
        d = space.distance(pts[0], i)
        if not lo <= d <= hi:
            raise WitnessInvalid(f"satellite {i} at distance {d} outside [{lo}, {hi}]")
    for a, i in enumerate(sats):
        for j in sats[a + 1:]:
            if space.distance(i, j) < sep:
                raise WitnessInvalid(f"satellites {i},{j} closer than r/m = {sep}")


def _bisect_increasing(g, lo: float, hi: float, tol: float = ROOT_TOL) -> float:
    """Root of an increasing function with ``g(lo) < 0 < g(hi)``."""
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def theta_root(m: int, count: int) -> float:
    """Unique root above 1 of ``C - 1 - count * C**(-1 - log2(6m - 1))``."""
    a = 1 + math.log2(6 * m - 1)
    return _bisect_increasing(lambda c: c - 1 - count * c ** (-a), 1.0, 1.0 + count)


def theta_configuration_bound(config: ThetaConfiguration, space: FiniteMetricSpace | None = None) -> BoundCertificate:
    """The ``count`` disjoint satellite balls of radius ``r/(2m)`` all sit in
    ``B(x0, 2r)`` beside ``B(x0, r)``, and each is at most
    ``C_mu**(1+log2(6m-1))`` times smaller than ``B(x0, r)``."""
    if space is not None:
        verify_theta_configuration(space, config)
    count = len(config.satellites)
    value = theta_root(config.m, count)
    return BoundCertificate(
        kind="theta_configuration",
        value=value,
        witness={"m": config.m, "r": config.r, "theta": config.theta, "points": list(config.points)},
        applies_to=ALL_MEASURES,
        replay={"satellites": count, "exponent": 1 + math.log2(6 * config.m - 1)},
    )


def best_theta_configuration(space: FiniteMetricSpace, max_m: int = _THETA_MAX_M) -> BoundCertificate | None:
    best = None
    for m in range(1, min(max_m, space.n - 1) + 1):
        for count in range(m, 0, -1):
            try:
                config = find_theta_configuration(space, m, Fraction(count, m))
            except SearchBudgetExceeded:
                continue
            if config is not None:
                cert = theta_configuration_bound(config, space)
                if best is None or cert.value > best.value:
                    best = cert
                break
    return best


def lemma34_root(n: int, theta=1, tol: float = ROOT_TOL, residual: float = 1e-10) -> Fraction:
    """Root ``x_n > 1`` of ``x**(n+5) - x**(n+4) - theta 2**(n-1)``.

    Exact rational bisection on ``[1, 2]``; it stops once the bracket is
    narrower than ``tol`` and the polynomial is within ``residual`` of zero at
    the returned endpoint.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    theta = to_fraction(theta)
    if not 0 < theta <= 1:
        raise DomainError(f"theta must lie in (0, 1], got {theta}")
    target = theta * 2 ** (n - 1)

    def f(x: Fraction) -> Fraction:
        return x ** (n + 4) * (x - 1) - target

    lo, hi = Fraction(1), Fraction(2)
    tol_f, res_f = Fraction(tol), Fraction(residual)
    f_lo, f_hi = f(lo), f(hi)
    for _ in range(10_000):
        best = lo if -f_lo <= f_hi else hi
        if hi - lo <= tol_f and abs(f(best)) <= res_f:
            return best
        mid = (lo + hi) / 2
        f_mid = f(mid)
        if f_mid == 0:
            return mid
        if f_mid < 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    raise DomainError("bisection did not reach the requested residual")


def lemma34_polynomial(n: int, x, theta=1) -> Fraction:
    x = to_fraction(x)
    return x ** (n + 5) - x ** (n + 4) - to_fraction(theta) * 2 ** (n - 1)


# ---------------------------------------------------------------------------
# spread and equilateral sets


def spread_bound(space: FiniteMetricSpace, subset: Sequence) -> BoundCertificate:
    """``k`` points with minimum distance ``r`` and diameter ``R``: the
    disjoint balls ``B(x_i, r/2)`` all lie in ``B(x_i0, R + r/2)``, so
    ``k <= C_mu ** ceil(log2(2R/r + 1))`` for every measure."""
    idx = _distinct(space, subset)
    if len(idx) < 2:
        raise DomainError("spread bound needs at least two points")
    sub = space.submatrix_keys(idx)
    big = sub.max()
    small = sub[sub > 0].min()
    r, R = space.key_to_radius(small), space.key_to_radius(big)
    ratio = 2 * to_fraction(R) / to_fraction(r) + 1
    k = ceil_log2(ratio)
    return BoundCertificate(
        kind="spread",
        value=_root_value(len(idx), k),
        witness={"subset": list(idx)},
        applies_to=ALL_MEASURES,
        replay={"k": len(idx), "min_distance": r, "max_distance": R, "exponent": k},
    )


def _separated_subset(keys: np.ndarray, threshold) -> list[int]:
    chosen: list[int] = []
    for i in range(keys.shape[0]):
        if all(keys[i, j] >= threshold for j in chosen):
            chosen.append(i)
    return chosen


def best_spread(space: FiniteMetricSpace) -> BoundCertificate | None:
    """Whole space plus greedy ``t``-separated subsets for every distance ``t``."""
    if space.n < 2:
        return None
    best = spread_bound(space, range(space.n))
    if space.n > _SPREAD_SCAN_MAX_N:
        return best
    for t in np.unique(space._key[space._key > 0]):
        subset = _separated_subset(space._key, t)
        if len(subset) >= 2:
            cert = spread_bound(space, subset)
            if float(cert.value) > float(best.value):
                best = cert
    return best


def _color_order(cands: list[int], adj: list[int]) -> tuple[list[int], list[int]]:
    """Greedy coloring; returns vertices with the color bound of each prefix."""
    order, bounds = [], []
    uncolored = 0
    for v in cands:
        uncolored |= 1 << v
    color = 0
    while uncolored:
        color += 1
        avail = uncolored
        while avail:
            v = (avail & -avail).bit_length() - 1
            avail &= ~(1 << v) & ~adj[v]
            uncolored &= ~(1 << v)
            order.append(v)
            bounds.append(color)
    return order, bounds


class _Budget(Exception):
    pass


def _max_clique(adj: list[int], cap: int, floor: int, budget: list[int]) -> list[int]:
    """Branch-and-bound maximum clique on bitset adjacency, coloring bound."""
    best: list[int] = []

    def expand(clique: list[int], cand: int) -> None:
        nonlocal best
        budget[0] -= 1
        if budget[0] < 0:
            raise _Budget
        if not cand:
            if len(clique) > max(len(best), floor):
                best = list(clique)
            return
        verts = [v for v in range(len(adj)) if cand >> v & 1]
        order, bounds = _color_order(verts, adj)
        for v, bound in zip(reversed(order), reversed(bounds)):
            if len(clique) + bound <= max(len(best), floor) or len(best) >= cap:
                return
            clique.append(v)
            expand(clique, cand & adj[v])
            clique.pop()
            cand &= ~(1 << v)

    try:
        expand([], (1 << len(adj)) - 1)
    except _Budget:
        return best if best else []
    return best


def equilateral_bound(
    space: FiniteMetricSpace,
    max_clique_size: int | None = None,
    node_budget: int = CLIQUE_BUDGET,
    strict: bool = False,
) -> BoundCertificate:
    """Largest set of points at one common distance (a copy of ``K_k``),
    certifying ``(1 + sqrt(4k - 3)) / 2`` for every measure.

    Each distance class is searched by branch-and-bound; classes whose
    maximum degree cannot beat the incumbent are skipped.  When the node
    budget runs out the best set found so far is certified and
    ``complete`` is false (or ``SearchBudgetExceeded`` is raised with
    ``strict``).
    """
    if space.n < 2:
        raise SinglePointSpace("an equilateral set needs two points")
    cap = max_clique_size if max_clique_size is not None else space.n
    if cap < 2:
        raise DomainError(f"max_clique_size must be at least 2, got {cap}")
    keys = space._key
    iu = np.triu_indices(space.n, 1)
    first = int(np.argmin(keys[iu]))
    best = [int(iu[0][first]), int(iu[1][first])]
    budget = [node_budget]
    complete = True
    classes = []
    for t in np.unique(keys[iu]):
        eq = keys == t if space.exact else np.isclose(keys, t, rtol=1e-12, atol=0)
        np.fill_diagonal(eq, False)
        classes.append((int(eq.sum(axis=1).max()), eq))
    classes.sort(key=lambda c: -c[0])
    for degree, eq in classes:
        if degree + 1 <= len(best) or len(best) >= cap:
            continue
        verts = [int(v) for v in np.flatnonzero(eq.sum(axis=1) >= len(best))]
        pos = {v: i for i, v in enumerate(verts)}
        adj = [0] * len(verts)
        for v in verts:
            for u in np.flatnonzero(eq[v]):
                if int(u) in pos:
                    adj[pos[v]] |= 1 << pos[int(u)]
        found = _max_clique(adj, cap, len(best), budget)
        if budget[0] < 0:
            complete = False
        if len(found) > len(best):
            best = [verts[i] for i in found]
        if not complete:
            break
    if not complete and strict:
        raise SearchBudgetExceeded(f"equilateral search exceeded {node_budget} nodes; best size {len(best)}")
    best = sorted(best[:cap])
    return _equilateral_certificate(space, best, complete)


def _equilateral_certificate(space: FiniteMetricSpace, points: Sequence[int], complete: bool = True) -> BoundCertificate:
    pts = _distinct(space, points)
    if len(pts) < 2:
        raise WitnessInvalid("an equilateral set needs two points")
    sub = space.submatrix_keys(pts)
    off = sub[~np.eye(len(pts), dtype=bool)]
    if space.exact:
        equal = bool((off == off[0]).all())
    else:
        equal = bool(np.allclose(off, off[0], rtol=1e-12, atol=0))
    if not equal:
        raise WitnessInvalid(f"points {list(pts)} are not equilateral")
    k = len(pts)
    return BoundCertificate(
        kind="equilateral",
        value=_half_plus_sqrt(4 * k - 3),
        witness={"points": list(pts), "distance": space.key_to_radius(off[0]), "complete": complete},
        applies_to=ALL_MEASURES,
        replay={"k": k},
    )


# ---------------------------------------------------------------------------
# envelope


def envelope_bound(space: FiniteMetricSpace, measure: Measure) -> BoundCertificate:
    """``2 max_r phi1(r) / phi2(r)`` over every critical radius and one radius
    beyond the diameter."""
    if space.n < 2:
        raise SinglePointSpace("the envelope bound needs two points")
    vec = weight_vector(space, measure)
    keys = space._key
    radii = np.unique(np.concatenate([space.critical_keys(c) for c in range(space.n)]))
    radii = np.concatenate([radii, [keys.max() * 2]])
    phi1 = None
    phi2 = None
    for c in range(space.n):
        order, sorted_keys = space.sorted_row(c)
        prefix = np.concatenate([np.zeros(1, dtype=vec.dtype), np.cumsum(vec[order])])
        open_mass = prefix[np.searchsorted(sorted_keys, radii, side="left")]
        closed_mass = prefix[np.searchsorted(sorted_keys, radii, side="right")]
        phi1 = open_mass if phi1 is None else np.minimum(phi1, open_mass)
        phi2 = closed_mass if phi2 is None else np.maximum(phi2, closed_mass)
    if space.exact:
        ratios = [Fraction(int(a), int(b)) for a, b in zip(phi1, phi2)]
    else:
        ratios = [float(a) / float(b) for a, b in zip(phi1, phi2)]
    top = max(ratios)
    at = ratios.index(top)
    return BoundCertificate(
        kind="envelope",
        value=2 * top,
        witness={"r": space.key_to_radius(radii[at]), "reading": ENVELOPE_READING},
        applies_to=GIVEN_MEASURE,
        replay={
            "phi1": _mass(space, phi1[at], measure, vec),
            "phi2": _mass(space, phi2[at], measure, vec),
            "radii_scanned": len(radii),
        },
    )


def _mass(space: FiniteMetricSpace, value, measure: Measure, vec: np.ndarray) -> Scalar:
    """Undo the common denominator of ``weight_vector``."""
    if not space.exact:
        return float(value)
    scale = Fraction(int(vec.sum())) / to_fraction(measure.total)
    return Fraction(int(value)) / scale


# ---------------------------------------------------------------------------
# aggregation and replay


def all_certificates(space: FiniteMetricSpace, measure: Measure | None = None) -> list[BoundCertificate]:
    """Every certifier that applies, in the canonical kind order.  The
    exploratory searches (separated balls, theta configurations) run only
    on spaces of at most 64 points."""
    if space.n < 2:
        raise SinglePointSpace("bounds need at least two points")
    certs: list[BoundCertificate | None] = []
    small = space.n <= _SCAN_MAX_N
    certs.append(best_separated_balls(space) if small else None)
    certs.append(golden_ratio_bound(space))
    certs.append(disjoint_pair_bound(space))
    certs.append(best_theta_configuration(space) if small else None)
    certs.append(best_spread(space))
    certs.append(equilateral_bound(space))
    if measure is not None:
        certs.append(envelope_bound(space, measure))
        certs.append(intersection_ratio_bound(space, measure))
    return [c for c in certs if c is not None]


def replay_certificate(space: FiniteMetricSpace, cert: BoundCertificate, measure: Measure | None = None) -> Scalar:
    """Re-derive a certificate from its witness alone and return its value;
    ``WitnessInvalid`` if any check fails or the value differs."""
    w = cert.witness
    kind = cert.kind
    if kind in ("envelope", "intersection_ratio") and measure is None:
        raise WitnessInvalid(f"{kind} certificates replay against a measure")
    if kind == "separated_balls":
        fresh = separated_balls_bound(space, w["center"], w["r"], w["s"], w["centers"])
    elif kind == "golden_ratio":
        fresh = golden_ratio_bound(space, w["pair"])
    elif kind == "disjoint_pair":
        fresh = disjoint_pair_bound(space, w["pair"])
    elif kind == "theta_configuration":
        config = ThetaConfiguration(int(w["m"]), w["r"], to_fraction(w["theta"]), tuple(w["points"]))
        fresh = theta_configuration_bound(config, space)
    elif kind == "spread":
        fresh = spread_bound(space, w["subset"])
    elif kind == "equilateral":
        fresh = _equilateral_certificate(space, w["points"], w.get("complete", True))
    elif kind == "envelope":
        fresh = envelope_bound(space, measure)
    elif kind == "intersection_ratio":
        fresh = intersection_ratio_bound(space, measure, w["pair"])
    else:
        raise WitnessInvalid(f"unknown certificate kind {kind!r}")
    if not _close(fresh.value, cert.value):
        raise WitnessInvalid(f"{kind} replay gives {fresh.value}, certificate claims {cert.value}")
    return fresh.value


__all__ = [
    "ALL_MEASURES",
    "GIVEN_MEASURE",
    "GOLDEN_RATIO",
    "KINDS",
    "BoundCertificate",
    "ThetaConfiguration",
    "all_certificates",
    "best_separated_balls",
    "best_spread",
    "best_theta_configuration",
    "disjoint_pair_bound",
    "envelope_bound",
    "equilateral_bound",
    "find_separated_balls",
    "find_theta_configuration",
    "golden_ratio_bound",
    "intersection_ratio_bound",
    "lemma34_polynomial",
    "lemma34_root",
    "replay_certificate",
    "separated_balls_bound",
    "spread_bound",
    "theta_configuration_bound",
    "theta_root",
    "verify_theta_configuration",
]
