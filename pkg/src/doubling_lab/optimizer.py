"""Least doubling constant of a finite metric space.

For a fixed level ``C`` the doubling inequalities ``mu(B(x,2r)) <= C mu(B(x,r))``
are linear in the weights.  Write ``P`` and ``Q`` for the 0/1 incidence
matrices of the outer and inner balls, one row per critical pair.  Deciding
whether some measure has ``C_mu <= C`` is the sign of the matrix game

    s*(C) = min_{w in simplex} max_rows ((P - C Q) w)

Both sides of the game yield exact certificates:

* a primal ``w`` is a measure; its exact ``C_mu`` is an upper bound;
* a dual ``y >= 0`` over rows gives, for every positive measure,
  ``sum_k y_k mu(B_2k) >= L(y) sum_k y_k mu(B_1k)`` with
  ``L(y) = min_i (P^T y)_i / (Q^T y)_i``, so some pair has ratio ``>= L(y)``
  and ``L(y)`` is a lower bound valid for all measures.

The LP is solved in floating point (HiGHS); certificates are re-evaluated in
exact rational arithmetic, so the reported bracket never depends on solver
round-off.  Zero weights need no special handling: a nonnegative solution of
the inequalities with some zero weight is identically zero (a ball around a
zero-mass point that first reaches positive mass violates its row), so the
normalization alone forces strict positivity.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .errors import DomainError, NumericalFailure, SinglePointSpace, SpaceTooLarge
from .measures import Measure, cmu
from .metric import FiniteMetricSpace, Scalar, ball, critical_radii, to_fraction

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
MAX_ITER = 200
_DENOMINATORS = (10**2, 10**4, 10**6, 10**9)
_FLOAT_SLACK = Fraction(1, 10**12)
_TIGHT = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}
_MAX_IDLE = 3


@dataclass(frozen=True)
class FeasibilityProblem:
    """Doubling inequalities at one level ``C``.

    ``pairs[k]`` is the (center, radius) generating row ``k``; ``outer`` and
    ``inner`` are the boolean incidence rows of ``B(x,2r)`` and ``B(x,r)``.
    """

    pairs: tuple[tuple[int, Scalar], ...]
    outer: np.ndarray
    inner: np.ndarray
    level: Scalar = 1

    def matrix(self) -> np.ndarray:
        return self.outer.astype(np.float64) - float(self.level) * self.inner.astype(np.float64)

    def at(self, level) -> "FeasibilityProblem":
        return FeasibilityProblem(self.pairs, self.outer, self.inner, level)


@dataclass(frozen=True)
class Infeasible:
    """No positive measure reaches ``C_mu <= level``: the dual certificate
    proves ``C_mu >= bound > level`` for every measure."""

    level: Scalar
    bound: Scalar
    certificate: tuple[tuple[int, Scalar, Fraction], ...]


@dataclass(frozen=True)
class OptimizationResult:
    lower: Scalar
    upper: Scalar
    witness_measure: Measure
    binding_pairs: tuple[tuple[int, Scalar], ...]
    iterations: int
    dual_certificate: tuple[tuple[int, Scalar, Fraction], ...] = field(default=())
    tolerance: float = DEFAULT_TOL

    @property
    def width(self):
        return self.upper - self.lower


def feasibility_problem(space: FiniteMetricSpace, level=1, *, reduce: bool = True) -> FeasibilityProblem:
    """One row per critical pair.  With ``reduce`` rows whose two balls
    coincide (ratio 1, never binding for ``C >= 1``) and repeated rows are
    dropped."""
    if space.n < 2:
        raise SinglePointSpace("need at least two points")
    n = space.n
    pairs, outer_rows, inner_rows = [], [], []
    seen = set()
    for c in range(n):
        order, sorted_keys = space.sorted_row(c)
        keys = space.critical_keys(c)
        count1 = np.searchsorted(sorted_keys, keys, side="left")
        count2 = np.searchsorted(sorted_keys, keys * 2, side="left")
        for key, c1, c2 in zip(keys, count1, count2):
            inner = np.zeros(n, dtype=bool)
            outer = np.zeros(n, dtype=bool)
            inner[order[:c1]] = True
            outer[order[:c2]] = True
            if reduce:
                if c1 == c2:
                    continue
                sig = (inner.tobytes(), outer.tobytes())
                if sig in seen:
                    continue
                seen.add(sig)
            pairs.append((c, space.key_to_radius(key)))
            inner_rows.append(inner)
            outer_rows.append(outer)
    if not pairs:
        empty = np.zeros((0, n), dtype=bool)
        return FeasibilityProblem((), empty, empty, level)
    return FeasibilityProblem(tuple(pairs), np.array(outer_rows), np.array(inner_rows), level)


def _solve_game(problem: FeasibilityProblem, level: float, tight: bool = False):
    rows, n = problem.outer.shape
    a_ub = np.hstack([problem.at(level).matrix(), -np.ones((rows, 1))])
    res = linprog(
        c=np.r_[np.zeros(n), 1.0],
        A_ub=a_ub,
        b_ub=np.zeros(rows),
        A_eq=np.r_[np.ones(n), 0.0][None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * n + [(None, None)],
        method="highs",
        options=_TIGHT if tight else None,
    )
    if res.status != 0:
        raise NumericalFailure(f"LP solver failed at level {level}: {res.message}")
    w = np.asarray(res.x[:n])
    y = -np.asarray(res.ineqlin.marginals)
    return w, y, float(res.fun)


def _weight_candidates(w: np.ndarray):
    w = np.where(w > 0, w, 0.0)
    floor = float(w.max()) * 1e-12
    raw = [Fraction(float(x)) if x > floor else Fraction(floor) for x in w]
    yield raw
    for d in _DENOMINATORS:
        rounded = [x.limit_denominator(d) for x in raw]
        if all(x > 0 for x in rounded):
            yield rounded


def best_upper(space: FiniteMetricSpace, w: np.ndarray) -> tuple[Scalar, Measure]:
    """Smallest exact ``C_mu`` among the LP weights and their rational roundings."""
    best = None
    for cand in _weight_candidates(w):
        measure = Measure(tuple(cand)).normalized()
        value = cmu(space, measure).value
        if best is None or value < best[0]:
            best = (value, measure)
    return best


def dual_bound(outer: np.ndarray, inner: np.ndarray, y) -> Fraction | None:
    """Exact ``min_i (P^T y)_i / (Q^T y)_i`` over points with ``(Q^T y)_i > 0``."""
    y = [to_fraction(v) for v in y]
    if not any(v > 0 for v in y) or any(v < 0 for v in y):
        return None
    den = 1
    for v in y:
        den = math.lcm(den, v.denominator)
    ints = np.array([int(v * den) for v in y], dtype=object)
    p = outer.T.astype(object).dot(ints)
    q = inner.T.astype(object).dot(ints)
    ratios = [Fraction(int(pi), int(qi)) for pi, qi in zip(p, q) if qi > 0]
    return min(ratios) if ratios else None


def _dual_candidates(y: np.ndarray):
    y = np.where(y > 0, y, 0.0)
    if y.max() <= 0:
        return
    y = y / y.sum()
    cut = float(y.max()) * 1e-12
    raw = [Fraction(float(v)) if v > cut else Fraction(0) for v in y]
    yield raw
    for d in _DENOMINATORS:
        yield [v.limit_denominator(d) for v in raw]


def best_lower(problem: FeasibilityProblem, y: np.ndarray):
    best = None
    for cand in _dual_candidates(y):
        value = dual_bound(problem.outer, problem.inner, cand)
        if value is not None and (best is None or value > best[0]):
            best = (value, cand)
    return best


def _certificate(problem: FeasibilityProblem, y) -> tuple[tuple[int, Scalar, Fraction], ...]:
    total = sum(y)
    return tuple((c, r, v / total) for (c, r), v in zip(problem.pairs, y) if v > 0)


def certified_lower_bound(space: FiniteMetricSpace, certificate) -> Fraction:
    """Replay a dual certificate from scratch: recompute every ball and the
    bound ``min_i (P^T y)_i / (Q^T y)_i``."""
    n = space.n
    outer = np.zeros((len(certificate), n), dtype=bool)
    inner = np.zeros((len(certificate), n), dtype=bool)
    weights = []
    for k, (c, r, v) in enumerate(certificate):
        r = to_fraction(r)
        inner[k, list(ball(space, c, r).members)] = True
        outer[k, list(ball(space, c, 2 * r).members)] = True
        weights.append(to_fraction(v))
    value = dual_bound(outer, inner, weights)
    if value is None:
        raise DomainError("certificate has no positive weight")
    return value


def _as_mode(space: FiniteMetricSpace, value) -> Scalar:
    return value if space.exact else float(value)


def feasible(space: FiniteMetricSpace, level) -> Measure | Infeasible:
    """A normalized measure with ``C_mu <= level`` (verified by exact replay),
    or an ``Infeasible`` verdict carrying a dual certificate."""
    level = to_fraction(level)
    if level < 1:
        raise DomainError(f"level must be >= 1, got {level}")
    problem = feasibility_problem(space, level)
    if not problem.pairs:
        return Measure.uniform(space.n)
    w, y, _ = _solve_game(problem, float(level))
    upper, measure = best_upper(space, w)
    if to_fraction(upper) <= level:
        return measure
    lower = best_lower(problem, y)
    if lower is not None and lower[0] > level:
        return Infeasible(_as_mode(space, level), _as_mode(space, lower[0]), _certificate(problem, lower[1]))
    raise NumericalFailure(f"level {level} lies within solver round-off of the least constant")


def least_constant(space: FiniteMetricSpace, tolerance=DEFAULT_TOL, max_iter: int = MAX_ITER) -> OptimizationResult:
    """Bracket ``inf_mu C_mu`` to within ``tolerance``.

    Bisection on the level over ``[2, n]``: 2 is a lower bound on every space
    with two or more points, and the counting measure has ``C_mu <= n``.
    Every LP solve tightens the bracket with exact certificates; the search
    level only steers where the next solve happens.
    """
    if space.n < 2:
        raise SinglePointSpace("the least doubling constant needs at least two points")
    tol = to_fraction(tolerance)
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tolerance}")
    problem = feasibility_problem(space)
    witness = Measure.counting(space.n).normalized()
    upper = to_fraction(cmu(space, witness).value)
    lower, certificate = Fraction(1), ()
    search_lo = Fraction(2)
    iterations = idle = 0
    while upper - lower > tol:
        if iterations >= max_iter:
            raise NumericalFailure(f"no convergence after {max_iter} iterations: bracket [{lower}, {upper}]")
        lo = max(search_lo, lower)
        level = (lo + upper) / 2 if upper - lo > tol else lo
        if idle:
            # after an idle solve, probe closer to the certified lower end
            level = lower + (upper - lower) / 4**idle
        w, y, value = _solve_game(problem, float(level), tight=idle > 0)
        iterations += 1
        progress = False
        up, measure = best_upper(space, w)
        up = to_fraction(up)
        if up < upper:
            upper, witness, progress = up, measure, True
        low = best_lower(problem, y)
        if low is not None and low[0] > lower:
            lower, certificate, progress = low[0], _certificate(problem, low[1]), True
        if lower > upper and not space.exact and lower - upper <= _FLOAT_SLACK * upper:
            # float-mode ratios carry rounding; an ulp-level crossing means the
            # bracket has collapsed, so keep the smaller (still valid) value
            lower = upper
        if lower > upper:
            raise NumericalFailure(f"certificates contradict: lower {lower} > upper {upper}")
        if value > 0 and level > search_lo:
            search_lo, progress = to_fraction(float(level)), True
        log.debug("iter %d level %.12g game %.3e bracket [%s, %s]", iterations, float(level), value, float(lower), float(upper))
        idle = 0 if progress else idle + 1
        if idle >= _MAX_IDLE:
            raise NumericalFailure(f"bisection stalled at level {float(level)}; bracket [{lower}, {upper}]")
    binding = tuple((c, r) for c, r, _ in certificate)
    return OptimizationResult(
        lower=_as_mode(space, lower),
        upper=_as_mode(space, upper),
        witness_measure=witness,
        binding_pairs=binding,
        iterations=iterations,
        dual_certificate=certificate,
        tolerance=float(tolerance),
    )


def _compositions(total: int, parts: int):
    """All ways to write ``total`` as ``parts`` positive integers, in chunks."""
    if parts == 1:
        yield np.array([[total]], dtype=np.int64)
        return
    if parts == 2:
        a = np.arange(1, total, dtype=np.int64)
        yield np.stack([a, total - a], axis=1)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield np.hstack([np.full((len(rest), 1), first, dtype=np.int64), rest])


def brute_force_least(space: FiniteMetricSpace, grid_resolution: int) -> Scalar:
    """Minimum of ``C_mu`` over interior points of the simplex grid with step
    ``1 / grid_resolution``.  An upper bound on the least constant; exponential
    in the number of points, so limited to four."""
    if space.n > 4:
        raise SpaceTooLarge(f"brute force is limited to 4 points, got {space.n}")
    if space.n < 2:
        raise SinglePointSpace("need at least two points")
    if grid_resolution < space.n:
        raise DomainError(f"grid resolution {grid_resolution} leaves no interior point")
    outer_rows, inner_rows = [], []
    for c in range(space.n):
        for r in critical_radii(space, c).radii:
            inner = np.zeros(space.n)
            outer = np.zeros(space.n)
            inner[list(ball(space, c, r).members)] = 1
            outer[list(ball(space, c, 2 * to_fraction(r)).members)] = 1
            inner_rows.append(inner)
            outer_rows.append(outer)
    outer_m, inner_m = np.array(outer_rows).T, np.array(inner_rows).T
    best_value, best_w = np.inf, None
    for chunk in _compositions(grid_resolution, space.n):
        ratios = ((chunk @ outer_m) / (chunk @ inner_m)).max(axis=1)
        i = int(np.argmin(ratios))
        if ratios[i] < best_value:
            best_value, best_w = float(ratios[i]), chunk[i]
    return cmu(space, Measure(tuple(int(v) for v in best_w))).value


__all__ = [
    "FeasibilityProblem",
    "Infeasible",
    "OptimizationResult",
    "best_lower",
    "best_upper",
    "brute_force_least",
    "certified_lower_bound",
    "dual_bound",
    "feasibility_problem",
    "feasible",
    "least_constant",
]

