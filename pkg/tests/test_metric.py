import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import RELABELED_K3, named_corpus, relabeled_k3, two_point
from doubling_lab import ball, ceil_log2_ratio, closed_ball, critical_radii, cycle, validate_metric
from doubling_lab.errors import (
    AsymmetricMatrix,
    DomainError,
    NegativeOrZeroOffDiagonal,
    NonFiniteDistance,
    NonzeroDiagonal,
    NotSquare,
    SinglePointSpace,
    TriangleViolation,
)
from doubling_lab.families import complete, grid, path, star, tree
from doubling_lab.metric import ceil_log2


# -- validate_metric ---------------------------------------------------------


def test_two_point_space_is_valid():
    space = two_point()
    assert space.n == 2 and space.exact
    assert space.distance(0, 1) == 1


def test_triangle_violation_reports_triple():
    with pytest.raises(TriangleViolation) as err:
        validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    assert err.value.triple == (0, 1, 2)


def test_relabeled_k3_is_valid():
    space = relabeled_k3()
    assert space.distance("a", "b") == 1
    assert space.distance("a", "c") == space.distance("b", "c") == 2


@pytest.mark.parametrize(
    "matrix, error",
    [
        ([[0, 1], [2, 0]], AsymmetricMatrix),
        ([[0, 0], [0, 0]], NegativeOrZeroOffDiagonal),
        ([[0, -1], [-1, 0]], NegativeOrZeroOffDiagonal),
        ([[1, 1], [1, 0]], NonzeroDiagonal),
        ([[0, 1, 1], [1, 0, 1]], NotSquare),
        ([[0, float("nan")], [float("nan"), 0]], NonFiniteDistance),
        ([[0, float("inf")], [float("inf"), 0]], NonFiniteDistance),
    ],
)
def test_invalid_matrices(matrix, error):
    with pytest.raises(error):
        validate_metric(matrix)


def test_rational_strings_select_exact_mode():
    space = validate_metric([[0, "1/3"], ["1/3", 0]])
    assert space.exact and space.distance(0, 1) == Fraction(1, 3)


def test_float_entries_select_float_mode():
    space = validate_metric([[0, 0.5], [0.5, 0]])
    assert not space.exact and space.distance(0, 1) == 0.5


def test_single_point_space_is_a_metric_but_has_no_radii():
    space = validate_metric([[0]])
    assert space.n == 1
    with pytest.raises(SinglePointSpace):
        critical_radii(space, 0)


def test_generated_families_pass_validation():
    for name, space in named_corpus():
        again = validate_metric(space.distance_matrix(), space.points, exact=space.exact)
        assert again.n == space.n, name


# -- balls -------------------------------------------------------------------


def test_open_ball_excludes_boundary():
    space = two_point()
    assert ball(space, 0, 1).members == (0,)
    assert ball(space, 0, Fraction(3, 2)).members == (0, 1)
    assert ball(space, 0, "3/2").radius == Fraction(3, 2)


def test_cycle_ball_of_radius_two_is_closed_neighbourhood():
    space = cycle(5)
    for v in range(5):
        assert set(ball(space, v, 2).members) == {v, (v - 1) % 5, (v + 1) % 5}


def test_ball_rejects_non_positive_radius():
    with pytest.raises(DomainError):
        ball(two_point(), 0, 0)


def test_closed_ball_is_non_strict():
    space = two_point()
    assert closed_ball(space, 0, 1).members == (0, 1)
    assert closed_ball(space, 0, Fraction(99, 100)).members == (0,)


def test_center_in_its_ball():
    for _, space in named_corpus():
        for c in range(space.n):
            assert c in ball(space, c, 1e-9 if not space.exact else Fraction(1, 10**9)).members


# -- critical radii ----------------------------------------------------------


def test_critical_radii_examples():
    assert critical_radii(two_point(), 0).radii == (Fraction(1, 2), Fraction(1))
    assert critical_radii(complete(3), 1).radii == (Fraction(1, 2), Fraction(1))
    assert critical_radii(relabeled_k3(), "a").radii == (Fraction(1, 2), Fraction(1), Fraction(2))


def _sample_radii(breaks):
    """Points inside every half-open gap (e_k, e_{k+1}] and its endpoint."""
    edges = [Fraction(0)] + [Fraction(b) for b in breaks]
    out = []
    for lo, hi in zip(edges, edges[1:]):
        for t in (Fraction(1, 7), Fraction(1, 2), Fraction(6, 7), Fraction(1)):
            out.append((lo + (hi - lo) * t, hi))
    top = edges[-1]
    out += [(top * Fraction(k, 4), None) for k in (5, 6, 9)]
    return out


def test_gap_constancy_exhaustive_small_spaces():
    """Open balls at r and 2r match the right endpoint of r's gap; beyond the
    last breakpoint both balls are the whole space."""
    for name, space in named_corpus():
        if space.n > 6 or not space.exact:
            continue
        for c in range(space.n):
            breaks = critical_radii(space, c).radii
            for r, right in _sample_radii(breaks):
                small, big = ball(space, c, r).members, ball(space, c, 2 * r).members
                if right is None:
                    assert small == big == tuple(range(space.n)), name
                else:
                    assert small == ball(space, c, right).members, (name, c, r)
                    assert big == ball(space, c, 2 * right).members, (name, c, r)


def test_gap_constancy_float_space():
    space = grid(3, 2, "2")
    for c in range(space.n):
        breaks = critical_radii(space, c).radii
        edges = [0.0, *breaks]
        for lo, hi in zip(edges, edges[1:]):
            for t in (0.25, 0.5, 0.75):
                r = lo + (hi - lo) * t
                assert ball(space, c, r).members == ball(space, c, hi).members
                assert ball(space, c, 2 * r).members == ball(space, c, 2 * hi).members


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(2, 7),
    seed=st.integers(0, 10**6),
    r1=st.fractions(min_value=Fraction(1, 100), max_value=20),
    r2=st.fractions(min_value=Fraction(1, 100), max_value=20),
)
def test_ball_monotone_in_radius(n, seed, r1, r2):
    import random

    from corpus import random_space

    space = random_space(random.Random(seed), n=n)
    lo, hi = sorted((r1, r2))
    for c in range(space.n):
        assert set(ball(space, c, lo).members) <= set(ball(space, c, hi).members)


@settings(max_examples=60, deadline=None)
@given(r=st.fractions(min_value=Fraction(1, 50), max_value=12))
def test_unweighted_graph_balls_depend_on_ceiling_of_radius(r):
    for space in (cycle(7), path(6), star(5), tree(3, 2)):
        up = math.ceil(r)
        for c in range(space.n):
            assert ball(space, c, r).members == ball(space, c, up).members


# -- ceil_log2_ratio ---------------------------------------------------------


def test_ceil_log2_ratio_examples():
    assert ceil_log2_ratio(8, 1) == 3
    assert ceil_log2_ratio(9, 1) == 4
    assert ceil_log2_ratio(4, 3) == 1


@pytest.mark.parametrize("r, s", [(1, 1), (1, 2), (1, 0), (1, -1)])
def test_ceil_log2_ratio_domain(r, s):
    with pytest.raises(DomainError):
        ceil_log2_ratio(r, s)


@settings(max_examples=200, deadline=None)
@given(a=st.integers(1, 10**12), b=st.integers(1, 10**12))
def test_ceil_log2_is_smallest_power(a, b):
    n = ceil_log2(Fraction(a, b))
    assert Fraction(a, b) <= Fraction(2) ** n
    assert Fraction(a, b) > Fraction(2) ** (n - 1)


def test_ceil_log2_exact_at_huge_powers():
    q = Fraction(2**200 + 1, 1)
    assert ceil_log2(q) == 201
    assert ceil_log2(Fraction(2**200)) == 200
    assert ceil_log2(Fraction(1, 2**70)) == -70


def test_relabeled_matrix_is_as_written():
    space = relabeled_k3()
    assert [[int(d) for d in row] for row in space.distance_matrix()] == RELABELED_K3
    assert np.array_equal(space.submatrix_keys([0, 1, 2]), space.submatrix_keys(range(3)))
