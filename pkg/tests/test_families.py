import itertools
import math
import random
from fractions import Fraction

import pytest

from corpus import named_corpus
from doubling_lab import Measure, cmu, least_constant, validate_metric
from doubling_lab.bounds import best_separated_balls, spread_bound
from doubling_lab.errors import DisconnectedGraph, InvalidEpsilon, InvalidParameters, NonPositiveWeight
from doubling_lab.families import (
    FamilySpec,
    bounded_transform,
    complete,
    cycle,
    from_edge_list,
    generate,
    grid,
    path,
    snowflake,
    star,
    tree,
)


def _matrix(space):
    return [[space.distance(i, j) for j in range(space.n)] for i in range(space.n)]


def test_complete_distances():
    space = generate({"kind": "complete", "n": 4})
    assert all(space.distance(i, j) == (i != j) for i in range(4) for j in range(4))


def test_star_distances():
    space = generate(FamilySpec("star", n=5))
    assert [space.distance(0, j) for j in range(1, 5)] == [1] * 4
    assert all(space.distance(i, j) == 2 for i, j in itertools.combinations(range(1, 5), 2))


def test_cycle_distances():
    space = generate({"kind": "cycle", "n": 6})
    for i in range(6):
        for j in range(6):
            assert space.distance(i, j) == min(abs(i - j), 6 - abs(i - j))


def test_path_distances():
    space = path(7)
    assert all(space.distance(i, j) == abs(i - j) for i in range(7) for j in range(7))


@pytest.mark.parametrize("p, exact", [("1", True), ("inf", True), ("2", False)])
def test_grid_norms(p, exact):
    space = grid(3, 2, p)
    assert space.exact is exact and space.n == 9
    coords = list(itertools.product(range(3), repeat=2))
    for a, b in itertools.combinations(range(9), 2):
        diff = [abs(x - y) for x, y in zip(coords[a], coords[b])]
        expected = {"1": sum(diff), "inf": max(diff), "2": math.hypot(*diff)}[p]
        assert float(space.distance(a, b)) == pytest.approx(expected, rel=1e-15)


def test_grid_three_dimensional():
    assert grid(2, 3, "inf").n == 8


def test_tree_shape():
    """Truncated T_3: root degree 3, every other internal vertex degree 3."""
    t = tree(3, 3)
    assert t.n == 1 + 3 + 6 + 12
    degrees = [sum(1 for j in range(t.n) if t.distance(i, j) == 1) for i in range(t.n)]
    depth = [p.count(".") for p in t.points]
    for d, deg in zip(depth, degrees):
        assert deg == (3 if d < 3 else 1)


def test_every_generated_space_is_a_metric():
    for name, space in named_corpus():
        validate_metric(_matrix(space), space.points, exact=space.exact)


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "complete", "n": 0},
        {"kind": "star", "n": 1},
        {"kind": "cycle", "n": 2},
        {"kind": "grid", "n": 3, "p": "3"},
        {"kind": "grid", "n": 3, "dim": 0},
        {"kind": "tree", "branching": 1, "depth": 2},
        {"kind": "tree", "branching": 3, "depth": -1},
        {"kind": "hypercube", "n": 3},
        {"kind": "complete", "n": 3, "colour": "red"},
        {"kind": "from_edges"},
    ],
)
def test_invalid_parameters(spec):
    with pytest.raises(InvalidParameters):
        generate(spec)


def test_cycle_counting_measure_three():
    for n in range(3, 21):
        assert cmu(generate({"kind": "cycle", "n": n}), Measure.counting(n)).value == 3


# -- transforms ----------------------------------------------------------------


def test_snowflake_near_one_keeps_distances():
    space = path(6)
    flake = snowflake(space, 1 - 1e-12)
    for i in range(6):
        for j in range(6):
            assert flake.distance(i, j) == pytest.approx(float(space.distance(i, j)), rel=1e-10)


def test_snowflake_half_is_square_root():
    flake = snowflake(path(10), Fraction(1, 2))
    assert flake.distance(0, 9) == pytest.approx(3.0, rel=1e-15)


@pytest.mark.parametrize("eps", [0, 1, -0.5, 2])
def test_snowflake_domain(eps):
    with pytest.raises(InvalidEpsilon):
        snowflake(path(3), eps)


def test_snowflake_subadditivity():
    rng = random.Random(31)
    for _ in range(2000):
        a, b, eps = rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0.01, 0.99)
        assert (a + b) ** eps <= a**eps + b**eps + 1e-12


def test_snowflaked_path_spread_formula():
    eps = Fraction(1, 2)
    for k in (5, 17, 100, 257):
        cert = spread_bound(snowflake(path(k), eps), range(k))
        expected = k ** (1 / math.ceil(math.log2(2 * (k - 1) ** 0.5 + 1)))
        assert float(cert.value) == pytest.approx(expected, rel=1e-12)
    assert float(spread_bound(snowflake(path(257), eps), range(257)).value) > 2


def test_bounded_transform_two_point():
    space = bounded_transform(validate_metric([[0, 1], [1, 0]]))
    assert space.exact and space.distance(0, 1) == Fraction(1, 2)


def test_bounded_transform_preserves_metric_on_corpus():
    for name, space in named_corpus():
        bounded = bounded_transform(space)
        validate_metric(_matrix(bounded), bounded.points, exact=bounded.exact)
        assert all(bounded.distance(i, j) < 1 for i in range(space.n) for j in range(space.n)), name


def test_bounded_path_least_constant_grows():
    values = [float(least_constant(bounded_transform(path(k))).upper) for k in (4, 8, 16)]
    assert values[0] < values[1] < values[2]


# -- edge lists ------------------------------------------------------------------


def test_edge_list_relabeled_k3():
    space = from_edge_list(["a b 1", "a c 2", "b c 2"])
    assert space.points == ("a", "b", "c")
    assert space.distance("a", "b") == 1 and space.distance("a", "c") == space.distance("b", "c") == 2


def test_edge_list_single_edge():
    space = from_edge_list(["x y"])
    assert space.n == 2 and space.distance("x", "y") == 1


def test_edge_list_rational_and_comments():
    space = from_edge_list(["# header", "a b 1/3", "", "b c 0.5  # decimal", "a c 5"])
    assert space.exact
    assert space.distance("a", "c") == Fraction(5, 6)


def test_edge_list_disconnected():
    with pytest.raises(DisconnectedGraph):
        from_edge_list(["a b", "c d"])


@pytest.mark.parametrize("line", ["a b 0", "a b -2"])
def test_edge_list_non_positive(line):
    with pytest.raises(NonPositiveWeight):
        from_edge_list([line])


@pytest.mark.parametrize("lines", [[], ["a"], ["a b 1 2"], ["a a 1"]])
def test_edge_list_malformed(lines):
    with pytest.raises(InvalidParameters):
        from_edge_list(lines)


def test_edge_list_huge_weights_use_exact_fallback():
    big = 2**60
    space = from_edge_list([f"a b {big}", "b c 1"])
    assert space.distance("a", "c") == big + 1 and space.exact


# -- truncated trees ---------------------------------------------------------------


def test_truncated_tree_separated_balls_grow():
    """The best certificate on T_3 grows with depth (finite evidence that no
    doubling measure exists on the infinite tree)."""
    values = [float(best_separated_balls(tree(3, d)).value) for d in range(1, 5)]
    assert all(a < b for a, b in zip(values, values[1:]))
    assert values[-1] > 2.5
