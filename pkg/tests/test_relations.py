"""
Tests for relations, partitions and lifting.
"""

from fractions import Fraction

import pytest

from costbisim.exceptions import UniverseMismatch
from costbisim.model import Distribution, convex_combine, dirac
from costbisim.relations import (
    BinaryRelation,
    Partition,
    WeightingFunction,
    cross_identity,
    equivalence_compose,
    lift_check,
    relation_compose,
)

from .models import random_distribution


def test_binary_relation_basics():
    """Test the relation constructors and queries."""
    r = BinaryRelation([("x", "b"), ("x", "a"), ("y", "a")], ["x", "y", "z"], ["a", "b"])

    assert r.successors("x") == ("a", "b")  # Right-universe order
    assert r.successors("z") == ()
    assert r.domain() == ("x", "y")
    assert r.image(["y"]) == ("a",)
    assert list(r) == [("x", "a"), ("x", "b"), ("y", "a")]
    assert r.inverse().successors("a") == ("x", "y")
    assert len(BinaryRelation.full(["x", "y"], ["a"])) == 2
    assert BinaryRelation.identity(["s", "t"]).related("t", "t")

    restricted = r.restrict(right=["a"])
    assert restricted.right == ("a",)
    assert set(restricted.pairs) == {("x", "a"), ("y", "a")}
    assert len(r.without([("x", "a")])) == 2

    with pytest.raises(UniverseMismatch):
        BinaryRelation([("x", "c")], ["x"], ["a"])


def test_partition_canonical_order():
    """Test that partitions are canonical whatever the input order."""
    p = Partition([["c", "a"], ["b"]], ["a", "b", "c"])

    assert p.classes == (("a", "c"), ("b",))
    assert p == Partition([["b"], ["a", "c"]])
    assert p.class_of("c") == ("a", "c")
    assert p.same_class("a", "c") and not p.same_class("a", "b")
    assert p.as_relation().related("c", "a")


def test_partition_split_and_merge():
    """Test splitting and merging classes."""
    p = Partition.single(["a", "b", "c"])
    split = p.split(0, ["b"])

    assert split.classes == (("a", "c"), ("b",))
    assert split.merge(0, 1) == p
    assert len(Partition.discrete(["a", "b"])) == 2
    assert len(Partition.single([])) == 0


@pytest.mark.parametrize(
    "classes, universe",
    [
        ([["a"], ["a", "b"]], None),  # Overlap
        ([["a"], []], None),  # Empty class
        ([["a"]], ["a", "b"]),  # Missing state
        ([["a", "x"]], ["a"]),  # Outside the universe
    ],
)
def test_partition_rejections(classes, universe):
    """Test that malformed partitions raise UniverseMismatch."""
    with pytest.raises(UniverseMismatch):
        Partition(classes, universe)


def test_lift_dirac():
    """Test lifting between Dirac distributions."""
    r = BinaryRelation([("x", "y")], ["x"], ["y", "z"])

    assert lift_check(r, dirac("x"), dirac("y")) == {("x", "y"): Fraction(1)}
    assert lift_check(r, dirac("x"), dirac("z")) is None


def test_lift_splits_mass():
    """Test that the weighting function may split a state's mass."""
    r = BinaryRelation(
        [("x", "a"), ("x", "b"), ("y", "b")], ["x", "y"], ["a", "b"]
    )
    mu = Distribution({"x": "3/4", "y": "1/4"})
    nu = Distribution({"a": "1/4", "b": "3/4"})

    weighting = lift_check(r, mu, nu)
    assert isinstance(weighting, WeightingFunction)
    assert weighting.satisfies(r, mu, nu)
    assert weighting[("x", "a")] == Fraction(1, 4)
    assert weighting[("y", "b")] == Fraction(1, 4)

    # y can only go to b, x needs all of a and part of b: b gets too little
    assert lift_check(r, mu, Distribution({"a": "7/8", "b": "1/8"})) is None


def test_lift_edge_cases():
    """Test sub-distributions, mass mismatches and universe checks."""
    r = BinaryRelation.identity(["x", "y"])

    assert lift_check(r, Distribution(), Distribution()) == {}
    assert lift_check(r, Distribution({"x": "1/2"}), dirac("x")) is None
    assert lift_check(r, Distribution({"x": "1/2"}), Distribution({"x": "1/2"}))

    with pytest.raises(UniverseMismatch):
        lift_check(r, dirac("q"), dirac("x"))
    with pytest.raises(UniverseMismatch):
        lift_check(r, dirac("x"), dirac("q"))


def test_weighting_satisfies_rejects_bad_witness():
    """Test that a wrong witness is rejected by exact summation."""
    r = BinaryRelation.identity(["x", "y"])
    mu = Distribution({"x": "1/2", "y": "1/2"})

    assert WeightingFunction({("x", "x"): Fraction(1, 2), ("y", "y"): Fraction(1, 2)}).satisfies(r, mu, mu)
    assert not WeightingFunction({("x", "y"): Fraction(1, 2), ("y", "x"): Fraction(1, 2)}).satisfies(r, mu, mu)
    assert not WeightingFunction({("x", "x"): Fraction(1)}).satisfies(r, mu, mu)


def test_relation_compose():
    """Test relational composition."""
    r1 = BinaryRelation([("x", "y")], ["x"], ["y"])
    r2 = BinaryRelation([("y", "z"), ("y", "w")], ["y"], ["z", "w"])

    composed = relation_compose(r1, r2)
    assert composed.successors("x") == ("z", "w")

    with pytest.raises(UniverseMismatch):
        relation_compose(r2, r1)


def test_equivalence_compose():
    """Test composing equivalences through a shared middle universe."""
    p1 = Partition([["x1", "y1"], ["x2"]], ["x1", "x2", "y1"])
    p2 = Partition([["y1", "z1"], ["z2"]], ["y1", "z1", "z2"])

    composed = equivalence_compose(p1, p2)
    assert composed == Partition([["x1", "z1"], ["x2"], ["z2"]])

    with pytest.raises(UniverseMismatch):
        equivalence_compose(Partition([["a"]]), Partition([["b"]]))


def test_cross_identity():
    """Test the product of a relation with an identity."""
    r = BinaryRelation([("a", "b")], ["a"], ["b"])
    crossed = cross_identity(r, ["y1", "y2"])

    assert crossed.related("(a,y1)", "(b,y1)")
    assert crossed.related("(a,y2)", "(b,y2)")
    assert not crossed.related("(a,y1)", "(b,y2)")
    assert crossed.left == ("(a,y1)", "(a,y2)")


STATES = [f"s{i}" for i in range(5)]
LIFT_CASES = [200, pytest.param(1000, marks=pytest.mark.slow)]


def random_relation(rng, left=STATES, right=STATES, density=0.3):
    return BinaryRelation(
        [(x, y) for x in left for y in right if rng.random() < density], left, right
    )


def random_partition(rng, universe):
    blocks = {}
    for s in universe:
        blocks.setdefault(rng.randrange(len(universe)), []).append(s)
    return Partition(blocks.values(), universe)


def push(rng, r, mu):
    """A distribution that ``mu`` lifts to under ``r``, or None if some mass is stuck."""
    parts = []
    for x, p in mu.items():
        succ = r.successors(x)
        if not succ:
            return None
        if len(succ) > 1 and rng.random() < 0.5:
            first, second = rng.sample(succ, 2)
            parts += [(first, p / 2), (second, p / 2)]
        else:
            parts.append((rng.choice(succ), p))
    return Distribution(parts)


@pytest.mark.parametrize("cases", LIFT_CASES)
def test_lifting_dirac_and_identity(rng, cases):
    """Test that Dirac liftings follow the relation and identity liftings equality."""
    identity = BinaryRelation.identity(STATES)
    for _ in range(cases):
        r = random_relation(rng)
        x, y = rng.choice(STATES), rng.choice(STATES)
        assert (lift_check(r, dirac(x), dirac(y)) is not None) == r.related(x, y)

        mu, nu = random_distribution(rng, STATES), random_distribution(rng, STATES)
        assert (lift_check(identity, mu, nu) is not None) == (mu == nu)
        assert lift_check(identity, mu, mu) == WeightingFunction(
            {(s, s): p for s, p in mu.items()}
        )


@pytest.mark.parametrize("cases", LIFT_CASES)
def test_lifting_witness_inverse_and_monotonicity(rng, cases):
    """Test witnesses, the inverse relation and growing relations on random instances."""
    for _ in range(cases):
        r = random_relation(rng)
        mu = random_distribution(rng, STATES)
        nu = push(rng, r, mu) if rng.random() < 0.5 else None
        nu = nu or random_distribution(rng, STATES)

        w = lift_check(r, mu, nu)
        if w is not None:
            assert w.satisfies(r, mu, nu)
        assert (lift_check(r.inverse(), nu, mu) is not None) == (w is not None)

        bigger = BinaryRelation(r.pairs | random_relation(rng).pairs, STATES, STATES)
        if w is not None:
            assert lift_check(bigger, mu, nu) is not None
        smaller = random_relation(rng).intersection(r)
        if lift_check(smaller, mu, nu) is not None:
            assert w is not None


@pytest.mark.parametrize("cases", LIFT_CASES)
def test_lifting_composes(rng, cases):
    """Test that liftings under R1 and R2 chain into one under their composition."""
    checked = 0
    for _ in range(cases):
        r1, r2 = random_relation(rng, density=0.4), random_relation(rng, density=0.4)
        mu = random_distribution(rng, STATES)
        nu = push(rng, r1, mu)
        rho = push(rng, r2, nu) if nu is not None else None
        if rho is None:
            continue
        checked += 1
        assert lift_check(r1, mu, nu) is not None
        assert lift_check(r2, nu, rho) is not None
        assert lift_check(relation_compose(r1, r2), mu, rho) is not None
    assert checked > cases // 4


@pytest.mark.parametrize("cases", LIFT_CASES)
def test_lifting_is_closed_under_convex_combination(rng, cases):
    """Test that mixing two lifted pairs with the same weights still lifts."""
    for _ in range(cases):
        r = random_relation(rng, density=0.5)
        pairs = []
        for _ in range(2):
            mu = random_distribution(rng, STATES)
            nu = push(rng, r, mu)
            if nu is not None:
                pairs.append((mu, nu))
        if len(pairs) < 2:
            continue
        (mu1, nu1), (mu2, nu2) = pairs
        k = Fraction(rng.randint(1, 7), 8)
        mu = convex_combine([(k, mu1), (1 - k, mu2)])
        nu = convex_combine([(k, nu1), (1 - k, nu2)])
        assert lift_check(r, mu, nu) is not None


@pytest.mark.parametrize("cases", LIFT_CASES)
def test_lifting_under_equivalence_compares_class_masses(rng, cases):
    """Test that an equivalence lifts exactly the pairs agreeing on every class."""
    for _ in range(cases):
        p = random_partition(rng, STATES)
        eq = p.as_relation()
        mu = random_distribution(rng, STATES)
        nu = push(rng, eq, mu) if rng.random() < 0.5 else random_distribution(rng, STATES)

        same = all(
            sum((mu.get(s, 0) for s in c), Fraction(0))
            == sum((nu.get(s, 0) for s in c), Fraction(0))
            for c in p
        )
        assert (lift_check(eq, mu, nu) is not None) == same
        assert (lift_check(eq, nu, mu) is not None) == same


@pytest.mark.parametrize("cases", LIFT_CASES)
def test_lifting_through_composed_equivalences(rng, cases):
    """Test that liftings X to Y and Y to Z give one under the composed equivalence."""
    xs, ys, zs = ["x0", "x1", "x2"], ["y0", "y1", "y2"], ["z0", "z1", "z2"]
    checked = 0
    for _ in range(cases):
        p1, p2 = random_partition(rng, xs + ys), random_partition(rng, ys + zs)
        e1, e2 = p1.as_relation(), p2.as_relation()
        nu = random_distribution(rng, ys)
        mu = push(rng, e1.restrict(left=ys, right=xs), nu)
        rho = push(rng, e2.restrict(left=ys, right=zs), nu)
        if mu is None or rho is None:
            continue
        checked += 1
        assert lift_check(e1, mu, nu) is not None
        assert lift_check(e2, nu, rho) is not None
        composed = equivalence_compose(p1, p2).as_relation()
        assert lift_check(composed, mu, rho) is not None
    assert checked > 0
