"""
Tests for distributions, automata and the MDP reward.
"""

from fractions import Fraction

import pytest

from costbisim.exceptions import (
    AlphabetClash,
    MixedTransitions,
    NotAnMdp,
    UnknownState,
    ValidationError,
    WeightError,
)
from costbisim.model import (
    CPA,
    Alphabet,
    Distribution,
    MdpPolicy,
    Transition,
    as_rational,
    convex_combine,
    dirac,
    disjoint_union,
    is_valid_id,
    mdp_expected_total_reward,
    product,
    prune_unreachable,
    reachable_states,
    strong_combined_cost,
)

from .models import icc, wcc


def test_distribution_basics():
    """Test construction, merging and zero dropping."""
    d = Distribution([("a", "1/4"), ("b", 0), ("a", Fraction(1, 4)), ("c", "1/2")])

    assert d.support() == ("a", "c")
    assert d["a"] == Fraction(1, 2)
    assert d.prob("b") == 0
    assert d.is_full()
    assert d.set_mass(["a", "b"]) == Fraction(1, 2)
    assert d == {"a": Fraction(1, 2), "c": Fraction(1, 2), "b": 0}
    assert hash(d) == hash(Distribution({"c": "1/2", "a": "1/2"}))

    sub = Distribution({"a": "1/3"})
    assert not sub.is_full()
    assert sub.mass() == Fraction(1, 3)


@pytest.mark.parametrize(
    "weights",
    [{"a": "-1/2"}, {"a": "3/4", "b": "1/2"}, {"a": 0.5}, {"a": "x"}],
)
def test_distribution_rejects_bad_weights(weights):
    """Test that negative, excessive, float and malformed weights are refused."""
    with pytest.raises(WeightError):
        Distribution(weights)


def test_as_rational():
    """Test exact conversion of rationals."""
    assert as_rational("3/4") == Fraction(3, 4)
    assert as_rational(2) == 2
    with pytest.raises(WeightError):
        as_rational(0.25)
    with pytest.raises(WeightError):
        as_rational("1/0")


def test_convex_combine_and_product():
    """Test the distribution algebra."""
    mixed = convex_combine([("1/4", dirac("h0")), ("3/4", dirac("h1"))])
    assert mixed == {"h0": Fraction(1, 4), "h1": Fraction(3, 4)}

    with pytest.raises(WeightError):
        convex_combine([("1/2", dirac("h0")), ("1/4", dirac("h1"))])
    with pytest.raises(WeightError):
        convex_combine([(0, dirac("h0")), (1, dirac("h1"))])

    prod = product(Distribution({"x": "1/2", "y": "1/2"}), dirac("z"))
    assert prod == {"(x,z)": Fraction(1, 2), "(y,z)": Fraction(1, 2)}


def test_identifiers():
    """Test the identifier grammar."""
    assert is_valid_id("h0")
    assert is_valid_id("A23.s")
    assert is_valid_id("(s,(c0,d'))")
    assert not is_valid_id("")
    assert not is_valid_id("a,b")
    assert not is_valid_id("(a,)")
    assert not is_valid_id("(a")
    assert not is_valid_id("a b")


def test_alphabet_rules():
    """Test the alphabet validation."""
    alphabet = Alphabet(("send",), ("hop",))
    assert alphabet.actions == ("send", "hop")
    assert alphabet.is_external("send") and alphabet.is_internal("hop")
    assert "recv" not in alphabet

    with pytest.raises(ValidationError):
        Alphabet(("a",), ("a",))
    with pytest.raises(ValidationError):
        Alphabet(("tau",))
    with pytest.raises(ValidationError):
        Alphabet(("a", "a"))


def test_transition_rules():
    """Test that transitions need nonnegative costs and full targets."""
    assert Transition("s", "a", dirac("t")).cost == 0
    with pytest.raises(ValidationError):
        Transition("s", "a", dirac("t"), -1)
    with pytest.raises(ValidationError):
        Transition("s", "a", Distribution({"t": "1/2"}), 1)


def test_cpa_validation():
    """Test that automata reject undeclared references."""
    alphabet = Alphabet(("a",))
    with pytest.raises(ValidationError):
        CPA("A", ["s", "s"], "s", alphabet)
    with pytest.raises(ValidationError):
        CPA("A", ["s"], "t", alphabet)
    with pytest.raises(ValidationError):
        CPA("A", ["s"], "s", alphabet, [Transition("s", "a", dirac("t"))])
    with pytest.raises(ValidationError):
        CPA("A", ["s"], "s", alphabet, [Transition("s", "b", dirac("s"))])

    a = wcc(2, 3, "1/2")
    assert a.enabled("h0") == [1]
    assert a.enabled_with("h2", "recv") == [3]
    assert a.is_mdp()
    with pytest.raises(UnknownState):
        a.require_state("h9")


def test_strong_combined_cost():
    """Test the target and cost of a strong combined transition."""
    t1 = Transition("s", "a", dirac("x"), 0)
    t2 = Transition("s", "a", dirac("y"), 2)
    target, cost = strong_combined_cost([("1/4", t1), ("3/4", t2)])

    assert target == {"x": Fraction(1, 4), "y": Fraction(3, 4)}
    assert cost == Fraction(3, 2)

    with pytest.raises(MixedTransitions):
        strong_combined_cost([("1/2", t1), ("1/2", Transition("s", "b", dirac("x")))])
    with pytest.raises(WeightError):
        strong_combined_cost([])


def test_reachability_and_pruning():
    """Test reachable states and pruning."""
    a = CPA(
        "A",
        ["s", "t", "u"],
        "s",
        Alphabet(("a",)),
        [Transition("s", "a", dirac("t")), Transition("u", "a", dirac("s"))],
    )
    assert reachable_states(a) == ("s", "t")
    assert reachable_states(a, ["u"]) == ("s", "t", "u")

    with pytest.warns(RuntimeWarning):
        pruned = prune_unreachable(a)
    assert pruned.states == ("s", "t")
    assert prune_unreachable(pruned) is pruned


def test_disjoint_union():
    """Test prefixes and provenance of disjoint unions."""
    union = disjoint_union(icc(), wcc(1, 1, 1))

    assert union.starts == ("ICC.s", "WCC.s")
    assert union.side(0) == ("ICC.s", "ICC.h0")
    assert union.side(1) == ("WCC.s", "WCC.h0", "WCC.h1")
    assert union.provenance["WCC.h1"] == (1, "h1")
    assert union.local(1, "h0") == "WCC.h0"
    assert union.automaton.start is None
    assert union.automaton.transitions[0].target == dirac("ICC.h0")

    same = disjoint_union(icc(), icc())
    assert same.starts == ("ICC_1.s", "ICC_2.s")

    # "A." + "x.s" and "A.x." + "s" would both be "A.x.s"
    alphabet = Alphabet(("a",), ())
    dotted = disjoint_union(
        CPA("A", ["x.s", "t"], "t", alphabet), CPA("A.x", ["s"], "s", alphabet)
    )
    assert dotted.side(0) == ("A_1.x.s", "A_1.t")
    assert dotted.side(1) == ("A.x_2.s",)
    assert dotted.provenance["A_1.x.s"] == (0, "x.s")
    assert len(set(dotted.automaton.states)) == 3

    other = CPA("X", ["s"], "s", Alphabet((), ("send",)))
    with pytest.raises(AlphabetClash):
        disjoint_union(icc(), other)


def test_mdp_expected_total_reward():
    """Test the expected reward of a small MDP."""
    m = CPA(
        "M",
        ["s", "t"],
        "s",
        Alphabet(("a",)),
        [Transition("s", "a", Distribution({"s": "1/2", "t": "1/2"}), 2)],
    )
    policy = MdpPolicy(lambda fragment: dirac("a"), 3)

    # 2 + 1/2 * (2 + 1/2 * 2)
    assert mdp_expected_total_reward(m, policy) == Fraction(7, 2)
    assert mdp_expected_total_reward(m, MdpPolicy({}, 0)) == 0
    assert mdp_expected_total_reward(m, policy, start="t") == 0

    with pytest.raises(ValueError):
        MdpPolicy({}, -1)


def test_mdp_rejections():
    """Test that non-MDPs and bad policies are refused."""
    twice = CPA(
        "M",
        ["s"],
        "s",
        Alphabet(("a",)),
        [Transition("s", "a", dirac("s"), 1), Transition("s", "a", dirac("s"), 2)],
    )
    with pytest.raises(NotAnMdp):
        mdp_expected_total_reward(twice, MdpPolicy(lambda f: dirac("a"), 1))

    m = wcc(1, 1, 1)
    with pytest.raises(WeightError):
        mdp_expected_total_reward(m, MdpPolicy(lambda f: dirac("recv"), 1))
