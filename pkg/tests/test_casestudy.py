"""
Tests for the wireless channel trade-off: many short hops against few long ones.
"""

from fractions import Fraction

import pytest

from costbisim.bisim import border_states, decide_minor_weak, verify_witness
from costbisim.flownet import build_mincost_lp, build_network
from costbisim.model import dirac
from costbisim.relations import BinaryRelation

from .models import wcc


def min_cost(autom, t, a, target):
    net = build_network(t, a, dirac(target), BinaryRelation.identity(autom.states), autom)
    return build_mincost_lp(net).solve().value


@pytest.mark.parametrize(
    "fixture, last, to_border",
    [("a23", "h2", 37), ("a32", "k3", 25)],
)
def test_send_to_border(request, fixture, last, to_border):
    """Test the cost of sending and crossing every hop."""
    autom = request.getfixturevalue(fixture)
    assert min_cost(autom, "s", "send", last) == to_border
    # The round trip costs one more for the recv
    assert min_cost(autom, last, "recv", "s") == 1


def test_three_short_hops_are_cheaper(a23, a32):
    """Test that the three-hop channel is a cost minor of the two-hop one."""
    verdict = decide_minor_weak(a32, a23)

    assert verdict.holds
    assert verdict.cost_relation.related("A23.s", "A32.s")
    assert border_states(verdict.union.automaton, verdict.partition) == (
        "A32.s",
        "A32.k3",
        "A23.s",
        "A23.h2",
    )

    send = next(c for c in verdict.cost_checks if c.challenger == "A23.s")
    assert send.defender == "A32.s"
    assert send.cost == 25
    assert send.bound == 37
    assert send.passed


def test_minor_pass_removes_slow_partners(a23, a32):
    """Test that partners too far from the border lose their pairs."""
    verdict = decide_minor_weak(a32, a23)

    assert verdict.removed_pairs == [
        ("A23.h1", "A32.k0"),
        ("A23.h2", "A32.k0"),
        ("A23.h2", "A32.k1"),
        ("A23.h2", "A32.k2"),
    ]
    assert verdict.cost_relation.successors("A23.h2") == ("A32.k3",)
    assert verdict.cost_relation.successors("A23.h1") == ("A32.k1", "A32.k2", "A32.k3")
    assert all(c.passed for c in verdict.cost_checks)


def test_two_long_hops_are_not_cheaper(a23, a32):
    """Test that the reverse direction fails on the send."""
    verdict = decide_minor_weak(a23, a32)

    assert not verdict.holds
    assert verdict.witness is None
    assert ("A32.s", "A23.s") in verdict.removed_pairs
    assert any("cost 37 > 25" in d.condition for d in verdict.diagnostics)


def test_witness_of_the_minor_verdict(a23, a32):
    """Test that the cost witness re-validates through schedulers."""
    verdict = decide_minor_weak(a32, a23)
    assert verify_witness(verdict, a32, a23)


def test_lossy_long_hops(a32):
    """Test the same verdicts when the long hops succeed with probability 3/4."""
    long_hops = wcc(2, 5, Fraction(3, 4), name="A25")

    verdict = decide_minor_weak(a32, long_hops)
    assert verdict.holds
    send = next(c for c in verdict.cost_checks if c.challenger == "A25.s")
    assert send.bound == Fraction(203, 3)
    assert send.cost == 25

    assert not decide_minor_weak(long_hops, a32).holds
