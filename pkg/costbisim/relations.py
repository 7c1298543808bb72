"""
Relations, partitions and the lifting of relations to distributions.

A :class:`BinaryRelation` is a directed relation between two state
universes; a :class:`Partition` is an equivalence over one universe kept in
canonical order. Lifting is decided exactly by an integer max-flow on the
bipartite support network.
"""

import logging
import math
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Optional, Sequence, Tuple

import networkx as nx
from networkx.algorithms.flow import edmonds_karp
from networkx.utils import UnionFind

from .exceptions import UniverseMismatch
from .model import Distribution, pair_id

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]

_SOURCE = ("source",)
_SINK = ("sink",)


def _ordered(states: Iterable[str]) -> Tuple[str, ...]:
    seen = {}
    for s in states:
        seen.setdefault(s, None)
    return tuple(seen)


class BinaryRelation:
    """A relation ``pairs ⊆ left × right``.

    Iteration follows the order of the universes (left first), so witness
    output is reproducible.

    Raises:
        UniverseMismatch: If a pair leaves the declared universes
    """

    def __init__(
        self,
        pairs: Iterable[Pair],
        left: Iterable[str],
        right: Iterable[str],
    ):
        self.left = _ordered(left)
        self.right = _ordered(right)
        self._left_pos = {s: i for i, s in enumerate(self.left)}
        self._right_pos = {s: i for i, s in enumerate(self.right)}
        pairs = frozenset(pairs)
        for x, y in pairs:
            if x not in self._left_pos or y not in self._right_pos:
                raise UniverseMismatch(
                    f"Pair ({x}, {y}) is outside the relation universes"
                )
        self.pairs = pairs
        self._succ: Dict[str, Tuple[str, ...]] = {}
        for x, y in sorted(pairs, key=self._key):
            self._succ[x] = self._succ.get(x, ()) + (y,)

    def _key(self, pair: Pair) -> Tuple[int, int]:
        return self._left_pos[pair[0]], self._right_pos[pair[1]]

    @classmethod
    def identity(cls, states: Iterable[str]) -> "BinaryRelation":
        states = _ordered(states)
        return cls(((s, s) for s in states), states, states)

    @classmethod
    def full(cls, left: Iterable[str], right: Iterable[str]) -> "BinaryRelation":
        left, right = _ordered(left), _ordered(right)
        return cls(((x, y) for x in left for y in right), left, right)

    def __contains__(self, pair: Pair) -> bool:
        return pair in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.pairs, key=self._key))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryRelation):
            return NotImplemented
        return (
            self.pairs == other.pairs
            and set(self.left) == set(other.left)
            and set(self.right) == set(other.right)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"BinaryRelation({len(self.pairs)} pairs, {len(self.left)}x{len(self.right)})"

    def related(self, x: str, y: str) -> bool:
        return (x, y) in self.pairs

    def successors(self, x: str) -> Tuple[str, ...]:
        """States related to ``x``, in right-universe order."""
        return self._succ.get(x, ())

    def image(self, states: Iterable[str]) -> Tuple[str, ...]:
        found = {y for x in states for y in self.successors(x)}
        return tuple(y for y in self.right if y in found)

    def domain(self) -> Tuple[str, ...]:
        return tuple(x for x in self.left if x in self._succ)

    def inverse(self) -> "BinaryRelation":
        return BinaryRelation(((y, x) for x, y in self.pairs), self.right, self.left)

    def restrict(
        self,
        left: Optional[Iterable[str]] = None,
        right: Optional[Iterable[str]] = None,
    ) -> "BinaryRelation":
        """Pairs whose sides lie in the given subsets; universes shrink accordingly."""
        new_left = self.left if left is None else tuple(
            s for s in self.left if s in set(left)
        )
        new_right = self.right if right is None else tuple(
            s for s in self.right if s in set(right)
        )
        keep_l, keep_r = set(new_left), set(new_right)
        return BinaryRelation(
            ((x, y) for x, y in self.pairs if x in keep_l and y in keep_r),
            new_left,
            new_right,
        )

    def intersection(self, other: "BinaryRelation") -> "BinaryRelation":
        return BinaryRelation(self.pairs & other.pairs, self.left, self.right)

    def without(self, pairs: Iterable[Pair]) -> "BinaryRelation":
        return BinaryRelation(self.pairs - set(pairs), self.left, self.right)


class Partition:
    """Equivalence classes over a universe, stored canonically.

    Members of a class follow the universe order; classes are ordered by
    their first member. The universe order defaults to first appearance.

    Raises:
        UniverseMismatch: If classes overlap, are empty or miss universe states
    """

    def __init__(
        self,
        classes: Iterable[Iterable[str]],
        universe: Optional[Sequence[str]] = None,
    ):
        classes = [list(c) for c in classes]
        order = _ordered(
            universe if universe is not None else (s for c in classes for s in c)
        )
        pos = {s: i for i, s in enumerate(order)}
        index: Dict[str, int] = {}
        for c in classes:
            if not c:
                raise UniverseMismatch("Partition classes must be nonempty")
            for s in c:
                if s not in pos:
                    raise UniverseMismatch(f"State '{s}' is outside the universe")
                if s in index:
                    raise UniverseMismatch(f"State '{s}' appears in two classes")
                index[s] = -1
        if len(index) != len(order):
            missing = [s for s in order if s not in index]
            raise UniverseMismatch(f"Partition does not cover {missing}")

        canonical = sorted(
            (tuple(sorted(set(c), key=pos.__getitem__)) for c in classes),
            key=lambda c: pos[c[0]],
        )
        self.universe = order
        self.classes: Tuple[Tuple[str, ...], ...] = tuple(canonical)
        self.index = {s: i for i, c in enumerate(self.classes) for s in c}

    @classmethod
    def single(cls, universe: Sequence[str]) -> "Partition":
        """The one-class partition (empty universe gives no classes)."""
        return cls([universe] if universe else [], universe)

    @classmethod
    def discrete(cls, universe: Sequence[str]) -> "Partition":
        return cls(([s] for s in universe), universe)

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self) -> Iterator[Tuple[str, ...]]:
        return iter(self.classes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return set(self.universe) == set(other.universe) and {
            frozenset(c) for c in self.classes
        } == {frozenset(c) for c in other.classes}

    __hash__ = None

    def __repr__(self) -> str:
        body = " | ".join(" ".join(c) for c in self.classes)
        return f"Partition({body})"

    def class_of(self, state: str) -> Tuple[str, ...]:
        return self.classes[self.index[state]]

    def same_class(self, x: str, y: str) -> bool:
        return self.index[x] == self.index[y]

    def as_relation(self) -> BinaryRelation:
        """The equivalence as a relation over universe × universe."""
        return BinaryRelation(
            ((x, y) for c in self.classes for x in c for y in c),
            self.universe,
            self.universe,
        )

    def split(self, block: int, inside: Iterable[str]) -> "Partition":
        """Replace class ``block`` by its parts inside and outside ``inside``."""
        inside = set(inside)
        parts = []
        for i, c in enumerate(self.classes):
            if i != block:
                parts.append(c)
                continue
            kept = [s for s in c if s in inside]
            rest = [s for s in c if s not in inside]
            parts.extend(p for p in (kept, rest) if p)
        return Partition(parts, self.universe)

    def merge(self, first: int, second: int) -> "Partition":
        """Partition with two classes joined."""
        parts = [c for i, c in enumerate(self.classes) if i not in (first, second)]
        parts.append(self.classes[first] + self.classes[second])
        return Partition(parts, self.universe)


class WeightingFunction(dict):
    """Weighting function witnessing a lifting ``μ L(R) ν``.

    A dict from (x, y) to the strictly positive mass moved from x to y.
    """

    def satisfies(
        self, r: BinaryRelation, mu: Distribution, nu: Distribution
    ) -> bool:
        """Check the weighting conditions exactly by summation."""
        rows: Dict[str, Fraction] = {}
        cols: Dict[str, Fraction] = {}
        for (x, y), w in self.items():
            if w <= 0 or (x, y) not in r:
                return False
            rows[x] = rows.get(x, Fraction(0)) + w
            cols[y] = cols.get(y, Fraction(0)) + w
        return rows == dict(mu.items()) and cols == dict(nu.items())


def lift_check(
    r: BinaryRelation, mu: Distribution, nu: Distribution
) -> Optional[WeightingFunction]:
    """Decide ``μ L(R) ν`` and return a weighting function when it holds.

    Probabilities are scaled to integers by the least common multiple of
    their denominators; the lifting holds iff the max-flow of the bipartite
    network saturates the scaled mass.

    Args:
        r: Relation between the supports' universes
        mu: Distribution over ``r.left``
        nu: Distribution over ``r.right``

    Returns:
        WeightingFunction or None: A witness, or None if the lifting fails

    Raises:
        UniverseMismatch: If a support leaves its universe

    Example:
        >>> rel = BinaryRelation([("x", "y")], ["x"], ["y"])
        >>> lift_check(rel, dirac("x"), dirac("y"))
        {('x', 'y'): Fraction(1, 1)}
    """
    left, right = set(r.left), set(r.right)
    for s in mu:
        if s not in left:
            raise UniverseMismatch(f"State '{s}' of μ is outside the left universe")
    for s in nu:
        if s not in right:
            raise UniverseMismatch(f"State '{s}' of ν is outside the right universe")

    mass = mu.mass()
    if mass != nu.mass():
        return None
    if mass == 0:
        return WeightingFunction()

    scale = math.lcm(*(p.denominator for p in list(mu.values()) + list(nu.values())))
    g = nx.DiGraph()
    for x, p in mu.items():
        g.add_edge(_SOURCE, ("L", x), capacity=int(p * scale))
    for x in mu:
        for y in r.successors(x):
            if y in nu:
                g.add_edge(("L", x), ("R", y))
    for y, q in nu.items():
        g.add_edge(("R", y), _SINK, capacity=int(q * scale))

    if not g.has_node(_SINK) or not g.has_node(_SOURCE):
        return None
    value, flows = nx.maximum_flow(g, _SOURCE, _SINK, flow_func=edmonds_karp)
    if value != mass * scale:
        return None

    weighting = WeightingFunction()
    for x in mu:
        for (_, y), f in flows[("L", x)].items():
            if f > 0:
                weighting[(x, y)] = Fraction(f, scale)
    return weighting


def relation_compose(r1: BinaryRelation, r2: BinaryRelation) -> BinaryRelation:
    """The composition ``{(x,z) : ∃y. x r1 y r2 z}``.

    Raises:
        UniverseMismatch: If r1's right universe is not r2's left universe
    """
    if set(r1.right) != set(r2.left):
        raise UniverseMismatch("Composed relations must share the middle universe")
    pairs = {(x, z) for x, y in r1.pairs for z in r2.successors(y)}
    return BinaryRelation(pairs, r1.left, r2.right)


def equivalence_compose(p1: Partition, p2: Partition) -> Partition:
    """Composition of equivalences on X∪Y and Y∪Z, an equivalence on X∪Z.

    The result is the smallest equivalence containing the pairs linked
    through a shared middle state, the p1-pairs inside X and the
    p2-pairs inside Z.

    Raises:
        UniverseMismatch: If the universes share no middle state
    """
    middle = set(p1.universe) & set(p2.universe)
    if not middle:
        raise UniverseMismatch("Composed partitions must share a middle universe")
    xs = [s for s in p1.universe if s not in middle]
    zs = [s for s in p2.universe if s not in middle]
    uf = UnionFind(xs + zs)
    for y in (s for s in p1.universe if s in middle):
        for x in p1.class_of(y):
            if x in middle:
                continue
            for z in p2.class_of(y):
                if z not in middle:
                    uf.union(x, z)
    for cls, side in ((p1, set(xs)), (p2, set(zs))):
        for c in cls.classes:
            members = [s for s in c if s in side]
            if members:
                uf.union(*members)
    return Partition(uf.to_sets(), xs + zs)


def cross_identity(r: BinaryRelation, third: Iterable[str]) -> BinaryRelation:
    """The cross-product ``R × I`` relating ``(w,y)`` to ``(x,y)`` when ``w R x``."""
    third = _ordered(third)
    return BinaryRelation(
        ((pair_id(w, y), pair_id(x, y)) for w, x in r.pairs for y in third),
        (pair_id(w, y) for w in r.left for y in third),
        (pair_id(x, y) for x in r.right for y in third),
    )
