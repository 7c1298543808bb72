"""
Core data model for cost probabilistic automata.

This module defines exact distributions, partitioned alphabets, costed
transitions and the automaton type itself, together with the distribution
algebra (Dirac, convex combination, product), strong combined transitions,
reachability pruning, disjoint unions and the expected total reward of an
MDP under a horizon-bounded policy.

All numbers are ``fractions.Fraction``; no floating point is used.
"""

import logging
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import (
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import networkx as nx

from .exceptions import (
    AlphabetClash,
    MixedTransitions,
    NotAnMdp,
    UnknownState,
    ValidationError,
    WeightError,
)

logger = logging.getLogger(__name__)

Rational = Fraction

# Surface token for "any internal action"
TAU = "tau"

_TOKEN_CHARS = re.compile(r"[A-Za-z0-9_.'\-]")


def as_rational(value: Union[int, str, Fraction]) -> Fraction:
    """Convert an int, Fraction or "a/b" string to a Fraction.

    Floats are refused: they cannot carry exact probabilities.

    Raises:
        WeightError: If the value is a float or not a valid rational
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise WeightError(f"Exact rational expected, got {value!r}")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise WeightError(f"Invalid rational {value!r}: {e}") from e


def is_valid_id(name: str) -> bool:
    """Check a state or action identifier against the model grammar.

    Identifiers are runs of ``[A-Za-z0-9_.'-]`` characters and
    parenthesised pairs ``(x,y)``; commas may only appear inside
    parentheses and parentheses must balance.
    """
    if not name:
        return False
    depth = 0
    previous = ""
    for ch in name:
        if ch == "(":
            depth += 1
        elif ch == ")":
            if depth == 0 or previous in ("(", ","):
                return False
            depth -= 1
        elif ch == ",":
            if depth == 0 or previous in ("(", ","):
                return False
        elif not _TOKEN_CHARS.match(ch):
            return False
        previous = ch
    return depth == 0


def pair_id(left: str, right: str) -> str:
    """Name of the pair-state (left, right)."""
    return f"({left},{right})"


class Distribution(Mapping[str, Fraction]):
    """Finite-support (sub-)probability distribution over state ids.

    Only strictly positive weights are stored, so the key set is the
    support. Zero weights given at construction are dropped; entries for
    the same state are summed.

    Raises:
        WeightError: On negative weights or a total mass above 1
    """

    __slots__ = ("_weights", "_hash")

    def __init__(
        self,
        weights: Union[
            Mapping[str, Union[int, str, Fraction]],
            Iterable[Tuple[str, Union[int, str, Fraction]]],
        ] = (),
    ):
        items = weights.items() if isinstance(weights, Mapping) else weights
        merged: Dict[str, Fraction] = {}
        for state, raw in items:
            p = as_rational(raw)
            if p < 0:
                raise WeightError(f"Negative probability {p} for state '{state}'")
            if p == 0:
                continue
            merged[state] = merged.get(state, Fraction(0)) + p
        total = sum(merged.values(), Fraction(0))
        if total > 1:
            raise WeightError(f"Distribution mass {total} exceeds 1")
        self._weights = merged
        self._hash = None

    def __getitem__(self, state: str) -> Fraction:
        return self._weights[state]

    def __iter__(self) -> Iterator[str]:
        return iter(self._weights)

    def __len__(self) -> int:
        return len(self._weights)

    def __eq__(self, other) -> bool:
        if isinstance(other, Distribution):
            return self._weights == other._weights
        if isinstance(other, Mapping):
            return self._weights == {k: v for k, v in other.items() if v != 0}
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._weights.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{s}: {p}" for s, p in self._weights.items())
        return f"Distribution({{{body}}})"

    def prob(self, state: str) -> Fraction:
        """Probability of ``state`` (0 outside the support)."""
        return self._weights.get(state, Fraction(0))

    def mass(self) -> Fraction:
        """Total probability mass."""
        return sum(self._weights.values(), Fraction(0))

    def is_full(self) -> bool:
        """True when the mass is exactly 1."""
        return self.mass() == 1

    def support(self) -> Tuple[str, ...]:
        """Support states in insertion order."""
        return tuple(self._weights)

    def set_mass(self, states: Iterable[str]) -> Fraction:
        """Probability of a set of states."""
        return sum((self.prob(s) for s in set(states)), Fraction(0))

    def map_states(self, rename: Callable[[str], str]) -> "Distribution":
        """Image of the distribution under a state renaming."""
        return Distribution((rename(s), p) for s, p in self._weights.items())


def dirac(state: str) -> Distribution:
    """The Dirac distribution on ``state``.

    Example:
        >>> dirac("h0")
        Distribution({h0: 1})
    """
    return Distribution({state: Fraction(1)})


def convex_combine(
    parts: Sequence[Tuple[Union[int, str, Fraction], Distribution]],
) -> Distribution:
    """Convex combination of distributions.

    Args:
        parts: (weight, distribution) pairs with positive weights summing to 1

    Returns:
        Distribution: The combination Σ wᵢ·dᵢ

    Raises:
        WeightError: If a weight is not positive or the weights do not sum to 1

    Example:
        >>> convex_combine([(Fraction(1, 4), dirac("h0")), (Fraction(3, 4), dirac("h1"))])
        Distribution({h0: 1/4, h1: 3/4})
    """
    weights = [as_rational(w) for w, _ in parts]
    if any(w <= 0 for w in weights):
        raise WeightError("Convex combination weights must be positive")
    if sum(weights, Fraction(0)) != 1:
        raise WeightError(
            f"Convex combination weights sum to {sum(weights, Fraction(0))}, not 1"
        )
    combined: List[Tuple[str, Fraction]] = []
    for w, (_, d) in zip(weights, parts):
        combined.extend((s, w * p) for s, p in d.items())
    return Distribution(combined)


def product(d1: Distribution, d2: Distribution) -> Distribution:
    """Product distribution over pair-states ``(x,y)``."""
    return Distribution(
        (pair_id(x, y), p * q) for x, p in d1.items() for y, q in d2.items()
    )


@dataclass(frozen=True)
class Alphabet:
    """Actions split into external and internal (hidden) ones."""

    external: Tuple[str, ...] = ()
    internal: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "external", tuple(self.external))
        object.__setattr__(self, "internal", tuple(self.internal))
        for group in (self.external, self.internal):
            if len(set(group)) != len(group):
                raise ValidationError(f"Duplicate action declaration in {group}")
        clash = set(self.external) & set(self.internal)
        if clash:
            raise ValidationError(
                f"Actions declared both external and internal: {sorted(clash)}"
            )
        for a in self.external + self.internal:
            if a == TAU:
                raise ValidationError("'tau' is reserved and cannot be declared")
            if not is_valid_id(a):
                raise ValidationError(f"Invalid action name: '{a}'")

    @property
    def actions(self) -> Tuple[str, ...]:
        return self.external + self.internal

    def is_external(self, action: str) -> bool:
        return action in self.external

    def is_internal(self, action: str) -> bool:
        return action in self.internal

    def __contains__(self, action: str) -> bool:
        return action in self.external or action in self.internal


@dataclass(frozen=True)
class Transition:
    """A costed transition ``source -action-> target``."""

    source: str
    action: str
    target: Distribution
    cost: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "cost", as_rational(self.cost))
        if self.cost < 0:
            raise ValidationError(
                f"Negative cost {self.cost} on transition from '{self.source}'"
            )
        if not self.target.is_full():
            raise ValidationError(
                f"Target of '{self.source}' -{self.action}-> has mass "
                f"{self.target.mass()}, expected 1"
            )


class CPA:
    """A cost probabilistic automaton.

    A plain probabilistic automaton is a CPA whose costs are all zero.
    ``start`` is None only for disjoint unions, which carry two start
    states in their :class:`DisjointUnion` record.

    Raises:
        ValidationError: If a state, action or start reference is undeclared
    """

    def __init__(
        self,
        name: str,
        states: Sequence[str],
        start: Optional[str],
        alphabet: Alphabet,
        transitions: Sequence[Transition] = (),
    ):
        self.name = name
        self.states: Tuple[str, ...] = tuple(states)
        self.start = start
        self.alphabet = alphabet
        self.transitions: Tuple[Transition, ...] = tuple(transitions)

        seen = set()
        for s in self.states:
            if s in seen:
                raise ValidationError(f"Duplicate state declaration: '{s}'")
            if not is_valid_id(s):
                raise ValidationError(f"Invalid state id: '{s}'")
            seen.add(s)
        self._state_set = frozenset(seen)
        if start is not None and start not in self._state_set:
            raise ValidationError(f"Start state '{start}' is not declared")

        self._enabled: Dict[str, List[int]] = {s: [] for s in self.states}
        for i, tr in enumerate(self.transitions):
            if tr.source not in self._state_set:
                raise ValidationError(f"Undeclared source state '{tr.source}'")
            if tr.action not in alphabet:
                raise ValidationError(f"Undeclared action '{tr.action}'")
            for t in tr.target:
                if t not in self._state_set:
                    raise ValidationError(f"Undeclared target state '{t}'")
            self._enabled[tr.source].append(i)

    def __repr__(self) -> str:
        return (
            f"CPA(name='{self.name}', states={len(self.states)}, "
            f"transitions={len(self.transitions)}, start={self.start!r})"
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, CPA):
            return NotImplemented
        return (
            self.name == other.name
            and self.states == other.states
            and self.start == other.start
            and self.alphabet == other.alphabet
            and self.transitions == other.transitions
        )

    __hash__ = None

    def has_state(self, state: str) -> bool:
        return state in self._state_set

    def require_state(self, state: str) -> None:
        """Raise UnknownState unless ``state`` is declared."""
        if state not in self._state_set:
            raise UnknownState(state=state)

    def enabled(self, state: str) -> List[int]:
        """Indices of the transitions leaving ``state``, in declaration order."""
        return self._enabled[state]

    def enabled_with(self, state: str, action: str) -> List[int]:
        """Indices of ``action``-labelled transitions leaving ``state``."""
        return [i for i in self._enabled[state] if self.transitions[i].action == action]

    def is_internal(self, tr: Transition) -> bool:
        return self.alphabet.is_internal(tr.action)

    def is_mdp(self) -> bool:
        return all(
            len({self.transitions[i].action for i in idx}) == len(idx)
            for idx in self._enabled.values()
        )

    def replace(self, **changes) -> "CPA":
        """Copy with some fields replaced."""
        fields = {
            "name": self.name,
            "states": self.states,
            "start": self.start,
            "alphabet": self.alphabet,
            "transitions": self.transitions,
        }
        fields.update(changes)
        return CPA(**fields)


def transition_graph(a: CPA) -> nx.DiGraph:
    """State graph with an edge s -> t for every transition from s reaching t."""
    g = nx.DiGraph()
    g.add_nodes_from(a.states)
    for tr in a.transitions:
        g.add_edges_from((tr.source, t) for t in tr.target)
    return g


def reachable_states(a: CPA, starts: Optional[Iterable[str]] = None) -> Tuple[str, ...]:
    """States reachable from the start state(s), in declaration order."""
    roots = list(starts) if starts is not None else [a.start]
    if any(r is None for r in roots):
        return a.states
    g = transition_graph(a)
    seen = set(roots)
    for r in roots:
        seen |= nx.descendants(g, r)
    return tuple(s for s in a.states if s in seen)


def prune_unreachable(a: CPA) -> CPA:
    """Drop states not reachable from the start state.

    A RuntimeWarning names the pruned states. Automata without a start
    state are returned unchanged.
    """
    if a.start is None:
        return a
    keep = reachable_states(a)
    if len(keep) == len(a.states):
        return a
    kept = set(keep)
    pruned = [s for s in a.states if s not in kept]
    logger.warning("Pruning unreachable states of %s: %s", a.name, pruned)
    warnings.warn(
        f"Automaton '{a.name}': pruned unreachable states {', '.join(pruned)}",
        RuntimeWarning,
    )
    return a.replace(
        states=keep,
        transitions=[tr for tr in a.transitions if tr.source in kept],
    )


def strong_combined_cost(
    components: Sequence[Tuple[Union[int, str, Fraction], Transition]],
) -> Tuple[Distribution, Fraction]:
    """Target and cost of a strong combined transition.

    Args:
        components: (weight, transition) pairs sharing source and action

    Returns:
        tuple: (Σ pᵢ·μᵢ, Σ pᵢ·c(trᵢ))

    Raises:
        MixedTransitions: If the transitions differ in source or action
        WeightError: If the weights are not a convex combination
    """
    if not components:
        raise WeightError("A combined transition needs at least one component")
    first = components[0][1]
    for _, tr in components:
        if (tr.source, tr.action) != (first.source, first.action):
            raise MixedTransitions(
                f"Cannot combine '{first.source}' -{first.action}-> with "
                f"'{tr.source}' -{tr.action}->"
            )
    target = convex_combine([(w, tr.target) for w, tr in components])
    cost = sum(
        (as_rational(w) * tr.cost for w, tr in components), Fraction(0)
    )
    return target, cost


Fragment = Tuple[str, ...]


@dataclass(frozen=True)
class MdpPolicy:
    """Horizon-bounded policy of an MDP.

    ``choice`` maps an execution fragment (alternating states and actions,
    starting and ending with a state) to a distribution over the actions
    enabled in its last state. It may be a mapping or a callable.
    """

    choice: Union[Mapping[Fragment, Distribution], Callable[[Fragment], Distribution]]
    horizon: int

    def __post_init__(self):
        if self.horizon < 0:
            raise ValueError("Policy horizon must be nonnegative")

    def decide(self, fragment: Fragment) -> Distribution:
        if callable(self.choice):
            return self.choice(fragment)
        return self.choice[fragment]


def check_mdp(m: CPA) -> None:
    """Raise NotAnMdp if some state enables two same-action transitions."""
    for s in m.states:
        actions = [m.transitions[i].action for i in m.enabled(s)]
        for a in actions:
            if actions.count(a) > 1:
                raise NotAnMdp(state=s, action=a)


def policy_step(m: CPA, fragment: Fragment, policy: MdpPolicy) -> Dict[str, Fraction]:
    """Validated action distribution of ``policy`` after ``fragment``.

    Returns an empty dict when the last state enables nothing.

    Raises:
        WeightError: If the choice is not a full distribution over enabled actions
    """
    state = fragment[-1]
    enabled = {m.transitions[i].action for i in m.enabled(state)}
    if not enabled:
        return {}
    choice = policy.decide(fragment)
    if not choice.is_full():
        raise WeightError(
            f"Policy choice at {fragment} has mass {choice.mass()}, expected 1"
        )
    stray = [a for a in choice if a not in enabled]
    if stray:
        raise WeightError(f"Policy chooses disabled actions {stray} at {fragment}")
    return dict(choice.items())


def mdp_expected_total_reward(
    m: CPA, policy: MdpPolicy, start: Optional[str] = None
) -> Fraction:
    """Expected total reward of ``m`` under ``policy`` up to its horizon.

    Rewards are the transition costs. A fragment reaching a state with no
    enabled action before the horizon keeps the reward collected so far.

    Args:
        m: The MDP (at most one transition per state and action)
        policy: Policy with horizon N
        start: Initial state, defaults to ``m.start``

    Returns:
        Fraction: Σ over fragments of length N of reward times probability

    Raises:
        NotAnMdp: If ``m`` is not an MDP
    """
    check_mdp(m)
    origin = start if start is not None else m.start
    m.require_state(origin)
    by_action = {
        (tr.source, tr.action): tr for tr in m.transitions
    }

    def expected(fragment: Fragment, steps_left: int) -> Fraction:
        if steps_left == 0:
            return Fraction(0)
        state = fragment[-1]
        total = Fraction(0)
        for action, p in policy_step(m, fragment, policy).items():
            tr = by_action[(state, action)]
            future = sum(
                (
                    q * expected(fragment + (action, t), steps_left - 1)
                    for t, q in tr.target.items()
                ),
                Fraction(0),
            )
            total += p * (tr.cost + future)
        return total

    return expected((origin,), policy.horizon)


@dataclass
class DisjointUnion:
    """Disjoint union of two automata.

    ``provenance`` maps each union state to (side, original state) with
    side 0 for the first operand and 1 for the second.
    """

    automaton: CPA
    provenance: Dict[str, Tuple[int, str]]
    starts: Tuple[str, str]
    prefixes: Tuple[str, str] = field(default=("", ""))

    def side(self, index: int) -> Tuple[str, ...]:
        """Union states coming from operand ``index``, in order."""
        return tuple(
            s for s in self.automaton.states if self.provenance[s][0] == index
        )

    def local(self, index: int, state: str) -> str:
        """Union name of state ``state`` of operand ``index``."""
        return self.prefixes[index] + state


def merge_alphabets(a1: CPA, a2: CPA) -> Alphabet:
    """Union of two alphabets.

    Raises:
        AlphabetClash: If an action is external in one and internal in the other
    """
    clash = (set(a1.alphabet.external) & set(a2.alphabet.internal)) | (
        set(a1.alphabet.internal) & set(a2.alphabet.external)
    )
    if clash:
        raise AlphabetClash(actions=clash)
    external = list(a1.alphabet.external)
    external += [a for a in a2.alphabet.external if a not in external]
    internal = list(a1.alphabet.internal)
    internal += [a for a in a2.alphabet.internal if a not in internal]
    return Alphabet(tuple(external), tuple(internal))


def _prefixes_collide(a1: CPA, a2: CPA, prefixes: Tuple[str, str]) -> bool:
    left = {prefixes[0] + s for s in a1.states}
    return any(prefixes[1] + s in left for s in a2.states)


def disjoint_union(a1: CPA, a2: CPA) -> DisjointUnion:
    """Disjoint union with states prefixed by their automaton name.

    Operands with the same name get ``<name>_1.`` and ``<name>_2.``
    prefixes, otherwise ``<name>.``. When the plain prefixes make two
    state names equal (a name plus a dot that starts the other side's
    state ids) the numbered prefixes are used instead.

    Raises:
        AlphabetClash: If the alphabet partitions disagree
        ValidationError: If an operand has no start state
    """
    alphabet = merge_alphabets(a1, a2)
    if a1.start is None or a2.start is None:
        raise ValidationError("Both operands of a union need a start state")
    numbered = (f"{a1.name}_1.", f"{a2.name}_2.")
    prefixes = numbered if a1.name == a2.name else (f"{a1.name}.", f"{a2.name}.")
    if _prefixes_collide(a1, a2, prefixes):
        logger.debug("State names of %s and %s collide; numbering the sides", a1.name, a2.name)
        prefixes = numbered

    states: List[str] = []
    transitions: List[Transition] = []
    provenance: Dict[str, Tuple[int, str]] = {}
    for side, (a, prefix) in enumerate(zip((a1, a2), prefixes)):
        for s in a.states:
            states.append(prefix + s)
            provenance[prefix + s] = (side, s)
        for tr in a.transitions:
            transitions.append(
                Transition(
                    prefix + tr.source,
                    tr.action,
                    tr.target.map_states(lambda t, p=prefix: p + t),
                    tr.cost,
                )
            )
    union = CPA(f"{a1.name}+{a2.name}", states, None, alphabet, transitions)
    return DisjointUnion(
        union,
        provenance,
        (prefixes[0] + a1.start, prefixes[1] + a2.start),
        prefixes,
    )
