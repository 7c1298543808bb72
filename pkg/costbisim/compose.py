"""
Parallel composition of cost probabilistic automata.

Composed transition costs come from a generator function: a symmetric,
zero-preserving binary function that distributes over convex combinations
and is strictly increasing. Generators live in a catalog so each entry is
certified once, when it is registered.
"""

import logging
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .exceptions import Incompatible, UnknownGenerator, WeightError
from .model import (
    CPA,
    Alphabet,
    Distribution,
    Transition,
    as_rational,
    dirac,
    pair_id,
    product,
)

logger = logging.getLogger(__name__)

# Property names reported by certify()
SYMMETRIC = "symmetric"
ZERO_PRESERVING = "zero-preserving"
DISTRIBUTIVE = "distributive"
MONOTONE = "monotone"

CERTIFY_TRIALS = 200


@dataclass(frozen=True)
class GeneratorFunction:
    """A named cost generator ``f(c1, c2)``."""

    name: str
    fn: Callable[[Fraction, Fraction], Fraction] = field(compare=False, repr=False)

    def __call__(self, x: Fraction, y: Fraction) -> Fraction:
        return Fraction(self.fn(Fraction(x), Fraction(y)))


SUM = GeneratorFunction("sum", lambda x, y: x + y)


def scaled_sum(k) -> GeneratorFunction:
    """The generator ``k·(x+y)`` for a rational ``k > 0``."""
    k = as_rational(k)
    if k <= 0:
        raise ValueError(f"scaled-sum factor must be positive, got {k}")
    return GeneratorFunction(f"scaled-sum:{k}", lambda x, y: k * (x + y))


_CATALOG: Dict[str, GeneratorFunction] = {"sum": SUM}


def _random_cost(rng: random.Random) -> Fraction:
    if rng.random() < 0.15:
        return Fraction(0)
    return Fraction(rng.randint(0, 80), rng.randint(1, 8))


def certify(
    g: GeneratorFunction,
    rng: Optional[random.Random] = None,
    trials: int = CERTIFY_TRIALS,
) -> List[str]:
    """Check the four generator properties on random rational costs.

    Args:
        g: The generator to check
        rng: Random source (seeded for reproducibility)
        trials: Number of random cases per property

    Returns:
        list: Names of the violated properties, empty if all hold
    """
    rng = rng or random.Random(0)
    failed: List[str] = []

    if g(Fraction(0), Fraction(0)) != 0:
        failed.append(ZERO_PRESERVING)

    checks = {SYMMETRIC: True, DISTRIBUTIVE: True, MONOTONE: True}
    for _ in range(trials):
        x, y = _random_cost(rng), _random_cost(rng)
        if g(x, y) != g(y, x):
            checks[SYMMETRIC] = False

        weights = [Fraction(rng.randint(1, 6)) for _ in range(rng.randint(1, 3))]
        total = sum(weights)
        weights = [w / total for w in weights]
        ys = [_random_cost(rng) for _ in weights]
        mixed = g(x, sum(w * v for w, v in zip(weights, ys)))
        if mixed != sum(w * g(x, v) for w, v in zip(weights, ys)):
            checks[DISTRIBUTIVE] = False

        dx, dy = Fraction(rng.randint(1, 16), rng.randint(1, 8)), _random_cost(rng)
        base = g(x, y)
        if not (g(x + dx, y) > base and g(y, x + dx) > g(y, x)):
            checks[MONOTONE] = False
        if not g(x + dx, y + dy) > base:
            checks[MONOTONE] = False

    failed.extend(name for name, ok in checks.items() if not ok)
    return failed


def register_generator(
    g: GeneratorFunction, rng: Optional[random.Random] = None
) -> GeneratorFunction:
    """Certify ``g`` and add it to the catalog under ``g.name``.

    Raises:
        ValueError: If ``g`` violates a generator property
    """
    failed = certify(g, rng)
    if failed:
        raise ValueError(
            f"Generator '{g.name}' is not a valid cost generator: "
            f"violates {', '.join(failed)}"
        )
    _CATALOG[g.name] = g
    logger.debug("Registered generator %s", g.name)
    return g


def parse_generator(text: str) -> GeneratorFunction:
    """Look up ``sum``, ``scaled-sum:<rat>`` or a registered generator name.

    Raises:
        UnknownGenerator: If the name is not in the catalog
    """
    if text.startswith("scaled-sum:"):
        try:
            return scaled_sum(text.split(":", 1)[1])
        except (ValueError, WeightError) as e:
            raise UnknownGenerator(f"Invalid generator '{text}': {e}") from e
    if text in _CATALOG:
        return _CATALOG[text]
    known = ", ".join(sorted(_CATALOG)) + ", scaled-sum:<k>"
    raise UnknownGenerator(f"Unknown generator '{text}'. Known generators: {known}")


def check_compatible(a1: CPA, a2: CPA) -> bool:
    """True iff no action of one automaton is internal to the other."""
    sigma1, sigma2 = set(a1.alphabet.actions), set(a2.alphabet.actions)
    return not (sigma1 & set(a2.alphabet.internal)) and not (
        set(a1.alphabet.internal) & sigma2
    )


def compose_cpa(a1: CPA, a2: CPA, g: GeneratorFunction = SUM) -> CPA:
    """Parallel composition of two CPAs.

    Shared actions synchronise; the others interleave with the idle
    partner contributing an apparent Dirac step of cost 0. A composed
    transition costs ``g(c1, c2)``. Only the part reachable from the
    start pair is built.

    Args:
        a1: First operand
        a2: Second operand
        g: Cost generator, Sum by default

    Returns:
        CPA: The reachable composition over pair-states ``(s1,s2)``

    Raises:
        Incompatible: If the alphabets are not compatible or a start is missing

    Example:
        >>> ab = compose_cpa(a, b, parse_generator("sum"))
    """
    if not check_compatible(a1, a2):
        raise Incompatible(
            f"Automata '{a1.name}' and '{a2.name}' are not compatible: "
            f"an action of one is internal to the other"
        )
    if a1.start is None or a2.start is None:
        raise Incompatible("Composition needs both start states")

    shared = set(a1.alphabet.actions) & set(a2.alphabet.actions)
    external = list(a1.alphabet.external)
    external += [a for a in a2.alphabet.external if a not in external]
    internal = list(a1.alphabet.internal) + list(a2.alphabet.internal)
    zero = Fraction(0)

    def moves(s1: str, s2: str) -> List[Tuple[str, Distribution, Distribution, Fraction]]:
        out = []
        for i in a1.enabled(s1):
            tr1 = a1.transitions[i]
            if tr1.action in shared:
                for j in a2.enabled_with(s2, tr1.action):
                    tr2 = a2.transitions[j]
                    out.append(
                        (tr1.action, tr1.target, tr2.target, g(tr1.cost, tr2.cost))
                    )
            else:
                out.append((tr1.action, tr1.target, dirac(s2), g(tr1.cost, zero)))
        for j in a2.enabled(s2):
            tr2 = a2.transitions[j]
            if tr2.action not in shared:
                out.append((tr2.action, dirac(s1), tr2.target, g(zero, tr2.cost)))
        return out

    start = (a1.start, a2.start)
    names: Dict[str, Tuple[str, str]] = {pair_id(*start): start}
    queue = deque([start])
    transitions: List[Transition] = []
    while queue:
        s1, s2 = queue.popleft()
        for action, left, right, cost in moves(s1, s2):
            transitions.append(
                Transition(pair_id(s1, s2), action, product(left, right), cost)
            )
            for t1 in left:
                for t2 in right:
                    if pair_id(t1, t2) not in names:
                        names[pair_id(t1, t2)] = (t1, t2)
                        queue.append((t1, t2))

    composed = CPA(
        pair_id(a1.name, a2.name),
        list(names),
        pair_id(*start),
        Alphabet(tuple(external), tuple(internal)),
        transitions,
    )
    logger.debug(
        "Composed %s and %s: %d states, %d transitions",
        a1.name,
        a2.name,
        len(composed.states),
        len(transitions),
    )
    return composed

