"""
Bisimulation decision procedures for cost probabilistic automata.

Every relation is decided on the disjoint union of the two automata by
partition refinement: FindSplit looks for a challenger transition that a
class-mate cannot match, Refine splits the class accordingly. The step
test is what distinguishes the relations. The minor-cost variants refine
with the plain test and then run a second fixpoint over the directed cost
relation.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

from .config import get_config
from .exceptions import DegenerateSplit, NoSuchTransitions, NonTerminating
from .flownet import (
    CostBound,
    VertexKind,
    add_cost_constraint,
    build_feasibility_lp,
    build_hyper_instance,
    build_mincost_lp,
    build_network,
    build_strongprob_lp,
)
from .lp import SolveStats
from .model import (
    CPA,
    TAU,
    DisjointUnion,
    Distribution,
    Transition,
    convex_combine,
    dirac,
    disjoint_union,
)
from .relations import BinaryRelation, Partition, lift_check
from .sched import extract_scheduler, scheduler_cost, scheduler_target

logger = logging.getLogger(__name__)

T = TypeVar("T")


class Relation(Enum):
    STRONG = "strong"
    STRONG_PROB = "strong-prob"
    WEAK_PROB = "weak-prob"


class CostMode(Enum):
    PLAIN = "none"
    PRESERVING = "preserving"
    MINOR = "minor"


@dataclass(frozen=True)
class Split:
    """A FindSplit result: class ``block`` fails to match ``action``/``target``.

    ``challenger`` is the index of the union transition that produced it.
    """

    block: int
    action: str
    target: Distribution
    challenger: int


@dataclass(frozen=True)
class Diagnostic:
    challenger: str
    defender: str
    condition: str

    def __str__(self) -> str:
        return f"{self.challenger} vs {self.defender}: {self.condition}"


@dataclass(frozen=True)
class CostCheck:
    """One defender response of a minor-cost pass."""

    challenger: str
    transition: int
    defender: str
    cost: Optional[Fraction]
    bound: Fraction
    condition: str

    @property
    def passed(self) -> bool:
        return self.cost is not None and self.cost <= self.bound


@dataclass
class Verdict:
    """Outcome of a decision.

    ``partition`` is the computed equivalence W over the union states and
    ``cost_relation`` the directed relation R_c ⊆ W ∩ (S2 × S1).
    """

    relation: Relation
    cost_mode: CostMode
    holds: bool
    union: DisjointUnion
    partition: Partition
    cost_relation: BinaryRelation
    diagnostics: List[Diagnostic] = field(default_factory=list)
    removed_pairs: List[Tuple[str, str]] = field(default_factory=list)
    cost_checks: List[CostCheck] = field(default_factory=list)
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def witness(self) -> Optional[Tuple[Partition, BinaryRelation]]:
        return (self.partition, self.cost_relation) if self.holds else None

    def __bool__(self) -> bool:
        return self.holds


# (challenger transition index, defender state, current relation) -> matched?
StepTest = Callable[[int, str, BinaryRelation], bool]


def _describe(tr: Transition) -> str:
    target = ", ".join(f"{s}:{p}" for s, p in tr.target.items())
    return f"{tr.source} -{tr.action}-> {{{target}}}"


def _parallel_map(fn: Callable[[T], bool], items: Sequence[T]) -> List[bool]:
    workers = get_config().worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def border_states(autom: CPA, w: Partition) -> Tuple[str, ...]:
    """States enabling an external transition or one that leaves their class."""
    border = []
    for s in autom.states:
        block = w.class_of(s)
        for i in autom.enabled(s):
            tr = autom.transitions[i]
            if autom.alphabet.is_external(tr.action) or tr.target.set_mass(block) < 1:
                border.append(s)
                break
    return tuple(border)


def weak_test(autom: CPA, stats: Optional[SolveStats] = None) -> StepTest:
    """Feasibility of L(t, a, μ, W)."""

    def test(i: int, t: str, rel: BinaryRelation) -> bool:
        tr = autom.transitions[i]
        lp = build_feasibility_lp(build_network(t, tr.action, tr.target, rel, autom))
        return lp.solve(stats).feasible

    return test


def _step_test(
    relation: Relation, cost_mode: CostMode, autom: CPA, stats: SolveStats
) -> StepTest:
    """Symmetric step test; minor mode is checked afterwards on the quotient."""
    if relation is Relation.WEAK_PROB:
        if cost_mode is CostMode.PLAIN:
            return weak_test(autom, stats)

        def weak_preserving(i: int, t: str, rel: BinaryRelation) -> bool:
            tr = autom.transitions[i]
            net = build_network(t, tr.action, tr.target, rel, autom)
            lp = add_cost_constraint(build_mincost_lp(net), tr.cost, CostBound.EQUAL)
            return lp.solve(stats).feasible

        return weak_preserving

    if relation is Relation.STRONG_PROB:

        def strong_prob(i: int, t: str, rel: BinaryRelation) -> bool:
            tr = autom.transitions[i]
            bound = tr.cost if cost_mode is CostMode.PRESERVING else None
            try:
                lp = build_strongprob_lp(t, tr.action, tr.target, rel, autom, bound)
            except NoSuchTransitions:
                return False
            return lp.solve(stats).feasible

        return strong_prob

    def strong(i: int, t: str, rel: BinaryRelation) -> bool:
        tr = autom.transitions[i]
        for j in autom.enabled_with(t, tr.action):
            other = autom.transitions[j]
            if cost_mode is CostMode.PRESERVING and other.cost != tr.cost:
                continue
            if lift_check(rel, tr.target, other.target) is not None:
                return True
        return False

    return strong


def find_split(
    u: CPA, w: Partition, test: Optional[StepTest] = None
) -> Optional[Split]:
    """First challenger transition (declaration order) a class-mate cannot match.

    Args:
        u: The (union) automaton
        w: Current partition of its states
        test: Step test, weak probabilistic feasibility by default

    Returns:
        Split or None: The failing class triple, or None at the fixpoint
    """
    test = test or weak_test(u)
    rel = w.as_relation()
    for i, tr in enumerate(u.transitions):
        mates = [t for t in w.class_of(tr.source) if t != tr.source]
        results = _parallel_map(lambda t: test(i, t, rel), mates)
        for t, ok in zip(mates, results):
            if not ok:
                logger.debug("Split: %s not matched by %s", _describe(tr), t)
                return Split(w.index[tr.source], tr.action, tr.target, i)
    return None


def refine(
    w: Partition, split: Split, u: CPA, test: Optional[StepTest] = None
) -> Partition:
    """Split the class of ``split`` into the states that match it and the rest.

    Raises:
        DegenerateSplit: If every state, or none, matches
    """
    test = test or weak_test(u)
    rel = w.as_relation()
    block = w.classes[split.block]
    results = _parallel_map(lambda t: test(split.challenger, t, rel), list(block))
    inside = [t for t, ok in zip(block, results) if ok]
    if not inside or len(inside) == len(block):
        raise DegenerateSplit(
            f"Class of {block[0]} does not split on {_describe(u.transitions[split.challenger])}"
        )
    logger.debug("Refine class %d: %d of %d states match", split.block, len(inside), len(block))
    return w.split(split.block, inside)


def _refine_to_fixpoint(
    u: CPA, test: StepTest, diagnostics: Optional[List[Diagnostic]] = None
) -> Partition:
    w = Partition.single(u.states)
    rounds = 0
    while True:
        split = find_split(u, w, test)
        if split is None:
            break
        if diagnostics is not None:
            tr = u.transitions[split.challenger]
            diagnostics.append(
                Diagnostic(_describe(tr), f"class of {tr.source}", "no matching transition")
            )
        w = refine(w, split, u, test)
        rounds += 1
    logger.debug("Quotient of %s: %d classes after %d refinements", u.name, len(w), rounds)
    return w


def quotient(u: CPA, test: Optional[StepTest] = None) -> Partition:
    """Coarsest weak probabilistic bisimulation partition of ``u``'s states."""
    return _refine_to_fixpoint(u, test or weak_test(u))


def _cost_pairs(union: DisjointUnion, w: Partition) -> BinaryRelation:
    s1, s2 = union.side(0), union.side(1)
    return BinaryRelation(
        ((x, y) for x in s2 for y in w.class_of(x) if union.provenance[y][0] == 0), s2, s1
    )


def _strong_response_cost(
    relation: Relation,
    tr: Transition,
    s1: str,
    r_c: BinaryRelation,
    autom: CPA,
    stats: SolveStats,
) -> Optional[Fraction]:
    """Cheapest strong (or strong combined) answer of ``s1`` lifting over ``r_c``."""
    if relation is Relation.STRONG_PROB:
        try:
            lp = build_strongprob_lp(s1, tr.action, tr.target, r_c, autom)
        except NoSuchTransitions:
            return None
        lp.objective = dict(lp.cost)
        lp.minimize = True
        sol = lp.solve(stats)
        return sol.value if sol.feasible else None
    costs = [
        other.cost
        for other in (autom.transitions[j] for j in autom.enabled_with(s1, tr.action))
        if lift_check(r_c, tr.target, other.target) is not None
    ]
    return min(costs) if costs else None


def _minor_strong_pass(
    union: DisjointUnion,
    w: Partition,
    relation: Relation,
    stats: SolveStats,
    diagnostics: List[Diagnostic],
) -> Tuple[BinaryRelation, List[Tuple[str, str]], List[CostCheck]]:
    """Remove pairs of W ∩ (S2 × S1) whose cheap state answers too expensively."""
    autom = union.automaton
    r_c = _cost_pairs(union, w)
    removed: List[Tuple[str, str]] = []
    checks: Dict[Tuple[int, str], CostCheck] = {}
    challengers = [
        i for i, tr in enumerate(autom.transitions) if union.provenance[tr.source][0] == 1
    ]
    condition = "combined response" if relation is Relation.STRONG_PROB else "single response"
    while True:
        failed: List[Tuple[str, str]] = []
        for i in challengers:
            tr = autom.transitions[i]
            for s1 in r_c.successors(tr.source):
                cost = _strong_response_cost(relation, tr, s1, r_c, autom, stats)
                check = CostCheck(tr.source, i, s1, cost, tr.cost, condition)
                checks[(i, s1)] = check
                if not check.passed:
                    failed.append((tr.source, s1))
                    diagnostics.append(
                        Diagnostic(
                            _describe(tr),
                            s1,
                            f"{condition}: "
                            + ("none" if cost is None else f"cost {cost} > {tr.cost}"),
                        )
                    )
        if not failed:
            break
        failed = list(dict.fromkeys(failed))
        logger.debug("Minor cost pass removed %d pairs", len(failed))
        removed += failed
        r_c = r_c.without(failed)
    final_checks = [c for (i, s1), c in checks.items() if r_c.related(c.challenger, s1)]
    return r_c, removed, final_checks


def _decide_by_refinement(
    a1: CPA, a2: CPA, relation: Relation, cost_mode: CostMode
) -> Verdict:
    union = disjoint_union(a1, a2)
    stats = SolveStats()
    minor = cost_mode is CostMode.MINOR
    test = _step_test(relation, CostMode.PLAIN if minor else cost_mode, union.automaton, stats)
    diagnostics: List[Diagnostic] = []
    w = _refine_to_fixpoint(union.automaton, test, diagnostics)
    start1, start2 = union.starts
    holds = w.same_class(start1, start2)
    r_c = _cost_pairs(union, w)
    removed: List[Tuple[str, str]] = []
    checks: List[CostCheck] = []
    if not holds:
        diagnostics.append(Diagnostic(start2, start1, "start states in different classes"))
    elif minor:
        r_c, removed, checks = _minor_strong_pass(union, w, relation, stats, diagnostics)
        holds = r_c.related(start2, start1)
        lonely = [s for s in union.side(1) if not r_c.successors(s)]
        if holds and lonely:
            holds = False
            diagnostics.append(Diagnostic(lonely[0], "-", "no cost partner"))
    logger.info(
        "%s/%s %s vs %s: %s", relation.value, cost_mode.value, a1.name, a2.name, holds
    )
    return Verdict(
        relation, cost_mode, holds, union, w, r_c, diagnostics, removed, checks, stats
    )


def decide_weak_prob(a1: CPA, a2: CPA) -> Verdict:
    """Weak probabilistic bisimilarity of ``a1`` and ``a2``.

    Raises:
        AlphabetClash: If the alphabet partitions disagree
    """
    return _decide_by_refinement(a1, a2, Relation.WEAK_PROB, CostMode.PLAIN)


def decide_cost_preserving_weak(a1: CPA, a2: CPA) -> Verdict:
    """Weak probabilistic bisimilarity where every match costs exactly the same."""
    return _decide_by_refinement(a1, a2, Relation.WEAK_PROB, CostMode.PRESERVING)


def decide_strong(a1: CPA, a2: CPA, cost_mode: CostMode = CostMode.PLAIN) -> Verdict:
    """Strong bisimilarity: matches are single transitions.

    In minor mode ``a1`` is the cheap side. The plain strong quotient is
    computed first; then pairs (s2, s1) of it are dropped while some
    transition of s2 has no answer from s1 at no greater cost that lifts
    into the remaining pairs.
    """
    return _decide_by_refinement(a1, a2, Relation.STRONG, cost_mode)


def decide_strong_prob(a1: CPA, a2: CPA, cost_mode: CostMode = CostMode.PLAIN) -> Verdict:
    """Strong probabilistic bisimilarity: matches are strong combined transitions."""
    return _decide_by_refinement(a1, a2, Relation.STRONG_PROB, cost_mode)


@dataclass
class _BorderReach:
    target: Distribution
    cost: Fraction


def _reach_border(
    mu: Distribution, border: Sequence[str], autom: CPA, stats: SolveStats
) -> Optional[_BorderReach]:
    """Cheapest hyper-transition ``mu =τ=> γ`` with γ over ``border``."""
    if not border:
        return None
    anchor = border[0]
    reach = BinaryRelation.full(border, border)
    extended, h = build_hyper_instance(mu, TAU, reach, autom)
    lp = build_mincost_lp(build_network(h, TAU, dirac(anchor), reach, extended))
    sol = lp.solve(stats)
    if not sol.feasible:
        return None
    weights: Dict[str, Fraction] = {}
    for (x, y), f in sol.assignment.items():
        if y.kind is VertexKind.REL and x.kind is VertexKind.STATE:
            weights[x.state] = weights.get(x.state, Fraction(0)) + f
    return _BorderReach(Distribution(weights), sol.value)


def _min_weak_cost(
    t: str,
    action: str,
    mu: Distribution,
    rel: BinaryRelation,
    autom: CPA,
    stats: SolveStats,
) -> Optional[Fraction]:
    sol = build_mincost_lp(build_network(t, action, mu, rel, autom)).solve(stats)
    return sol.value if sol.feasible else None


def decide_minor_weak(cheap: CPA, expensive: CPA) -> Verdict:
    """Minor-cost weak probabilistic bisimilarity ``cheap ⪅ expensive``.

    W is the weak probabilistic quotient of the union; the cost relation
    starts as W ∩ (S2 × S1) with S2 the states of ``expensive``. Pairs
    whose defender cannot answer a challenger of S2 at no greater cost are
    removed until nothing changes. When the challenger's target can reach
    the border of W, the answer must reach the cheap side's border and is
    compared with the challenger step plus its cheapest way to the border;
    otherwise it is compared with the challenger step alone.

    Returns:
        Verdict: Holds iff the start pair survives and every state of
        ``expensive`` keeps a partner

    Raises:
        AlphabetClash: If the alphabet partitions disagree
    """
    union = disjoint_union(cheap, expensive)
    autom = union.automaton
    stats = SolveStats()
    diagnostics: List[Diagnostic] = []
    w = _refine_to_fixpoint(autom, weak_test(autom, stats), diagnostics)
    start1, start2 = union.starts
    s1_states, s2_states = union.side(0), union.side(1)
    border = set(border_states(autom, w))
    border1 = [s for s in s1_states if s in border]
    border2 = [s for s in s2_states if s in border]

    r_c = _cost_pairs(union, w)
    removed: List[Tuple[str, str]] = []
    checks: Dict[Tuple[int, str], CostCheck] = {}
    reach_cache: Dict[int, Optional[_BorderReach]] = {}
    challengers = [
        i for i, tr in enumerate(autom.transitions) if union.provenance[tr.source][0] == 1
    ]

    if not w.same_class(start1, start2):
        diagnostics.append(Diagnostic(start2, start1, "start states not weakly bisimilar"))
    else:
        while True:
            current = r_c
            failed: List[Tuple[str, str]] = []
            for i in challengers:
                tr = autom.transitions[i]
                if i not in reach_cache:
                    reach_cache[i] = _reach_border(tr.target, border2, autom, stats)
                reach = reach_cache[i]
                for s1 in current.successors(tr.source):
                    if reach is not None:
                        bound = tr.cost + reach.cost
                        cost = _min_weak_cost(
                            s1, tr.action, reach.target,
                            current.restrict(right=border1), autom, stats,
                        )
                        condition = "border response"
                    else:
                        bound = tr.cost
                        cost = _min_weak_cost(s1, tr.action, tr.target, current, autom, stats)
                        condition = "direct response"
                    check = CostCheck(tr.source, i, s1, cost, bound, condition)
                    checks[(i, s1)] = check
                    if not check.passed:
                        failed.append((tr.source, s1))
                        diagnostics.append(
                            Diagnostic(
                                _describe(tr),
                                s1,
                                f"{condition}: "
                                + ("none" if cost is None else f"cost {cost} > {bound}"),
                            )
                        )
            if not failed:
                break
            failed = list(dict.fromkeys(failed))
            logger.debug("Minor cost pass removed %d pairs", len(failed))
            removed += failed
            r_c = r_c.without(failed)

    holds = w.same_class(start1, start2) and r_c.related(start2, start1)
    lonely = [s for s in s2_states if not r_c.successors(s)]
    if holds and lonely:
        holds = False
        diagnostics.append(Diagnostic(lonely[0], "-", "no cost partner"))
    logger.info("weak-prob/minor %s <= %s: %s", cheap.name, expensive.name, holds)
    final_checks = [c for (i, s1), c in checks.items() if r_c.related(c.challenger, s1)]
    return Verdict(
        Relation.WEAK_PROB,
        CostMode.MINOR,
        holds,
        union,
        w,
        r_c,
        diagnostics,
        removed,
        final_checks,
        stats,
    )


def decide(
    a1: CPA,
    a2: CPA,
    relation: Relation = Relation.WEAK_PROB,
    cost_mode: CostMode = CostMode.PLAIN,
) -> Verdict:
    """Decide any of the relations; in minor mode ``a1`` is the cheap side.

    Example:
        >>> decide(a32, a23, Relation.WEAK_PROB, CostMode.MINOR).holds
        True
    """
    if relation is Relation.WEAK_PROB:
        if cost_mode is CostMode.MINOR:
            return decide_minor_weak(a1, a2)
        if cost_mode is CostMode.PRESERVING:
            return decide_cost_preserving_weak(a1, a2)
        return decide_weak_prob(a1, a2)
    if relation is Relation.STRONG_PROB:
        return decide_strong_prob(a1, a2, cost_mode)
    return decide_strong(a1, a2, cost_mode)


def _weak_answer(
    t: str,
    action: str,
    mu: Distribution,
    rel: BinaryRelation,
    autom: CPA,
    cost: Optional[Fraction] = None,
    exact: bool = False,
) -> bool:
    """Re-check a weak answer through the scheduler it induces."""
    net = build_network(t, action, mu, rel, autom)
    lp = build_mincost_lp(net)
    if exact:
        lp = add_cost_constraint(lp, cost, CostBound.EQUAL)
    sol = lp.solve()
    if not sol.feasible:
        return False
    scheduler = extract_scheduler(sol, lp.network)
    try:
        induced = scheduler_target(scheduler, t, autom)
    except NonTerminating:
        return False
    if lift_check(rel, mu, induced) is None:
        return False
    if cost is None:
        return True
    spent = scheduler_cost(scheduler, t, autom)
    return spent == cost if exact else spent <= cost


def _strong_prob_answer(
    t: str,
    tr: Transition,
    rel: BinaryRelation,
    autom: CPA,
    bound: Optional[Fraction],
    mode: CostBound,
) -> bool:
    try:
        lp = build_strongprob_lp(t, tr.action, tr.target, rel, autom, bound, mode)
    except NoSuchTransitions:
        return False
    sol = lp.solve()
    if not sol.feasible:
        return False
    parts = [
        (sol.flow(("p", i)), autom.transitions[i])
        for i in autom.enabled_with(t, tr.action)
        if sol.flow(("p", i))
    ]
    combined = convex_combine([(p, other.target) for p, other in parts])
    cost = sum((p * other.cost for p, other in parts), Fraction(0))
    if lift_check(rel, tr.target, combined) is None:
        return False
    if bound is None:
        return True
    return cost == bound if mode is CostBound.EQUAL else cost <= bound


def verify_witness(
    verdict: Verdict,
    a1: CPA,
    a2: CPA,
    relation: Optional[Relation] = None,
    cost_mode: Optional[CostMode] = None,
) -> bool:
    """Re-check a claimed witness directly against the relation's conditions.

    Weak answers are re-validated through extracted schedulers, strong
    probabilistic ones through the combined transition they describe.

    Args:
        verdict: Verdict whose partition and cost relation are checked
        a1: First (cheap) automaton
        a2: Second (expensive) automaton
        relation: Relation kind (defaults to the verdict's)
        cost_mode: Cost mode (defaults to the verdict's)

    Returns:
        bool: True iff every condition holds
    """
    relation = relation or verdict.relation
    cost_mode = cost_mode or verdict.cost_mode
    union = disjoint_union(a1, a2)
    autom = union.automaton
    w, r_c = verdict.partition, verdict.cost_relation
    if set(w.universe) != set(autom.states):
        return False
    start1, start2 = union.starts
    if not w.same_class(start1, start2):
        return False
    rel = w.as_relation()

    for tr in autom.transitions:
        for t in w.class_of(tr.source):
            if t == tr.source:
                continue
            if relation is Relation.WEAK_PROB:
                exact = cost_mode is CostMode.PRESERVING
                ok = _weak_answer(
                    t, tr.action, tr.target, rel, autom, tr.cost if exact else None, exact
                )
            elif relation is Relation.STRONG_PROB:
                bound = tr.cost if cost_mode is CostMode.PRESERVING else None
                ok = _strong_prob_answer(t, tr, rel, autom, bound, CostBound.EQUAL)
            else:
                plain = CostMode.PLAIN if cost_mode is CostMode.MINOR else cost_mode
                ok = _strong_test_direct(autom, tr, t, rel, plain)
            if not ok:
                logger.debug("Witness fails: %s vs %s", _describe(tr), t)
                return False

    if cost_mode is not CostMode.MINOR:
        return True

    s1_states, s2_states = union.side(0), union.side(1)
    for x, y in r_c:
        if x not in s2_states or y not in s1_states or not w.same_class(x, y):
            return False
    if not r_c.related(start2, start1):
        return False
    if any(not r_c.successors(s) for s in s2_states):
        return False

    if relation is not Relation.WEAK_PROB:
        for tr in autom.transitions:
            if union.provenance[tr.source][0] != 1:
                continue
            for s1 in r_c.successors(tr.source):
                if relation is Relation.STRONG_PROB:
                    ok = _strong_prob_answer(s1, tr, r_c, autom, tr.cost, CostBound.AT_MOST)
                else:
                    ok = _strong_test_direct(autom, tr, s1, r_c, CostMode.MINOR)
                if not ok:
                    return False
        return True

    border = set(border_states(autom, w))
    border1 = [s for s in s1_states if s in border]
    border2 = [s for s in s2_states if s in border]
    stats = SolveStats()
    for tr in autom.transitions:
        if union.provenance[tr.source][0] != 1:
            continue
        reach = _reach_border(tr.target, border2, autom, stats)
        for s1 in r_c.successors(tr.source):
            if reach is not None:
                ok = _weak_answer(
                    s1, tr.action, reach.target, r_c.restrict(right=border1), autom,
                    tr.cost + reach.cost,
                )
            else:
                ok = _weak_answer(s1, tr.action, tr.target, r_c, autom, tr.cost)
            if not ok:
                return False
    return True


def _strong_test_direct(
    autom: CPA, tr: Transition, t: str, rel: BinaryRelation, cost_mode: CostMode
) -> bool:
    for other in (autom.transitions[j] for j in autom.enabled_with(t, tr.action)):
        if cost_mode is CostMode.PRESERVING and other.cost != tr.cost:
            continue
        if cost_mode is CostMode.MINOR and other.cost > tr.cost:
            continue
        weighting = lift_check(rel, tr.target, other.target)
        if weighting is not None and weighting.satisfies(rel, tr.target, other.target):
            return True
    return False
