"""
Determinate schedulers and the costs of the weak transitions they induce.

A determinate scheduler chooses by (last state, stage): the stage is PRE
before the visible step and POST after it. Induced targets and expected
(ball) costs are exact solutions of the absorbing-chain linear system;
ray costs enumerate the fragments of acyclic models.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx
import sympy

from .config import get_config
from .exceptions import (
    CyclicModel,
    NonTerminating,
    NotOptimal,
    ValidationError,
)
from .flownet import (
    FlowNetwork,
    LPSolution,
    VertexKind,
    resolve_action,
)
from .lp import LPStatus
from .model import (
    CPA,
    TAU,
    Alphabet,
    Distribution,
    Fragment,
    MdpPolicy,
    Transition,
    check_mdp,
    policy_step,
)
from .relations import BinaryRelation, lift_check

logger = logging.getLogger(__name__)


class Stage(Enum):
    PRE = "pre"
    POST = "post"


Node = Tuple[str, Stage]


@dataclass(frozen=True)
class Choice:
    """Transition probabilities (by transition index) plus the stop mass."""

    transitions: Dict[int, Fraction] = field(default_factory=dict)
    stop: Fraction = Fraction(0)

    def mass(self) -> Fraction:
        return sum(self.transitions.values(), Fraction(0)) + self.stop


STOP = Choice({}, Fraction(1))


@dataclass
class DeterminateScheduler:
    """Choices keyed by (state, stage); unlisted keys stop immediately."""

    action: str
    choice: Dict[Node, Choice] = field(default_factory=dict)

    @property
    def external(self) -> bool:
        return self.action != TAU

    def decide(self, state: str, stage: Stage) -> Choice:
        return self.choice.get((state, stage), STOP)

    def validate(self, autom: CPA) -> None:
        """Check the scheduler invariants against ``autom``.

        Raises:
            ValidationError: On a choice that is not a full distribution or
                picks a transition not allowed at its stage
        """
        for (state, stage), ch in self.choice.items():
            autom.require_state(state)
            if ch.stop < 0 or any(p < 0 for p in ch.transitions.values()):
                raise ValidationError(f"Negative scheduler mass at ({state}, {stage.value})")
            if ch.mass() != 1:
                raise ValidationError(
                    f"Scheduler mass {ch.mass()} at ({state}, {stage.value}), expected 1"
                )
            if stage is Stage.POST and not self.external and ch.transitions:
                raise ValidationError("A tau scheduler has no post stage")
            enabled = set(autom.enabled(state))
            for i in ch.transitions:
                if i not in enabled:
                    raise ValidationError(f"Transition {i} is not enabled at '{state}'")
                tr = autom.transitions[i]
                visible = self.external and tr.action == self.action
                if autom.is_internal(tr):
                    continue
                if not (visible and stage is Stage.PRE):
                    raise ValidationError(
                        f"Transition {i} ({tr.action}) not allowed at "
                        f"({state}, {stage.value})"
                    )

    def next_stage(self, stage: Stage, tr: Transition) -> Stage:
        if self.external and stage is Stage.PRE and tr.action == self.action:
            return Stage.POST
        return stage

    def format(self) -> str:
        """Text table ``(state, stage) -> [t#:prob ...] stop:prob``."""
        lines = []
        for (state, stage), ch in self.choice.items():
            picks = " ".join(f"t{i}:{p}" for i, p in ch.transitions.items())
            lines.append(f"({state}, {stage.value}) -> [{picks}] stop:{ch.stop}")
        return "\n".join(lines) + ("\n" if lines else "")


def extract_scheduler(sol: LPSolution, net: FlowNetwork) -> DeterminateScheduler:
    """Scheduler realising an optimal flow.

    At each state vertex a transition is chosen with probability
    ``f(v, v^tr) / inflow(v)`` and the run stops with the flow sent to
    relation vertices over the inflow. Vertices without inflow stop.

    Raises:
        NotOptimal: If the solution is not optimal
    """
    if sol.status is not LPStatus.OPTIMAL:
        raise NotOptimal(f"Cannot extract a scheduler from a {sol.status.value} LP")
    g = net.graph
    scheduler = DeterminateScheduler(net.action)
    for v in g:
        if v.kind is VertexKind.STATE:
            stage = Stage.PRE
        elif v.kind is VertexKind.POST:
            stage = Stage.POST
        else:
            continue
        inflow = sum((sol.flow(e) for e in g.in_edges(v)), Fraction(0))
        if inflow == 0:
            scheduler.choice[(v.state, stage)] = STOP
            continue
        picks: Dict[int, Fraction] = {}
        stop = Fraction(0)
        for e in g.out_edges(v):
            f = sol.flow(e)
            if not f:
                continue
            if e[1].kind is VertexKind.REL:
                stop += f / inflow
            else:
                picks[e[1].transition] = f / inflow
        scheduler.choice[(v.state, stage)] = Choice(picks, stop)
    return scheduler


def _rational(x: Fraction) -> sympy.Rational:
    return sympy.Rational(x.numerator, x.denominator)


def _fraction(x: sympy.Rational) -> Fraction:
    return Fraction(int(x.p), int(x.q))


@dataclass
class _Chain:
    nodes: List[Node]
    visits: Dict[Node, Fraction]


def _successors(s: DeterminateScheduler, autom: CPA, node: Node) -> Iterator[Tuple[Node, Fraction]]:
    state, stage = node
    for i, p in s.decide(state, stage).transitions.items():
        tr = autom.transitions[i]
        nxt = s.next_stage(stage, tr)
        for t, rho in tr.target.items():
            yield (t, nxt), p * rho


def _chain(s: DeterminateScheduler, start: str, autom: CPA) -> _Chain:
    autom.require_state(start)
    s.validate(autom)

    root = (start, Stage.PRE)
    g = nx.DiGraph()
    g.add_node(root)
    frontier = [root]
    while frontier:
        node = frontier.pop()
        for nxt, p in _successors(s, autom, node):
            if p and nxt not in g:
                g.add_node(nxt)
                frontier.append(nxt)
            if p:
                g.add_edge(node, nxt)

    stopping = {n for n in g if s.decide(*n).stop > 0}
    can_stop = set(stopping)
    for n in stopping:
        can_stop |= nx.ancestors(g, n)
    stuck = [n for n in g if n not in can_stop]
    if stuck:
        raise NonTerminating(
            f"Scheduler never stops from {', '.join(f'({n[0]}, {n[1].value})' for n in stuck)}"
        )

    nodes = list(g)
    index = {n: k for k, n in enumerate(nodes)}
    size = len(nodes)
    m = sympy.eye(size)
    for n in nodes:
        for nxt, p in _successors(s, autom, n):
            m[index[nxt], index[n]] -= _rational(p)
    rhs = sympy.zeros(size, 1)
    rhs[index[root], 0] = 1
    solution = m.LUsolve(rhs)
    visits = {n: _fraction(solution[index[n], 0]) for n in nodes}
    return _Chain(nodes, visits)


def scheduler_target(s: DeterminateScheduler, start: str, autom: CPA) -> Distribution:
    """Target distribution of the weak transition induced from ``start``.

    Solves the visit equations of the absorbing chain over (state, stage)
    exactly and collects the stop mass. For an external action only stops
    after the visible step count.

    Raises:
        NonTerminating: If the scheduler does not stop with probability 1
            (or, for an external action, stops before performing it)
    """
    return _stop_distribution(s, _chain(s, start, autom))


def _stop_distribution(s: DeterminateScheduler, chain: _Chain) -> Distribution:
    final = Stage.POST if s.external else Stage.PRE
    weights: Dict[str, Fraction] = {}
    early = Fraction(0)
    for (state, stage), x in chain.visits.items():
        mass = x * s.decide(state, stage).stop
        if not mass:
            continue
        if stage is final:
            weights[state] = weights.get(state, Fraction(0)) + mass
        else:
            early += mass
    if early:
        raise NonTerminating(
            f"Scheduler stops with probability {early} before performing '{s.action}'"
        )
    target = Distribution(weights)
    if target.mass() != 1:
        raise NonTerminating(f"Termination probability is {target.mass()}, not 1")
    return target


def scheduler_cost(s: DeterminateScheduler, start: str, autom: CPA) -> Fraction:
    """Expected total cost of the weak transition induced from ``start``.

    Example:
        >>> scheduler_cost(hop_until_escape, "h0", wcc)
        Fraction(100, 3)
    """
    chain = _chain(s, start, autom)
    _stop_distribution(s, chain)
    total = Fraction(0)
    for (state, stage), x in chain.visits.items():
        ch = s.decide(state, stage)
        step = sum(
            (p * autom.transitions[i].cost for i, p in ch.transitions.items()),
            Fraction(0),
        )
        total += x * step
    return total


def ray_cost_acyclic(s: DeterminateScheduler, start: str, autom: CPA) -> Fraction:
    """Cost summed over stopping fragments (rays).

    Each fragment ``α' b t`` adds the costs of the ``b``-transitions chosen
    after ``α'``, each weighted by its normalised share of reaching ``t``.

    Raises:
        CyclicModel: If the scheduler can revisit a (state, stage) node
        NonTerminating: If the scheduler does not induce a weak transition
    """
    autom.require_state(start)
    s.validate(autom)
    g = nx.DiGraph()
    root = (start, Stage.PRE)
    g.add_node(root)
    frontier = [root]
    while frontier:
        node = frontier.pop()
        for nxt, p in _successors(s, autom, node):
            if not p:
                continue
            if nxt not in g:
                frontier.append(nxt)
            g.add_edge(node, nxt)
    if not nx.is_directed_acyclic_graph(g):
        raise CyclicModel(f"Fragments from '{start}' are unbounded: the scheduler can cycle")
    scheduler_target(s, start, autom)

    final = Stage.POST if s.external else Stage.PRE
    total = Fraction(0)
    stack: List[Tuple[Node, Fraction, Fraction]] = [(root, Fraction(1), Fraction(0))]
    while stack:
        (state, stage), prob, cost = stack.pop()
        ch = s.decide(state, stage)
        if ch.stop and stage is final:
            total += prob * ch.stop * cost
        by_label: Dict[str, List[int]] = {}
        for i in ch.transitions:
            by_label.setdefault(autom.transitions[i].action, []).append(i)
        for label, group in by_label.items():
            reached: List[str] = []
            for i in group:
                reached += [t for t in autom.transitions[i].target if t not in reached]
            for t in reached:
                shares = {
                    i: ch.transitions[i] * autom.transitions[i].target.prob(t) for i in group
                }
                weight = sum(shares.values(), Fraction(0))
                if not weight:
                    continue
                step = sum(
                    (autom.transitions[i].cost * w / weight for i, w in shares.items()),
                    Fraction(0),
                )
                nxt = s.next_stage(stage, autom.transitions[group[0]])
                stack.append(((t, nxt), prob * weight, cost + step))
    return total


def _options(
    autom: CPA, state: str, stage: Stage, action: str, external: bool
) -> List[Optional[int]]:
    opts: List[Optional[int]] = []
    if not external or stage is Stage.POST:
        opts.append(None)
    for i in autom.enabled(state):
        tr = autom.transitions[i]
        if autom.is_internal(tr):
            opts.append(i)
        elif external and stage is Stage.PRE and tr.action == action:
            opts.append(i)
    return opts


def enumerate_min_cost(
    start: str,
    a: str,
    target: Distribution,
    r: BinaryRelation,
    autom: CPA,
    depth: Optional[int] = None,
) -> Optional[Fraction]:
    """Minimum cost over deterministic determinate schedulers, by brute force.

    Every reachable (state, stage) node gets one option: stop or a single
    allowed transition. Assignments touching more than ``depth`` nodes are
    abandoned. A scheduler qualifies when it terminates and ``target``
    lifts through ``r`` to its induced distribution.

    Args:
        start: Anchor state
        a: External action or ``tau``
        target: Challenger distribution over ``r.left``
        r: Relation from challenger states to ``autom`` states
        autom: The automaton
        depth: Node budget (defaults to the configured enumeration depth)

    Returns:
        Fraction or None: The best cost, or None if no scheduler qualifies
    """
    autom.require_state(start)
    action, external = resolve_action(autom, a)
    depth = get_config().enumeration_depth if depth is None else depth
    best: List[Optional[Fraction]] = [None]
    root = (start, Stage.PRE)

    def pending(assign: Dict[Node, Optional[int]]) -> Optional[Node]:
        seen = {root}
        queue = [root]
        while queue:
            node = queue.pop(0)
            if node not in assign:
                return node
            i = assign[node]
            if i is None:
                continue
            tr = autom.transitions[i]
            nxt_stage = Stage.POST if external and node[1] is Stage.PRE and tr.action == action else node[1]
            for t in tr.target:
                nxt = (t, nxt_stage)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return None

    def evaluate(assign: Dict[Node, Optional[int]]) -> None:
        sched = DeterminateScheduler(
            action,
            {
                n: STOP if i is None else Choice({i: Fraction(1)}, Fraction(0))
                for n, i in assign.items()
            },
        )
        try:
            induced = scheduler_target(sched, start, autom)
        except NonTerminating:
            return
        if lift_check(r, target, induced) is None:
            return
        cost = scheduler_cost(sched, start, autom)
        if best[0] is None or cost < best[0]:
            best[0] = cost

    def search(assign: Dict[Node, Optional[int]]) -> None:
        node = pending(assign)
        if node is None:
            evaluate(assign)
            return
        if len(assign) >= depth:
            return
        for option in _options(autom, node[0], node[1], action, external):
            assign[node] = option
            search(assign)
            del assign[node]

    search({})
    return best[0]


@dataclass
class HorizonUnfolding:
    """Tree unfolding of an MDP up to a policy's horizon.

    ``automaton`` has one state per fragment (all actions internal),
    ``scheduler`` follows the policy for N steps and then stops, and
    ``fragments`` maps each unfolded state back to its fragment.
    """

    automaton: CPA
    scheduler: DeterminateScheduler
    start: str
    fragments: Dict[str, Fragment]


def horizon_unfolding(m: CPA, policy: MdpPolicy, start: Optional[str] = None) -> HorizonUnfolding:
    """Unfold ``m`` along ``policy`` so its expected reward becomes a weak-transition cost.

    Raises:
        NotAnMdp: If ``m`` is not an MDP
    """
    check_mdp(m)
    origin = start if start is not None else m.start
    m.require_state(origin)
    by_action = {(tr.source, tr.action): tr for tr in m.transitions}

    names: Dict[Fragment, str] = {}
    fragments: Dict[str, Fragment] = {}

    def name(fragment: Fragment) -> str:
        if fragment not in names:
            names[fragment] = f"n{len(names)}"
            fragments[names[fragment]] = fragment
        return names[fragment]

    transitions: List[Transition] = []
    choice: Dict[Node, Choice] = {}
    queue = [(origin,)]
    name(queue[0])
    while queue:
        fragment = queue.pop(0)
        here = names[fragment]
        steps = (len(fragment) - 1) // 2
        picks = policy_step(m, fragment, policy) if steps < policy.horizon else {}
        chosen: Dict[int, Fraction] = {}
        for action, p in picks.items():
            tr = by_action[(fragment[-1], action)]
            target = Distribution(
                (name(fragment + (action, t)), q) for t, q in tr.target.items()
            )
            queue += [fragment + (action, t) for t in tr.target]
            chosen[len(transitions)] = p
            transitions.append(Transition(here, action, target, tr.cost))
        choice[(here, Stage.PRE)] = Choice(chosen, Fraction(0)) if chosen else STOP

    unfolded = CPA(
        f"{m.name}-unfolded",
        list(fragments),
        name((origin,)),
        Alphabet((), m.alphabet.actions),
        transitions,
    )
    return HorizonUnfolding(
        unfolded, DeterminateScheduler(TAU, choice), unfolded.start, fragments
    )
