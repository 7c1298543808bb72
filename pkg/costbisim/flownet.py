"""
Flow networks and linear programs for weak combined transitions.

The network N(t, a, μ, R) encodes every determinate scheduler that starts
at ``t``, performs internal steps (and exactly one ``a``-step when ``a`` is
external) and stops in states related to the support of ``μ``. Its flow LP
is feasible iff ``t`` has a weak combined transition matching ``μ`` up to
the lifting of ``R``; weighting the transition edges by their costs gives
the minimum-cost variant.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import (
    Dict,
    Hashable,
    Iterable,
    List,
    Optional,
    TextIO,
    Tuple,
    Union,
)

import networkx as nx

from .exceptions import (
    NoSuchTransitions,
    UniverseMismatch,
    UnknownAction,
)
from .lp import LPStatus, SolveStats, StandardFormLP, solve
from .model import CPA, TAU, Alphabet, Distribution, Transition
from .relations import BinaryRelation

logger = logging.getLogger(__name__)


class VertexKind(Enum):
    SOURCE = "source"
    SINK = "sink"
    STATE = "state"
    TRANS = "trans"
    POST = "post"
    POST_TRANS = "post-trans"
    REL = "rel"


@dataclass(frozen=True)
class Vertex:
    """A network vertex.

    ``TRANS`` vertices are entered before the visible step (internal
    transitions of the first stage); ``POST_TRANS`` vertices are entered by
    the ``a``-step itself and by internal transitions after it.
    """

    kind: VertexKind
    state: Optional[str] = None
    transition: Optional[int] = None

    def __str__(self) -> str:
        if self.kind is VertexKind.SOURCE:
            return "src"
        if self.kind is VertexKind.SINK:
            return "sink"
        if self.kind is VertexKind.STATE:
            return self.state
        if self.kind is VertexKind.TRANS:
            return f"{self.state}^t{self.transition}"
        if self.kind is VertexKind.POST:
            return f"{self.state}_a"
        if self.kind is VertexKind.POST_TRANS:
            return f"{self.state}_a^t{self.transition}"
        return f"{self.state}_R"


SOURCE = Vertex(VertexKind.SOURCE)
SINK = Vertex(VertexKind.SINK)

Edge = Tuple[Vertex, Vertex]
Var = Hashable


def state_v(s: str) -> Vertex:
    return Vertex(VertexKind.STATE, s)


def post_v(s: str) -> Vertex:
    return Vertex(VertexKind.POST, s)


def rel_v(s: str) -> Vertex:
    return Vertex(VertexKind.REL, s)


def trans_v(s: str, i: int) -> Vertex:
    return Vertex(VertexKind.TRANS, s, i)


def post_trans_v(s: str, i: int) -> Vertex:
    return Vertex(VertexKind.POST_TRANS, s, i)


def resolve_action(autom: CPA, a: str) -> Tuple[str, bool]:
    """Normalise a weak label: ``(action, external?)``.

    Internal action names are erased to ``tau``.

    Raises:
        UnknownAction: If ``a`` is neither declared nor ``tau``
    """
    if a == TAU or autom.alphabet.is_internal(a):
        return TAU, False
    if autom.alphabet.is_external(a):
        return a, True
    raise UnknownAction(action=a)


@dataclass
class FlowNetwork:
    """The network of one weak-transition question.

    ``graph`` holds the vertices and edges in construction order; each
    transition vertex records the transition whose cost its entry edge
    carries.
    """

    graph: nx.DiGraph
    t: str
    action: str
    external: bool
    mu: Distribution
    relation: BinaryRelation
    autom: CPA
    trimmed_away: bool = False

    @property
    def vertices(self) -> List[Vertex]:
        return list(self.graph.nodes)

    @property
    def edges(self) -> List[Edge]:
        return list(self.graph.edges)

    def edge_cost(self, edge: Edge) -> Fraction:
        """c_f: the transition cost on transition-entry edges, 0 elsewhere."""
        _, y = edge
        if y.kind in (VertexKind.TRANS, VertexKind.POST_TRANS):
            return self.autom.transitions[y.transition].cost
        return Fraction(0)

    def trimmed(self) -> "FlowNetwork":
        """Network without vertices whose flow can always be set to zero.

        Dropped: relation vertices with μ = 0, vertices unreachable from the
        source or not co-reachable to the sink, and transition vertices with
        a dropped successor; repeated to a fixpoint. Feasibility and the
        minimum cost are unchanged.
        """
        g = self.graph.copy()
        g.remove_nodes_from(
            [v for v in g if v.kind is VertexKind.REL and self.mu.prob(v.state) == 0]
        )
        successors = {
            v: set(self.graph.successors(v))
            for v in self.graph
            if v.kind in (VertexKind.TRANS, VertexKind.POST_TRANS)
        }
        while True:
            before = g.number_of_nodes()
            keep = set()
            if SOURCE in g and SINK in g:
                keep = (nx.descendants(g, SOURCE) | {SOURCE}) & (
                    nx.ancestors(g, SINK) | {SINK}
                )
            g.remove_nodes_from([v for v in list(g) if v not in keep])
            broken = [
                v for v, succ in successors.items() if v in g and not succ <= set(g)
            ]
            g.remove_nodes_from(broken)
            if g.number_of_nodes() == before:
                break
        logger.debug(
            "Trimmed network at %s: %d -> %d vertices",
            self.t,
            self.graph.number_of_nodes(),
            g.number_of_nodes(),
        )
        return FlowNetwork(
            g, self.t, self.action, self.external, self.mu, self.relation, self.autom, True
        )


def build_network(
    t: str, a: str, mu: Distribution, r: BinaryRelation, autom: CPA
) -> FlowNetwork:
    """Build the network N(t, a, μ, R).

    ``r`` relates challenger states (left, covering supp(μ)) to states of
    ``autom`` (right); an edge ``x -> u_R`` exists iff ``u R x``. For an
    external ``a`` the second-stage families ``S_a`` and ``S_a^tr`` are
    built; for ``tau`` (or any internal label) only the first stage.

    Args:
        t: Anchor state of ``autom``
        a: External action or ``tau``
        mu: Challenger target distribution
        r: Relation from challenger states to ``autom`` states
        autom: The defending automaton

    Returns:
        FlowNetwork: The complete network

    Raises:
        UnknownState: If ``t`` is not a state of ``autom``
        UnknownAction: If ``a`` is not declared
        UniverseMismatch: If supp(μ) leaves the relation's left universe
    """
    autom.require_state(t)
    action, external = resolve_action(autom, a)
    left = set(r.left)
    for u in mu:
        if u not in left:
            raise UniverseMismatch(f"State '{u}' of μ is outside the relation")

    related_to: Dict[str, List[str]] = {x: [] for x in autom.states}
    for u, x in r:
        if x in related_to:
            related_to[x].append(u)

    g = nx.DiGraph()
    g.add_edge(SOURCE, state_v(t))
    for v in autom.states:
        g.add_node(state_v(v))
        if external:
            g.add_node(post_v(v))
    for v in autom.states:
        for i in autom.enabled(v):
            tr = autom.transitions[i]
            if autom.is_internal(tr):
                _add_step(g, state_v(v), trans_v(v, i), tr, state_v)
                if external:
                    _add_step(g, post_v(v), post_trans_v(v, i), tr, post_v)
            elif external and tr.action == action:
                _add_step(g, state_v(v), post_trans_v(v, i), tr, post_v)
    stop = post_v if external else state_v
    for v in autom.states:
        for u in related_to[v]:
            g.add_edge(stop(v), rel_v(u))
    for u in r.left:
        g.add_edge(rel_v(u), SINK)

    logger.debug(
        "Network for %s =%s=> : %d vertices, %d edges",
        t,
        action,
        g.number_of_nodes(),
        g.number_of_edges(),
    )
    return FlowNetwork(g, t, action, external, mu, r, autom)


def _add_step(g: nx.DiGraph, frm: Vertex, via: Vertex, tr: Transition, to) -> None:
    g.add_edge(frm, via)
    for target in tr.target:
        g.add_edge(via, to(target))


@dataclass
class Constraint:
    coeffs: Dict[Var, Fraction]
    rhs: Fraction
    label: str = ""

    def holds(self, assignment: Dict[Var, Fraction]) -> bool:
        lhs = sum(
            (c * assignment.get(v, Fraction(0)) for v, c in self.coeffs.items()),
            Fraction(0),
        )
        return lhs == self.rhs


@dataclass
class LPSolution:
    status: LPStatus
    assignment: Dict[Var, Fraction] = field(default_factory=dict)
    value: Optional[Fraction] = None

    @property
    def feasible(self) -> bool:
        return self.status is LPStatus.OPTIMAL

    def flow(self, var: Var) -> Fraction:
        return self.assignment.get(var, Fraction(0))


class LPProblem:
    """Equality-constrained LP over nonnegative named variables.

    ``cost`` holds the c_f weights of the transition edges; ``objective``
    is what the solver minimises when ``minimize`` is set (a pure
    feasibility question otherwise).
    """

    def __init__(self, name: str = "lp", network: Optional[FlowNetwork] = None):
        self.name = name
        self.network = network
        self.variables: List[Var] = []
        self._known: Dict[Var, int] = {}
        self.constraints: List[Constraint] = []
        self.objective: Dict[Var, Fraction] = {}
        self.minimize = False
        self.cost: Dict[Var, Fraction] = {}

    def __repr__(self) -> str:
        return (
            f"LPProblem('{self.name}', variables={len(self.variables)}, "
            f"constraints={len(self.constraints)}, minimize={self.minimize})"
        )

    @property
    def minimizing(self) -> bool:
        return self.minimize

    def add_variable(self, var: Var) -> Var:
        if var not in self._known:
            self._known[var] = len(self.variables)
            self.variables.append(var)
        return var

    def add_constraint(
        self, coeffs: Dict[Var, Fraction], rhs, label: str = ""
    ) -> None:
        """Append ``Σ coeffs·x = rhs``; unknown variables are rejected."""
        for v in coeffs:
            if v not in self._known:
                raise KeyError(f"Unknown LP variable {var_name(v)}")
        self.constraints.append(
            Constraint({v: Fraction(c) for v, c in coeffs.items() if c}, Fraction(rhs), label)
        )

    def copy(self) -> "LPProblem":
        other = LPProblem(self.name, self.network)
        other.variables = list(self.variables)
        other._known = dict(self._known)
        other.constraints = [
            Constraint(dict(c.coeffs), c.rhs, c.label) for c in self.constraints
        ]
        other.objective = dict(self.objective)
        other.minimize = self.minimize
        other.cost = dict(self.cost)
        return other

    def to_standard_form(self) -> StandardFormLP:
        rows = [
            {self._known[v]: c for v, c in con.coeffs.items()}
            for con in self.constraints
        ]
        objective = [Fraction(0)] * len(self.variables)
        for v, c in self.objective.items():
            objective[self._known[v]] = c
        return StandardFormLP(
            rows, [c.rhs for c in self.constraints], objective, len(self.variables)
        )

    def solve(self, stats: Optional[SolveStats] = None) -> LPSolution:
        result = solve(self.to_standard_form(), stats)
        if result.status is not LPStatus.OPTIMAL:
            return LPSolution(result.status)
        assignment = {
            v: x for v, x in zip(self.variables, result.assignment) if x != 0
        }
        return LPSolution(
            LPStatus.OPTIMAL,
            assignment,
            result.value if self.minimize else None,
        )

    def satisfied_by(self, assignment: Dict[Var, Fraction]) -> bool:
        """Check nonnegativity and every constraint exactly (absent variables are 0)."""
        if any(x < 0 for x in assignment.values()):
            return False
        if any(v not in self._known for v in assignment):
            return False
        return all(c.holds(assignment) for c in self.constraints)

    def total_cost(self, assignment: Dict[Var, Fraction]) -> Fraction:
        return sum(
            (c * assignment.get(v, Fraction(0)) for v, c in self.cost.items()),
            Fraction(0),
        )

    def dump(self, out: Union[str, TextIO]) -> None:
        """Write the LP in a plain linear format, rationals as ``a/b``.

        The LP is written as built: one solved on a trimmed network has no
        variables for the edges trimming dropped.
        """
        if isinstance(out, str):
            with open(out, "w", encoding="utf-8") as f:
                self.dump(f)
            return
        out.write(f"# {self.name}\n")
        if self.minimize:
            out.write("minimize: " + _linear(self.objective) + "\n")
        else:
            out.write("feasibility\n")
        out.write("subject to\n")
        for i, con in enumerate(self.constraints):
            label = con.label or f"c{i}"
            out.write(f"  {label}: {_linear(con.coeffs)} = {con.rhs}\n")
        out.write("bounds\n")
        for v in self.variables:
            out.write(f"  {var_name(v)} >= 0\n")
        out.write("end\n")


def var_name(v: Var) -> str:
    if isinstance(v, tuple) and len(v) == 2 and all(isinstance(x, Vertex) for x in v):
        return f"f[{v[0]}->{v[1]}]"
    if isinstance(v, tuple):
        return f"{v[0]}[{','.join(str(x) for x in v[1:])}]"
    return str(v)


def _linear(coeffs: Dict[Var, Fraction]) -> str:
    if not coeffs:
        return "0"
    return " + ".join(f"{c} {var_name(v)}" for v, c in coeffs.items())


def build_feasibility_lp(n: FlowNetwork, trim: bool = True) -> LPProblem:
    """The LP L(t, a, μ, R) of a network.

    Constraints: the source edge carries 1, each relation vertex sends
    μ(u) to the sink, flow is conserved at every inner vertex, and each
    transition vertex splits its inflow in the target's proportions.
    Constraints on edges removed by trimming keep their right-hand side
    with no variables, so an impossible demand stays infeasible.

    Args:
        n: The network
        trim: Solve on the trimmed network (same feasibility and optimum)

    Returns:
        LPProblem: A feasibility problem over one variable per edge
    """
    net = n.trimmed() if trim and not n.trimmed_away else n
    g = net.graph
    lp = LPProblem(f"L({n.t},{n.action})", net)
    for e in g.edges:
        lp.add_variable(e)

    source_edge = (SOURCE, state_v(n.t))
    lp.add_constraint({source_edge: 1} if g.has_edge(*source_edge) else {}, 1, "source")
    for u in n.relation.left:
        p = n.mu.prob(u)
        edge = (rel_v(u), SINK)
        if g.has_edge(*edge):
            lp.add_constraint({edge: 1}, p, f"target[{u}]")
        elif p > 0:
            lp.add_constraint({}, p, f"target[{u}]")

    for v in g:
        if v in (SOURCE, SINK):
            continue
        coeffs: Dict[Var, Fraction] = {}
        for e in g.in_edges(v):
            coeffs[e] = coeffs.get(e, Fraction(0)) + 1
        for e in g.out_edges(v):
            coeffs[e] = coeffs.get(e, Fraction(0)) - 1
        if coeffs:
            lp.add_constraint(coeffs, 0, f"conserve[{v}]")

    for x in g:
        if x.kind not in (VertexKind.TRANS, VertexKind.POST_TRANS):
            continue
        tr = n.autom.transitions[x.transition]
        (entry,) = list(g.in_edges(x))
        stage = post_v if x.kind is VertexKind.POST_TRANS else state_v
        for target, rho in tr.target.items():
            lp.add_constraint(
                {(x, stage(target)): 1, entry: -rho}, 0, f"balance[{x}->{target}]"
            )

    for e in g.edges:
        c = net.edge_cost(e)
        if c:
            lp.cost[e] = c
    return lp


def build_mincost_lp(n: FlowNetwork, autom: Optional[CPA] = None, trim: bool = True) -> LPProblem:
    """The min-cost LP: L(t, a, μ, R) minimising Σ c_f·f.

    ``autom`` defaults to the network's automaton; its costs weight the
    transition-entry edges.
    """
    if autom is not None and autom is not n.autom:
        n = FlowNetwork(
            n.graph, n.t, n.action, n.external, n.mu, n.relation, autom, n.trimmed_away
        )
    lp = build_feasibility_lp(n, trim)
    lp.name = f"Lmin({n.t},{n.action})"
    lp.objective = dict(lp.cost)
    lp.minimize = True
    return lp


class CostBound(Enum):
    EQUAL = "equal"
    AT_MOST = "at-most"


def add_cost_constraint(
    lp: LPProblem, bound, mode: CostBound = CostBound.EQUAL, keep_objective: bool = False
) -> LPProblem:
    """Copy of ``lp`` with ``Σ c_f·f = bound`` (or ``≤ bound`` via one slack).

    The objective reverts to feasibility unless ``keep_objective``.
    """
    out = lp.copy()
    coeffs: Dict[Var, Fraction] = dict(out.cost)
    if mode is CostBound.AT_MOST:
        slack = out.add_variable(("slack", "cost"))
        coeffs[slack] = Fraction(1)
    out.add_constraint(coeffs, bound, f"cost-{mode.value}")
    if not keep_objective:
        out.objective = {}
        out.minimize = False
    return out


HYPER_STATE = "hyper"
HYPER_ACTION = "hyper_tau"


def _fresh(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    name, k = base, 0
    while name in taken:
        k += 1
        name = f"{base}{k}"
    return name


def build_hyper_instance(
    mu_from: Distribution,
    a: str,
    target_relation: BinaryRelation,
    autom: CPA,
) -> Tuple[CPA, str]:
    """Reduce a hyper-transition from ``mu_from`` to a state question.

    Returns a copy of ``autom`` with a fresh state ``h`` and a zero-cost
    internal transition ``h -> mu_from``; weak transitions of ``h`` labelled
    ``a`` are exactly the hyper-transitions of ``mu_from``.

    Raises:
        UnknownState: If ``mu_from`` mentions an undeclared state
        UnknownAction: If ``a`` is not declared
        UniverseMismatch: If the relation targets states outside ``autom``
    """
    for s in mu_from:
        autom.require_state(s)
    resolve_action(autom, a)
    for x in target_relation.right:
        if not autom.has_state(x):
            raise UniverseMismatch(f"Relation state '{x}' is not in {autom.name}")

    h = _fresh(HYPER_STATE, autom.states)
    if autom.alphabet.internal:
        hidden = autom.alphabet.internal[0]
        alphabet = autom.alphabet
    else:
        hidden = _fresh(HYPER_ACTION, autom.alphabet.actions)
        alphabet = Alphabet(autom.alphabet.external, (hidden,))
    extended = autom.replace(
        states=autom.states + (h,),
        alphabet=alphabet,
        transitions=autom.transitions + (Transition(h, hidden, mu_from, Fraction(0)),),
    )
    return extended, h


def build_strongprob_lp(
    t: str,
    a: str,
    mu: Distribution,
    w: BinaryRelation,
    autom: CPA,
    cost_bound: Optional[Fraction] = None,
    cost_mode: CostBound = CostBound.EQUAL,
) -> LPProblem:
    """Feasibility LP for a strong combined transition of ``t`` matching ``μ``.

    Variables are the combination weights ``p_i`` of the ``a``-transitions
    of ``t`` and weighting variables ``f_{u,v}`` for ``u`` in supp(μ) and
    ``v`` reachable by some ``a``-transition with ``u w v``.

    Args:
        t: Defender state
        a: Action label (matched exactly)
        mu: Challenger target
        w: Relation from challenger states to defender states
        autom: Defending automaton
        cost_bound: Optional bound on Σ pᵢ·c(trᵢ)
        cost_mode: Equality or at-most bound

    Raises:
        NoSuchTransitions: If ``t`` enables no ``a``-transition
    """
    autom.require_state(t)
    indices = autom.enabled_with(t, a)
    if not indices:
        raise NoSuchTransitions(f"State '{t}' enables no '{a}' transition")
    transitions = [autom.transitions[i] for i in indices]
    reached: List[str] = []
    for tr in transitions:
        reached += [v for v in tr.target if v not in reached]

    lp = LPProblem(f"Lstrong({t},{a})")
    ps = [lp.add_variable(("p", i)) for i in indices]
    weights: Dict[Tuple[str, str], Var] = {}
    for u in mu:
        for v in reached:
            if (u, v) in w:
                weights[(u, v)] = lp.add_variable(("f", u, v))

    lp.add_constraint({p: 1 for p in ps}, 1, "combination")
    for u, q in mu.items():
        lp.add_constraint(
            {weights[(u, v)]: 1 for v in reached if (u, v) in weights}, q, f"row[{u}]"
        )
    for v in reached:
        coeffs: Dict[Var, Fraction] = {
            weights[(u, v)]: Fraction(1) for u in mu if (u, v) in weights
        }
        for p, tr in zip(ps, transitions):
            rho = tr.target.prob(v)
            if rho:
                coeffs[p] = -rho
        lp.add_constraint(coeffs, 0, f"column[{v}]")

    for p, tr in zip(ps, transitions):
        if tr.cost:
            lp.cost[p] = tr.cost
    if cost_bound is not None:
        lp = add_cost_constraint(lp, cost_bound, cost_mode)
    return lp
