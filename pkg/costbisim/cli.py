"""
Command-line interface: ``cpa check|compose|mincost|quotient|verify``.

Exit codes: 0 the relation holds (or the command succeeded), 1 it does not
(or the query is infeasible), 2 usage or input errors, 3 internal errors.
"""

import argparse
import json
import logging
import sys
import time
import warnings
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from . import __version__
from .bisim import (
    CostMode,
    Relation,
    Verdict,
    decide,
    quotient,
    verify_witness,
)
from .compose import compose_cpa, parse_generator
from .config import configure
from .core import (
    model_stats,
    parse_rational,
    read_model,
    read_relation,
    serialize_model,
    serialize_partition,
    serialize_relation,
    write_document,
)
from .exceptions import CostBisimError, Incompatible, ParseError, UniverseMismatch
from .flownet import build_mincost_lp, build_network
from .lp import SolveStats
from .model import CPA, Distribution, disjoint_union
from .relations import BinaryRelation, Partition
from .sched import extract_scheduler

logger = logging.getLogger(__name__)

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _rat(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


Outcome = Tuple[int, Dict, str]


def _emit(report: Dict, as_json: bool, text: str) -> None:
    if as_json:
        print(json.dumps(report, indent=2))
    elif text:
        print(text, end="" if text.endswith("\n") else "\n")


def _parse_target(text: str) -> Distribution:
    """``"<s>:<rat>,<s>:<rat>,..."``"""
    weights = []
    for item in text.split(","):
        state, sep, prob = item.strip().rpartition(":")
        if not sep or not state:
            raise ParseError(f"expected '<state>:<rational>' in target, got '{item}'")
        weights.append((state, parse_rational(prob)))
    return Distribution(weights)


def _relation_for(args, autom: CPA) -> BinaryRelation:
    if args.rel is None or args.rel_identity:
        return BinaryRelation.identity(autom.states)
    doc = read_relation(args.rel, universe=list(autom.states))
    if isinstance(doc, Partition):
        return doc.as_relation()
    return doc


def _write_witness(verdict: Verdict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_partition(verdict.partition))
    with open(path + ".cost", "w", encoding="utf-8") as f:
        f.write(serialize_relation(verdict.cost_relation))
    logger.info("Witness written to %s and %s.cost", path, path)


def _verdict_report(verdict: Verdict) -> Dict:
    return {
        "relation": verdict.relation.value,
        "cost_mode": verdict.cost_mode.value,
        "holds": verdict.holds,
        "lp_solved": verdict.stats.lps_solved,
        "pivots": verdict.stats.pivots,
        "removed_pairs": [list(p) for p in verdict.removed_pairs],
        "cost_checks": [
            {
                "challenger": c.challenger,
                "defender": c.defender,
                "condition": c.condition,
                "cost": None if c.cost is None else _rat(c.cost),
                "bound": _rat(c.bound),
            }
            for c in verdict.cost_checks
        ],
        "diagnostics": [str(d) for d in verdict.diagnostics],
        "witness": {
            "classes": [list(c) for c in verdict.partition.classes],
            "cost_pairs": [list(p) for p in verdict.cost_relation],
        },
    }


def cmd_check(args) -> Outcome:
    a1, a2 = read_model(args.first), read_model(args.second)
    relation, cost_mode = Relation(args.rel), CostMode(args.cost)
    verdict = decide(a1, a2, relation, cost_mode)
    if args.witness:
        _write_witness(verdict, args.witness)
    report = {
        "command": "check",
        "models": {a.name: model_stats(a) for a in (a1, a2)},
        **_verdict_report(verdict),
    }
    symbol = "<=" if cost_mode is CostMode.MINOR else "~"
    text = f"{a1.name} {symbol} {a2.name} ({relation.value}, cost {cost_mode.value}): "
    text += "holds" if verdict.holds else "does not hold"
    if not verdict.holds and verdict.diagnostics:
        text += "\n  " + str(verdict.diagnostics[-1])
    return (EXIT_HOLDS if verdict.holds else EXIT_FAILS), report, text


def cmd_verify(args) -> Outcome:
    a1, a2 = read_model(args.first), read_model(args.second)
    union = disjoint_union(a1, a2)
    partition = read_relation(args.witness, universe=list(union.automaton.states))
    if not isinstance(partition, Partition):
        raise ParseError(f"{args.witness} must hold 'class' lines")
    s1, s2 = union.side(0), union.side(1)
    try:
        pairs = read_relation(args.witness + ".cost")
    except FileNotFoundError:
        pairs = None
    if isinstance(pairs, Partition):
        raise ParseError(f"{args.witness}.cost must hold 'pair' lines")
    try:
        cost_relation = BinaryRelation(pairs or (), s2, s1)
    except UniverseMismatch as e:
        raise ParseError(f"{args.witness}.cost: {e}") from e

    relation, cost_mode = Relation(args.rel), CostMode(args.cost)
    claimed = Verdict(relation, cost_mode, True, union, partition, cost_relation)
    ok = verify_witness(claimed, a1, a2, relation, cost_mode)
    report = {
        "command": "verify",
        "relation": relation.value,
        "cost_mode": cost_mode.value,
        "valid": ok,
    }
    return (EXIT_HOLDS if ok else EXIT_FAILS), report, (
        "witness valid" if ok else "witness invalid"
    )


def cmd_compose(args) -> Outcome:
    a1, a2 = read_model(args.first), read_model(args.second)
    g = parse_generator(args.gen)
    report: Dict = {"command": "compose", "generator": g.name, "output": args.output}
    try:
        composed = compose_cpa(a1, a2, g)
    except Incompatible as e:
        report["error"] = str(e)
        return EXIT_FAILS, report, f"error: {e}"
    report["states"] = len(composed.states)
    report["transitions"] = len(composed.transitions)
    if args.output:
        write_document(composed, args.output)
        text = (
            f"wrote {args.output}: {len(composed.states)} states, "
            f"{len(composed.transitions)} transitions"
        )
    else:
        text = serialize_model(composed)
    return EXIT_HOLDS, report, text


def cmd_mincost(args) -> Outcome:
    autom = read_model(args.model, prune=False)
    mu = _parse_target(args.target)
    r = _relation_for(args, autom)
    stats = SolveStats()
    net = build_network(args.source, args.action, mu, r, autom)
    lp = build_mincost_lp(net)
    if args.dump_lp:
        build_mincost_lp(net, trim=False).dump(args.dump_lp)
    sol = lp.solve(stats)
    report: Dict = {
        "command": "mincost",
        "from": args.source,
        "action": args.action,
        "feasible": sol.feasible,
        "cost": _rat(sol.value) if sol.feasible else None,
        "lp_solved": stats.lps_solved,
        "pivots": stats.pivots,
    }
    if not sol.feasible:
        return EXIT_FAILS, report, "infeasible"
    if args.scheduler:
        scheduler = extract_scheduler(sol, lp.network)
        with open(args.scheduler, "w", encoding="utf-8") as f:
            f.write(scheduler.format())
    return EXIT_HOLDS, report, str(sol.value)


def cmd_quotient(args) -> Outcome:
    autom = read_model(args.first)
    if args.second:
        autom = disjoint_union(autom, read_model(args.second)).automaton
    w = quotient(autom)
    report = {"command": "quotient", "classes": [list(c) for c in w.classes]}
    return EXIT_HOLDS, report, serialize_partition(w)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="Print a JSON report")


def _add_relation(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--rel",
        choices=[r.value for r in Relation],
        default=Relation.WEAK_PROB.value,
        help="Relation to decide (default: weak-prob)",
    )
    p.add_argument(
        "--cost",
        choices=[c.value for c in CostMode],
        default=CostMode.PLAIN.value,
        help="Cost mode; 'minor' reads FIRST <= SECOND (default: none)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpa", description="Cost probabilistic automata: bisimulations and weak-transition costs"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeatable)")
    parser.add_argument("-q", "--quiet", action="store_true", help="Only log errors")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (0 = auto)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="Decide a bisimulation relation")
    p.add_argument("first", help="First (cheap) model")
    p.add_argument("second", help="Second (expensive) model")
    _add_relation(p)
    p.add_argument("--witness", metavar="PATH", help="Write the partition to PATH, cost pairs to PATH.cost")
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="Re-check a witness written by 'check'")
    p.add_argument("first")
    p.add_argument("second")
    _add_relation(p)
    p.add_argument("--witness", metavar="PATH", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compose", help="Parallel composition")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--gen", default="sum", help="Cost generator: sum or scaled-sum:<k>")
    p.add_argument("-o", "--output", help="Output model (.cpaz is compressed)")
    _add_common(p)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("mincost", help="Minimum cost of a weak combined transition")
    p.add_argument("model")
    p.add_argument("--from", dest="source", required=True, help="Anchor state")
    p.add_argument("--action", required=True, help="External action or tau")
    p.add_argument("--target", required=True, help='Target as "<s>:<rat>,..."')
    group = p.add_mutually_exclusive_group()
    group.add_argument("--rel", help="Relation or partition file")
    group.add_argument("--rel-identity", action="store_true", help="Identity relation (default)")
    p.add_argument("--scheduler", metavar="PATH", help="Write the extracted scheduler")
    p.add_argument("--dump-lp", metavar="PATH", help="Write the untrimmed LP in plain linear format")
    _add_common(p)
    p.set_defaults(func=cmd_mincost)

    p = sub.add_parser("quotient", help="Weak probabilistic bisimulation classes")
    p.add_argument("first")
    p.add_argument("second", nargs="?")
    _add_common(p)
    p.set_defaults(func=cmd_quotient)
    return parser


def _setup_logging(verbose: int, quiet: bool) -> None:
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_HOLDS if e.code == 0 else EXIT_USAGE
    _setup_logging(args.verbose, args.quiet)
    if args.threads is not None:
        configure(threads=args.threads)

    start = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code, report, text = args.func(args)
    except (CostBisimError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        logger.exception("Internal error")
        return EXIT_INTERNAL

    elapsed = time.perf_counter() - start
    for w in caught:
        logger.warning("%s", w.message)
    report["warnings"] = [str(w.message) for w in caught]
    report["wall_time"] = round(elapsed, 6)
    _emit(report, args.json, text)
    logger.info("%s finished in %.3fs", args.command, elapsed)
    return code
