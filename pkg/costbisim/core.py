"""
Core serialization functions for costbisim.

This module implements the line-oriented model and relation text formats
and the container functions (dumps, loads, dump, load) that store those
documents with transparent compression.
"""

import logging
import re
import warnings
from fractions import Fraction
from typing import BinaryIO, Dict, List, Optional, Tuple, Union

from compress_utils import compress, decompress

from .config import get_config
from .exceptions import ParseError, ValidationError, WeightError
from .format import (
    HEADER_SIZE,
    KIND_MODEL,
    KIND_RELATION,
    decode_header,
    encode_header,
    is_cpa_container,
)
from .model import (
    CPA,
    Alphabet,
    Distribution,
    Transition,
    is_valid_id,
    prune_unreachable,
)
from .relations import BinaryRelation, Partition

logger = logging.getLogger(__name__)

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")
_TOKEN = re.compile(r"\S+")

Document = Union[CPA, BinaryRelation, Partition]


def _tokens(line: str) -> List[Tuple[str, int]]:
    """Whitespace-separated tokens with their 1-based columns."""
    return [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def parse_rational(text: str, line: Optional[int] = None, column: Optional[int] = None) -> Fraction:
    """Parse ``a/b`` or an integer exactly.

    Raises:
        ParseError: If the text is not a rational literal or has denominator 0
    """
    if not _RATIONAL.match(text):
        raise ParseError(f"expected a rational, got '{text}'", line, column)
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ParseError(f"zero denominator in '{text}'", line, column) from None


def _check_id(name: str, what: str, line: int, column: int) -> str:
    if not is_valid_id(name):
        raise ParseError(f"invalid {what} '{name}'", line, column)
    return name


def parse_model(text: str, prune: bool = True) -> CPA:
    """Parse a model document.

    Format::

        automaton <name>
        states: <id> <id> ...
        start: <id>
        external: <action> ...
        internal: <action> ...
        trans: <src> <action> <cost> -> <state>:<rat> [<state>:<rat> ...]

    A cost of ``_`` means 0; ``#`` starts a comment. ``states``,
    ``external``, ``internal`` and ``trans`` lines may repeat.

    Args:
        text: The UTF-8 document
        prune: Drop unreachable states (with a RuntimeWarning)

    Returns:
        CPA: The validated automaton

    Raises:
        ParseError: On syntax errors (with line and column)
        ValidationError: On model rule violations

    Example:
        >>> a = parse_model(open("wcc.cpa").read())
    """
    name: Optional[str] = None
    states: List[str] = []
    start: Optional[str] = None
    external: List[str] = []
    internal: List[str] = []
    pending: List[Tuple[int, str, str, Fraction, List[Tuple[str, Fraction]]]] = []
    declared = set()
    actions = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokens(_strip_comment(raw))
        if not tokens:
            continue
        head, col = tokens[0]
        rest = tokens[1:]

        if head == "automaton":
            if name is not None:
                raise ValidationError(f"line {lineno}: duplicate 'automaton' declaration")
            if len(rest) != 1:
                raise ParseError("expected 'automaton <name>'", lineno, col)
            name = rest[0][0]
            continue
        if name is None:
            raise ParseError("document must start with 'automaton <name>'", lineno, col)

        if head == "states:":
            for s, c in rest:
                _check_id(s, "state id", lineno, c)
                if s in declared:
                    raise ValidationError(f"line {lineno}: duplicate state '{s}'")
                declared.add(s)
                states.append(s)
        elif head == "start:":
            if start is not None:
                raise ValidationError(f"line {lineno}: duplicate 'start' declaration")
            if len(rest) != 1:
                raise ParseError("expected 'start: <id>'", lineno, col)
            start = _check_id(rest[0][0], "state id", lineno, rest[0][1])
        elif head in ("external:", "internal:"):
            group = external if head == "external:" else internal
            for a, c in rest:
                if a == "tau":
                    raise ValidationError(
                        f"line {lineno}: 'tau' is reserved and cannot be declared"
                    )
                _check_id(a, "action", lineno, c)
                if a in actions:
                    raise ValidationError(f"line {lineno}: duplicate action '{a}'")
                actions.add(a)
                group.append(a)
        elif head == "trans:":
            pending.append((lineno, *_parse_transition(rest, lineno, col)))
        else:
            raise ParseError(f"unknown directive '{head}'", lineno, col)

    if name is None:
        raise ParseError("empty document: missing 'automaton <name>'", 1, 1)

    clash = set(external) & set(internal)
    if clash:
        raise ValidationError(f"actions both external and internal: {sorted(clash)}")
    if start is not None and start not in declared:
        raise ValidationError(f"undeclared start state '{start}'")

    transitions = []
    for lineno, src, action, cost, targets in pending:
        if src not in declared:
            raise ValidationError(f"line {lineno}: undeclared state '{src}'")
        if action not in actions:
            raise ValidationError(f"line {lineno}: undeclared action '{action}'")
        for t, _ in targets:
            if t not in declared:
                raise ValidationError(f"line {lineno}: undeclared state '{t}'")
        if cost < 0:
            raise ValidationError(f"line {lineno}: negative cost {cost}")
        try:
            target = Distribution(targets)
        except WeightError as e:
            raise ValidationError(f"line {lineno}: {e}") from e
        if target.mass() != 1:
            raise ValidationError(
                f"line {lineno}: target mass is {target.mass()}, expected 1"
            )
        transitions.append(Transition(src, action, target, cost))

    automaton = CPA(name, states, start, Alphabet(tuple(external), tuple(internal)), transitions)
    return prune_unreachable(automaton) if prune else automaton


def _parse_transition(
    rest: List[Tuple[str, int]], lineno: int, col: int
) -> Tuple[str, str, Fraction, List[Tuple[str, Fraction]]]:
    if len(rest) < 5 or rest[3][0] != "->":
        raise ParseError(
            "expected 'trans: <src> <action> <cost> -> <state>:<rat> ...'", lineno, col
        )
    (src, c_src), (action, c_act), (cost_text, c_cost) = rest[0], rest[1], rest[2]
    _check_id(src, "state id", lineno, c_src)
    if action == "tau":
        raise ValidationError(f"line {lineno}: 'tau' cannot label a transition")
    _check_id(action, "action", lineno, c_act)
    cost = Fraction(0) if cost_text == "_" else parse_rational(cost_text, lineno, c_cost)

    targets: List[Tuple[str, Fraction]] = []
    seen = set()
    for item, c in rest[4:]:
        state, sep, prob = item.rpartition(":")
        if not sep or not state:
            raise ParseError(f"expected '<state>:<rat>', got '{item}'", lineno, c)
        _check_id(state, "state id", lineno, c)
        p = parse_rational(prob, lineno, c + len(state) + 1)
        if p <= 0:
            raise ValidationError(f"line {lineno}: nonpositive probability for '{state}'")
        if state in seen:
            raise ValidationError(f"line {lineno}: state '{state}' listed twice")
        seen.add(state)
        targets.append((state, p))
    return src, action, cost, targets


def serialize_model(a: CPA) -> str:
    """Render a CPA in the model format; parse_model reads it back."""
    lines = [f"automaton {a.name}", "states: " + " ".join(a.states)]
    if a.start is not None:
        lines.append(f"start: {a.start}")
    lines.append(("external: " + " ".join(a.alphabet.external)).rstrip())
    lines.append(("internal: " + " ".join(a.alphabet.internal)).rstrip())
    for tr in a.transitions:
        targets = " ".join(f"{s}:{p}" for s, p in tr.target.items())
        lines.append(f"trans: {tr.source} {tr.action} {tr.cost} -> {targets}")
    return "\n".join(lines) + "\n"


def parse_relation(
    text: str, universe: Optional[List[str]] = None
) -> Union[BinaryRelation, Partition]:
    """Parse a relation document.

    ``pair <s> <t>`` lines give a directed relation; ``class <s> <t> ...``
    lines give an equivalence. The two styles cannot be mixed.

    Args:
        text: The UTF-8 document
        universe: Optional state universe; for partitions, states missing
            from every class become singleton classes

    Returns:
        BinaryRelation or Partition

    Raises:
        ParseError: On unknown lines or mixed styles
    """
    pairs: List[Tuple[str, str]] = []
    classes: List[List[str]] = []
    style: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokens(_strip_comment(raw))
        if not tokens:
            continue
        head, col = tokens[0]
        if head not in ("pair", "class", "class:"):
            raise ParseError(f"unknown relation line '{head}'", lineno, col)
        kind = "pair" if head == "pair" else "class"
        if style is not None and kind != style:
            raise ParseError("'pair' and 'class' lines cannot be mixed", lineno, col)
        style = kind
        for s, c in tokens[1:]:
            _check_id(s, "state id", lineno, c)
        if kind == "pair":
            if len(tokens) != 3:
                raise ParseError("expected 'pair <s> <t>'", lineno, col)
            pairs.append((tokens[1][0], tokens[2][0]))
        else:
            if len(tokens) < 2:
                raise ParseError("empty class", lineno, col)
            classes.append([s for s, _ in tokens[1:]])

    if style == "class":
        if universe is not None:
            covered = {s for c in classes for s in c}
            classes += [[s] for s in universe if s not in covered]
        return Partition(classes, universe)
    left = universe if universe is not None else [x for x, _ in pairs]
    right = universe if universe is not None else [y for _, y in pairs]
    return BinaryRelation(pairs, left, right)


def serialize_relation(r: BinaryRelation) -> str:
    """Render a relation as ``pair`` lines."""
    return "".join(f"pair {x} {y}\n" for x, y in r)


def serialize_partition(p: Partition) -> str:
    """Render a partition as ``class:`` lines."""
    return "".join("class: " + " ".join(c) + "\n" for c in p.classes)


def _to_text(doc: Document) -> Tuple[str, int]:
    if isinstance(doc, CPA):
        return serialize_model(doc), KIND_MODEL
    if isinstance(doc, Partition):
        return serialize_partition(doc), KIND_RELATION
    if isinstance(doc, BinaryRelation):
        return serialize_relation(doc), KIND_RELATION
    raise TypeError(f"Cannot serialize '{type(doc).__name__}'")


def dumps(
    doc: Document,
    *,
    algorithm: Optional[str] = None,
    level: Optional[int] = None,
) -> bytes:
    """Serialize and compress a model or relation.

    Args:
        doc: A CPA, BinaryRelation or Partition
        algorithm: Compression algorithm (overrides global config)
        level: Compression level (overrides global config)

    Returns:
        bytes: Container header followed by the (compressed) document

    Example:
        >>> blob = costbisim.dumps(automaton)
    """
    text, kind = _to_text(doc)
    payload = text.encode("utf-8")

    config = get_config()
    alg = algorithm or config.algorithm
    lvl = level or config.level

    if len(payload) < config.min_size or alg == "none":
        return encode_header("none", 0, kind) + payload
    return encode_header(alg, lvl, kind) + compress(payload, alg, lvl)


def _decode(data: bytes, strict: bool) -> Tuple[str, int]:
    if not isinstance(data, (bytes, bytearray)):
        raise TypeError(f"A bytes-like object is required, not '{type(data).__name__}'")
    if not is_cpa_container(data):
        # Plain text documents are accepted as-is
        text = bytes(data).decode("utf-8")
        kind = KIND_RELATION if _looks_like_relation(text) else KIND_MODEL
        return text, kind
    try:
        _, algorithm, _, kind = decode_header(data, strict)
        body = bytes(data[HEADER_SIZE:])
        payload = body if algorithm == "none" else decompress(body, algorithm)
    except Exception as e:
        if strict:
            raise
        warnings.warn(
            f"Error processing container, falling back to plain text: {e}",
            RuntimeWarning,
        )
        return bytes(data).decode("utf-8", errors="replace"), KIND_MODEL
    return payload.decode("utf-8"), kind


def _looks_like_relation(text: str) -> bool:
    for raw in text.splitlines():
        tokens = _strip_comment(raw).split()
        if tokens:
            return tokens[0] in ("pair", "class", "class:")
    return False


def loads(
    data: bytes,
    *,
    strict: bool = True,
    prune: bool = True,
    universe: Optional[List[str]] = None,
) -> Document:
    """Decompress and parse a model or relation.

    Args:
        data: Container bytes or plain UTF-8 text
        strict: If True, raises errors for unsupported versions/algorithms.
            If False, attempts to read the data with warnings.
        prune: Prune unreachable states of a model
        universe: State universe for relation documents

    Returns:
        CPA, BinaryRelation or Partition
    """
    text, kind = _decode(data, strict)
    if kind == KIND_RELATION:
        return parse_relation(text, universe)
    return parse_model(text, prune=prune)


def dump(doc: Document, file: BinaryIO, **kwargs) -> None:
    """Write :func:`dumps` output to a binary file."""
    file.write(dumps(doc, **kwargs))


def load(file: BinaryIO, **kwargs) -> Document:
    """Read a document written by :func:`dump` (or a plain text file)."""
    return loads(file.read(), **kwargs)


def read_model(path: str, prune: bool = True) -> CPA:
    """Load a model file, plain or compressed."""
    with open(path, "rb") as f:
        doc = load(f, prune=prune)
    if not isinstance(doc, CPA):
        raise ParseError(f"{path} holds a relation, not a model")
    return doc


def read_relation(path: str, universe: Optional[List[str]] = None) -> Union[BinaryRelation, Partition]:
    """Load a relation file, plain or compressed."""
    with open(path, "rb") as f:
        data = f.read()
    if not is_cpa_container(data):
        return parse_relation(data.decode("utf-8"), universe)
    doc = loads(data, universe=universe)
    if isinstance(doc, CPA):
        raise ParseError(f"{path} holds a model, not a relation")
    return doc


def write_document(doc: Document, path: str, compressed: Optional[bool] = None) -> None:
    """Write a document; compression defaults to on for ``.cpaz`` paths."""
    if compressed is None:
        compressed = path.endswith(".cpaz")
    with open(path, "wb") as f:
        if compressed:
            dump(doc, f)
        else:
            f.write(_to_text(doc)[0].encode("utf-8"))
    logger.debug("Wrote %s", path)


def model_stats(a: CPA) -> Dict[str, int]:
    """Sizes used in reports."""
    return {
        "states": len(a.states),
        "transitions": len(a.transitions),
        "external": len(a.alphabet.external),
        "internal": len(a.alphabet.internal),
    }
