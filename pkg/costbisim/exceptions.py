"""
Custom exceptions for costbisim.

This module defines the exceptions raised while parsing, validating,
composing and analysing cost probabilistic automata.
"""

# Supported container algorithms for helpful error messages
SUPPORTED_ALGORITHMS = ("zstd", "brotli", "zlib", "lzma", "bzip2", "lz4", "none")


class CostBisimError(Exception):
    """Base class for all costbisim exceptions."""

    pass


class ParseError(CostBisimError):
    """Exception raised when a model or relation document is malformed.

    The offending position is available as ``line`` and ``column``
    (both 1-based; ``column`` may be None when not known).
    """

    def __init__(self, message=None, line=None, column=None):
        self.reason = message
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column else "")
            message = f"{where}: {message}"
        super().__init__(message)


class ValidationError(CostBisimError):
    """Exception raised when a syntactically valid model breaks a model rule.

    Typical causes:
    - a target distribution whose mass is not exactly 1
    - a negative transition cost
    - an undeclared state or action
    - an action declared both external and internal, or named 'tau'
    """

    pass


class WeightError(CostBisimError):
    """Exception raised for invalid probability weights."""

    pass


class MixedTransitions(CostBisimError):
    """Exception raised when combining transitions with different sources or actions."""

    pass


class NotAnMdp(CostBisimError):
    """Exception raised when a state enables two transitions with the same action."""

    def __init__(self, message=None, state=None, action=None):
        if message is None and state is not None:
            message = (
                f"State '{state}' enables more than one '{action}' transition; "
                f"the automaton is not an MDP"
            )
        super().__init__(message)
        self.state = state
        self.action = action


class AlphabetClash(CostBisimError):
    """Exception raised when an action is external on one side and internal on the other."""

    def __init__(self, message=None, actions=None):
        if message is None and actions:
            names = ", ".join(f"'{a}'" for a in sorted(actions))
            message = f"Actions are external in one automaton and internal in the other: {names}"
        super().__init__(message)
        self.actions = frozenset(actions or ())


class UniverseMismatch(CostBisimError):
    """Exception raised when relations or distributions live on incompatible state sets."""

    pass


class Incompatible(CostBisimError):
    """Exception raised when composing automata that are not compatible.

    Two automata are compatible when no action of one is internal to the other.
    """

    pass


class UnknownState(CostBisimError):
    """Exception raised when a state is not part of the automaton."""

    def __init__(self, message=None, state=None):
        if message is None and state is not None:
            message = f"Unknown state: '{state}'"
        super().__init__(message)
        self.state = state


class UnknownAction(CostBisimError):
    """Exception raised when an action is not declared external (or the 'tau' token)."""

    def __init__(self, message=None, action=None):
        if message is None and action is not None:
            message = f"Unknown external action: '{action}'"
        super().__init__(message)
        self.action = action


class NoSuchTransitions(CostBisimError):
    """Exception raised when a state enables no transition with the requested action."""

    pass


class UnknownGenerator(CostBisimError):
    """Exception raised when a generator function name is not in the catalog."""

    pass


class DimensionMismatch(CostBisimError):
    """Exception raised when LP matrix, bound and objective sizes disagree."""

    pass


class LPSelfCheckError(CostBisimError):
    """Exception raised when a returned LP solution fails exact re-substitution.

    This indicates a solver bug and should never happen.
    """

    pass


class NotOptimal(CostBisimError):
    """Exception raised when a scheduler is requested from a non-optimal LP result."""

    pass


class NonTerminating(CostBisimError):
    """Exception raised when a scheduler does not stop with probability 1."""

    pass


class CyclicModel(CostBisimError):
    """Exception raised when fragment enumeration meets a cycle."""

    pass


class DegenerateSplit(CostBisimError):
    """Exception raised when a refinement would leave a class side empty.

    This indicates a disagreement between FindSplit and Refine and should
    never happen.
    """

    pass


class InvalidFormatError(CostBisimError):
    """Exception raised when data has an invalid container format.

    Compressed containers start with the magic bytes 'CPAZ'.
    """

    pass


class UnsupportedAlgorithmError(CostBisimError):
    """Exception raised when an unsupported compression algorithm is requested.

    Supported algorithms are: zstd, brotli, zlib, lzma, bzip2, lz4, none
    """

    def __init__(self, message=None, algorithm=None):
        if message is None and algorithm is not None:
            supported = ", ".join(f"'{a}'" for a in SUPPORTED_ALGORITHMS)
            message = (
                f"Unsupported compression algorithm: '{algorithm}'. "
                f"Supported algorithms are: {supported}"
            )
        super().__init__(message)
        self.algorithm = algorithm


class UnsupportedVersionError(CostBisimError):
    """Exception raised when the container format version is not supported.

    This occurs when reading a file written by a newer costbisim.
    """

    def __init__(self, message=None, version=None, max_supported=None):
        if message is None and version is not None:
            message = (
                f"Unsupported container format version: {version}. "
                f"This library supports up to version {max_supported or 'unknown'}. "
                f"Try upgrading: pip install --upgrade costbisim"
            )
        super().__init__(message)
        self.version = version
        self.max_supported = max_supported
