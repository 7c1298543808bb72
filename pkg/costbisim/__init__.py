"""
costbisim - Bisimulations and weak-transition costs for cost probabilistic automata.

This package models cost probabilistic automata, composes them in parallel,
computes exact minimum costs of weak combined transitions through a flow
LP, and decides strong, strong probabilistic and weak probabilistic
bisimilarity in plain, cost-preserving and minor-cost variants.
"""

# Version management with setuptools_scm
try:
    # First try to get the version from the generated _version.py file
    from ._version import version as __version__
except ImportError:
    # Fall back to an unknown version
    __version__ = "0.0.0+unknown"

from .bisim import (
    CostMode,
    Relation,
    Verdict,
    border_states,
    decide,
    decide_cost_preserving_weak,
    decide_minor_weak,
    decide_strong,
    decide_strong_prob,
    decide_weak_prob,
    find_split,
    quotient,
    refine,
    verify_witness,
)
from .compose import (
    SUM,
    GeneratorFunction,
    certify,
    compose_cpa,
    parse_generator,
    register_generator,
    scaled_sum,
)
from .config import CostBisimConfig, configure, get_config

# Import core functionality
from .core import (
    dump,
    dumps,
    load,
    loads,
    parse_model,
    parse_relation,
    read_model,
    serialize_model,
)
from .flownet import build_mincost_lp, build_network
from .model import CPA, TAU, Alphabet, Distribution, Transition, dirac, disjoint_union
from .relations import BinaryRelation, Partition, lift_check
from .sched import DeterminateScheduler, extract_scheduler, scheduler_cost

__all__ = [
    # Models
    "CPA",
    "TAU",
    "Alphabet",
    "Distribution",
    "Transition",
    "dirac",
    "disjoint_union",
    # Relations
    "BinaryRelation",
    "Partition",
    "lift_check",
    # Composition
    "SUM",
    "GeneratorFunction",
    "certify",
    "compose_cpa",
    "parse_generator",
    "register_generator",
    "scaled_sum",
    # Weak transitions
    "build_network",
    "build_mincost_lp",
    "DeterminateScheduler",
    "extract_scheduler",
    "scheduler_cost",
    # Decisions
    "CostMode",
    "Relation",
    "Verdict",
    "border_states",
    "decide",
    "decide_cost_preserving_weak",
    "decide_minor_weak",
    "decide_strong",
    "decide_strong_prob",
    "decide_weak_prob",
    "find_split",
    "quotient",
    "refine",
    "verify_witness",
    # Persistence
    "dumps",
    "loads",
    "dump",
    "load",
    "parse_model",
    "parse_relation",
    "read_model",
    "serialize_model",
    # Configuration
    "configure",
    "get_config",
    "CostBisimConfig",
    # Version
    "__version__",
]
