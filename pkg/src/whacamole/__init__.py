"""Competitive analysis of online item collection from dynamic sets and queues."""

from .algorithms import (
    ALGORITHMS,
    DecQueEFH,
    DecQueEFHParams,
    FIFOQueEH,
    FIFOQueEHParams,
    Greedy,
    MarkAndPick,
    OnlineAlgorithm,
    RMix,
    UniRand,
    make_algorithm,
)
from .model import (
    Insert,
    Instance,
    Item,
    Schedule,
    StepOps,
    canonicalize_eef,
    check_eef,
    gain,
    simulate,
    static_instance,
    validate_instance,
)
from .offline import optimal_gain_bruteforce, optimal_gain_matching

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "DecQueEFH",
    "DecQueEFHParams",
    "FIFOQueEH",
    "FIFOQueEHParams",
    "Greedy",
    "Insert",
    "Instance",
    "Item",
    "MarkAndPick",
    "OnlineAlgorithm",
    "RMix",
    "Schedule",
    "StepOps",
    "UniRand",
    "canonicalize_eef",
    "check_eef",
    "gain",
    "make_algorithm",
    "optimal_gain_bruteforce",
    "optimal_gain_matching",
    "simulate",
    "static_instance",
    "validate_instance",
]
