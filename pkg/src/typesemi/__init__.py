"""Exact computation in the type semigroup of tuples of open sets of a
zero-dimensional dynamical system."""

from .action import DynamicalSystem, builtin_systems, load_system
from .semigroup import add, leq, prec, w4_interpolate, w5_complement, w6_split, way_below
from .space import ClopenSet, LazyOpen
from .subeq import Budget, SubeqWitness, TupleElement, Verdict, compose, decide, verify

__all__ = [
    "Budget", "ClopenSet", "DynamicalSystem", "LazyOpen", "SubeqWitness", "TupleElement", "Verdict",
    "add", "builtin_systems", "compose", "decide", "leq", "load_system", "prec", "verify",
    "w4_interpolate", "w5_complement", "w6_split", "way_below",
]
