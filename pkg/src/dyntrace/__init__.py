"""Compositional rewriting programs over attributed C-sets.

Worlds are ACSets, programs are wiring diagrams of rewrite primitives,
and their meaning is a Mealy machine in an exceptional monad.
"""
from .colimits import PartialMap, pushout, pushout_complement
from .effects import DIST, LIST, MAYBE, Effect, EffectKind
from .mealy import MealyMachine, behaviorally_equal, trace
from .migration import SchemaFunctor, delta_migrate
from .rewriting import RewriteRule, rewrite
from .scheduler import Schedule, compile_to_mealy, run
from .schema import ACSet, ACSetBuilder, ACSetMorphism, Schema, Var, homomorphisms
from .trajectory import Trajectory

__version__ = "0.1.0"

__all__ = [
    "ACSet", "ACSetBuilder", "ACSetMorphism", "DIST", "Effect", "EffectKind", "LIST", "MAYBE",
    "MealyMachine", "PartialMap", "RewriteRule", "Schedule", "Schema", "SchemaFunctor",
    "Trajectory", "Var", "behaviorally_equal", "compile_to_mealy", "delta_migrate",
    "homomorphisms", "pushout", "pushout_complement", "rewrite", "run", "trace",
]
