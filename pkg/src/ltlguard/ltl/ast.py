"""Abstract syntax trees for linear temporal logic formulas.

Nodes are immutable, hashable dataclasses; every rewrite builds new values.
Structural equality (generated ``__eq__``) is the equality used throughout
the monitor, in particular for residual-change detection.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

TruthAssignment = frozenset[str]

_PROP_NAME = re.compile(r"[A-Za-z0-9_]+\Z")

# Reserved by the concrete grammar; a proposition with one of these names
# could not survive a print/parse round trip.
RESERVED_WORDS = frozenset({"true", "false", "G", "F", "X", "U"})


class Verdict(Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"

    def is_terminal(self) -> bool:
        return self is not Verdict.INCONCLUSIVE


@dataclass(frozen=True)
class Formula:
    """Base class for all formula nodes."""


@dataclass(frozen=True)
class TrueBool(Formula):
    pass


@dataclass(frozen=True)
class FalseBool(Formula):
    pass


@dataclass(frozen=True)
class Prop(Formula):
    name: str

    def __post_init__(self) -> None:
        if not _PROP_NAME.match(self.name):
            raise ValueError(
                f"invalid proposition name {self.name!r}: must be nonempty over [A-Za-z0-9_]"
            )
        if self.name in RESERVED_WORDS:
            raise ValueError(f"proposition name {self.name!r} is a reserved word")


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    child: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula


@dataclass(frozen=True)
class Always(Formula):
    child: Formula


def _cache_hash(cls):
    # Formulas are immutable and hashed constantly (simplification dedupe,
    # progression memos); memoize the generated structural hash per node.
    generated = cls.__hash__

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = generated(self)
            object.__setattr__(self, "_hash", h)
        return h

    cls.__hash__ = __hash__


for _cls in (TrueBool, FalseBool, Prop, Not, And, Or, Implies, Next, Until, Eventually, Always):
    _cache_hash(_cls)


TRUE = TrueBool()
FALSE = FalseBool()


def props_of(phi: Formula) -> frozenset[str]:
    """Set of proposition names occurring in ``phi``."""
    match phi:
        case Prop(name):
            return frozenset({name})
        case Not(child) | Next(child) | Eventually(child) | Always(child):
            return props_of(child)
        case And(left, right) | Or(left, right) | Implies(left, right) | Until(left, right):
            return props_of(left) | props_of(right)
        case _:
            return frozenset()


def node_count(phi: Formula) -> int:
    """Number of AST nodes in ``phi``."""
    match phi:
        case Not(child) | Next(child) | Eventually(child) | Always(child):
            return 1 + node_count(child)
        case And(left, right) | Or(left, right) | Implies(left, right) | Until(left, right):
            return 1 + node_count(left) + node_count(right)
        case _:
            return 1
