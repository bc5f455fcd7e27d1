"""Committed temporal pattern table with three specification levels.

Seven patterns, each renderable as informal text, precise text, or
precise text plus the formula string.  Substituted values default to the
committed examples and can be overridden per call.
"""

from __future__ import annotations

import random
from collections.abc import Mapping

from ..ltl import (
    And,
    Always,
    Eventually,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Prop,
    Until,
    render,
)
from .generator import build_tree_formula
from .events import prop_name

PATTERN_IDS = (
    "universality",
    "absence",
    "response",
    "absence_between",
    "constrained_response",
    "tree_b2_d1",
    "tree_b2_d4",
)

LEVELS = ("informal", "precise", "precise+ltl")

_TREE_D4_LABELS = (
    "toucan",
    "crane", "pelican",
    "hawk", "parrot", "heron", "ibis",
    "falcon", "raven", "stork", "puffin", "marten", "weasel", "jackal", "lemur",
    "wolf", "salmon", "owl", "fox", "otter", "badger", "lynx", "viper",
    "gecko", "bison", "moose", "gibbon", "koala", "wombat", "star", "circle",
)

_DEFAULTS: dict[str, dict[str, str]] = {
    "universality": {"color": "red"},
    "absence": {"animal": "owl"},
    "response": {"shape": "triangle", "color": "blue"},
    "absence_between": {"animal": "fox", "shape": "star", "color": "green"},
    "constrained_response": {"shape1": "square", "animal": "fox", "shape2": "circle"},
    "tree_b2_d1": {"a": "toucan", "b1": "crane", "b2": "pelican", "leaf": "deer"},
    "tree_b2_d4": {"a": "toucan", "leaf": "deer"},
}


class UnknownPatternError(KeyError):
    pass


def _an(word: str) -> str:
    return "an" if word[:1].lower() in "aeiou" else "a"


def _values(pattern_id: str, overrides: Mapping[str, str] | None) -> dict[str, str]:
    values = dict(_DEFAULTS[pattern_id])
    if overrides:
        values.update(overrides)
    return values


def _tree_d1(v: Mapping[str, str]) -> tuple[Formula, str, str]:
    a, b1, b2, leaf = (Prop(prop_name(None, "animal", v[k])) for k in ("a", "b1", "b2", "leaf"))
    formula = Eventually(
        And(
            a,
            Next(
                Eventually(
                    Or(
                        And(b1, Next(Eventually(leaf))),
                        And(b2, Next(Eventually(leaf))),
                    )
                )
            ),
        )
    )
    informal = (
        f"At some point {_an(v['a'])} {v['a']} should appear, followed by either "
        f"{_an(v['b1'])} {v['b1']} or {_an(v['b2'])} {v['b2']}, and then {_an(v['leaf'])} {v['leaf']}."
    )
    precise = (
        f"At some time step, {_an(v['a'])} {v['a']} must appear, and then at some strictly "
        f"later time step, either: ({_an(v['b1'])} {v['b1']} appears, and then at some strictly "
        f"later time step, {_an(v['leaf'])} {v['leaf']} appears) or ({_an(v['b2'])} {v['b2']} "
        f"appears, and then at some strictly later time step, {_an(v['leaf'])} {v['leaf']} appears)."
    )
    return formula, informal, precise


def _tree_d4(v: Mapping[str, str]) -> tuple[Formula, str, str]:
    labels = list(_TREE_D4_LABELS)
    labels[0] = v["a"]
    categories = {"star": "shape", "circle": "shape"}
    path_props = tuple(
        prop_name(None, categories.get(label, "animal"), label)
        for label in (labels[0], labels[1], labels[3], labels[7], labels[15])
    ) + (prop_name(None, "animal", v["leaf"]),)
    # Alternatives in committed order; the fixed rng pins the path to the
    # leftmost branch so the rendering is stable.
    remaining = [
        prop_name(None, categories.get(label, "animal"), label)
        for label in labels
        if label not in (labels[0], labels[1], labels[3], labels[7], labels[15])
    ]
    rng = random.Random(0)
    formula, paths = build_tree_formula(path_props, iter(remaining), rng)
    b1, b2 = paths[0][1].split("_")[-1], None
    seen = [p[1] for p in paths]
    level1 = []
    for prop in seen:
        if prop not in level1:
            level1.append(prop)
    b1, b2 = (p.split("_", 1)[1] for p in level1)
    informal = (
        f"At some point {_an(v['a'])} {v['a']} should appear, followed by either "
        f"{_an(b1)} {b1} or {_an(b2)} {b2}. Each branch splits again in the same way, "
        f"four levels deep. Everything ends with {_an(v['leaf'])} {v['leaf']}."
    )

    def precise_node(paths_group, depth):
        heads = []
        for p in paths_group:
            if p[0] not in heads:
                heads.append(p[0])
        if len(heads) == 1 and all(len(p) == 1 for p in paths_group):
            word = heads[0].split("_", 1)[1]
            return f"{_an(word)} {word} appears"
        if len(heads) == 1:
            word = heads[0].split("_", 1)[1]
            rest = [p[1:] for p in paths_group if len(p) > 1]
            return (
                f"{_an(word)} {word} appears, and then at some strictly later time step, "
                f"{precise_node(rest, depth + 1)}"
            )
        branches = [
            f"({precise_node([p for p in paths_group if p[0] == head], depth + 1)})"
            for head in heads
        ]
        return "either: " + " or ".join(branches)

    precise = f"At some time step, {precise_node([list(p) for p in paths], 0)}."
    return formula, informal, precise


def pattern_formula(pattern_id: str, values: Mapping[str, str] | None = None) -> Formula:
    formula, _, _ = _build(pattern_id, values)
    return formula


def _build(pattern_id: str, overrides: Mapping[str, str] | None) -> tuple[Formula, str, str]:
    if pattern_id not in PATTERN_IDS:
        raise UnknownPatternError(f"unknown pattern id {pattern_id!r}; known: {PATTERN_IDS}")
    v = _values(pattern_id, overrides)
    if pattern_id == "universality":
        p = Prop(prop_name(None, "color", v["color"]))
        return (
            Always(p),
            f"The color is always {v['color']}.",
            f"At every time step in the trace, the color must be {v['color']}.",
        )
    if pattern_id == "absence":
        p = Prop(prop_name(None, "animal", v["animal"]))
        return (
            Always(Not(p)),
            f"{_an(v['animal']).capitalize()} {v['animal']} never appears.",
            f"At no time step in the trace does the animal \"{v['animal']}\" appear.",
        )
    if pattern_id == "response":
        p = Prop(prop_name(None, "shape", v["shape"]))
        s = Prop(prop_name(None, "color", v["color"]))
        return (
            Always(Implies(p, Eventually(s))),
            f"Whenever {_an(v['shape'])} {v['shape']} appears, {_an(v['color'])} "
            f"{v['color']} item should eventually appear too.",
            f"It is always the case that for every occurrence of {_an(v['shape'])} "
            f"{v['shape']} shape, the color {v['color']} must occur at the same time "
            f"step or at a later time step.",
        )
    if pattern_id == "absence_between":
        p = Prop(prop_name(None, "color", v["color"]))
        q = Prop(prop_name(None, "animal", v["animal"]))
        r = Prop(prop_name(None, "shape", v["shape"]))
        return (
            Always(Implies(And(q, And(Not(r), Eventually(r))), Until(Not(p), r))),
            f"{_an(v['color']).capitalize()} {v['color']} item should not occur between "
            f"{_an(v['animal'])} {v['animal']} and {_an(v['shape'])} {v['shape']}.",
            f"It is always the case that if {_an(v['animal'])} {v['animal']} appears at a "
            f"time step where {_an(v['shape'])} {v['shape']} does not appear, and "
            f"{_an(v['shape'])} {v['shape']} will appear at some future time step, then "
            f"the color {v['color']} must not appear at any time step from that point "
            f"until the {v['shape']} appears.",
        )
    if pattern_id == "constrained_response":
        p = Prop(prop_name(None, "shape", v["shape1"]))
        q = Prop(prop_name(None, "animal", v["animal"]))
        r = Prop(prop_name(None, "shape", v["shape2"]))
        return (
            Always(Implies(p, Until(Not(q), r))),
            f"Whenever {_an(v['shape1'])} {v['shape1']} appears, {_an(v['animal'])} "
            f"{v['animal']} should not appear until {_an(v['shape2'])} {v['shape2']} appears.",
            f"It is always the case that whenever {_an(v['shape1'])} {v['shape1']} shape "
            f"appears, the animal {v['animal']} must not appear at any time step from that "
            f"point until the shape {v['shape2']} appears. For every {v['shape1']}, the "
            f"shape {v['shape2']} must eventually appear at that time step or at a later "
            f"time step.",
        )
    if pattern_id == "tree_b2_d1":
        return _tree_d1(v)
    return _tree_d4(v)


def render_constraint(
    pattern_id: str, level: str = "informal", values: Mapping[str, str] | None = None
) -> str:
    """Pattern wording at the given specification level; ``precise+ltl``
    appends the round-trip-parseable formula string."""
    if level not in LEVELS:
        raise ValueError(f"unknown specification level {level!r}; one of {LEVELS}")
    formula, informal, precise = _build(pattern_id, values)
    if level == "informal":
        return informal
    if level == "precise":
        return precise
    return f"{precise}\nLTL: {render(formula, 'ascii')}"
