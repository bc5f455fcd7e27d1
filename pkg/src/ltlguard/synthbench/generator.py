"""Seeded generators for synthetic attribute-event benchmark cases.

Every case is built so that its truth value is known at construction:
the target propositions occur exactly at their designated steps (in path
order, the configured gap apart) and nowhere else; distractor draws mask
out all target values.  A satisfied case places the full path; an
unsatisfied case omits the final fulfillment event, which for these
eventuality-shaped formulas leaves the monitor inconclusive forever.

Complex-family formulas are binary trees whose non-path branch labels
come from a reserved number pool that the trace can never emit, so each
constraint's truth depends only on its own (pairwise disjoint) path.
"""

from __future__ import annotations

import json
import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Iterator

from ..ltl import And, Eventually, Formula, Next, Or, Prop, parse, render
from ..models import derive_seed
from ..trace import StepRecord, Trace
from .events import (
    CATEGORIES,
    AttributeEvent,
    load_vocabulary,
    prop_name,
    render_step,
)

TREE_DEPTH = 4
SIMPLE_PATH_LEN = 2
COMPLEX_PATH_LEN = TREE_DEPTH + 2
# Number values reserved for never-occurring branch alternatives of
# complex formulas; excluded from every event draw.
ALT_POOL_SIZE = 40
DISTRACTOR_FLOOR = 2
COMPLEX_GAP_SCHEDULE = {1: 23, 5: 117, 10: 91, 20: 40}


class GenerationError(ValueError):
    """Invalid knobs or exhausted vocabulary."""


@dataclass(frozen=True)
class BenchConstraint:
    constraint_id: str
    formula: Formula
    informal: str
    precise: str
    path: tuple[str, ...]
    tree_paths: tuple[tuple[str, ...], ...] = ()

    def to_dict(self) -> dict:
        return {
            "id": self.constraint_id,
            "formula": render(self.formula, "ascii"),
            "informal": self.informal,
            "precise": self.precise,
            "path": list(self.path),
            "tree_paths": [list(p) for p in self.tree_paths],
        }


@dataclass(frozen=True)
class BenchCase:
    trace: Trace
    constraints: tuple[BenchConstraint, ...]
    truth: tuple[bool, ...]
    knobs: Mapping[str, object]

    def to_dict(self) -> dict:
        return {
            "knobs": dict(sorted(self.knobs.items())),
            "truth": list(self.truth),
            "constraints": [c.to_dict() for c in self.constraints],
            "trace": {
                "metadata": dict(self.trace.metadata),
                "steps": [
                    {
                        "t": s.t,
                        "input": s.input,
                        "output": s.output,
                        "labels": sorted(s.labels or ()),
                    }
                    for s in self.trace.steps
                ],
            },
        }


def case_from_dict(obj: Mapping) -> BenchCase:
    constraints = tuple(
        BenchConstraint(
            constraint_id=c["id"],
            formula=parse(c["formula"]),
            informal=c["informal"],
            precise=c["precise"],
            path=tuple(c["path"]),
            tree_paths=tuple(tuple(p) for p in c.get("tree_paths", ())),
        )
        for c in obj["constraints"]
    )
    steps = tuple(
        StepRecord(s["t"], s.get("input", ""), s["output"], frozenset(s.get("labels", ())))
        for s in obj["trace"]["steps"]
    )
    return BenchCase(
        trace=Trace(steps, obj["trace"].get("metadata", {})),
        constraints=constraints,
        truth=tuple(obj["truth"]),
        knobs=obj["knobs"],
    )


def save_cases(cases: Sequence[BenchCase], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(json.dumps(case.to_dict(), ensure_ascii=False) + "\n")


def load_cases(path) -> list[BenchCase]:
    cases = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                cases.append(case_from_dict(json.loads(line)))
    return cases


@dataclass
class _Pools:
    """Per-(entity, category) value pools for path assignment and distractors."""

    available: dict[tuple[int, str], list]
    alt_values: list[int]
    assigned: dict[tuple[int, str], set] = field(default_factory=dict)

    def capacity(self, key: tuple[int, str]) -> int:
        return len(self.available[key]) - DISTRACTOR_FLOOR

    def draw_path_value(self, rng: random.Random, keys: Sequence[tuple[int, str]]):
        weighted = [(key, self.capacity(key)) for key in keys if self.capacity(key) > 0]
        if not weighted:
            raise GenerationError("vocabulary exhausted: too many target propositions")
        total = sum(w for _, w in weighted)
        roll = rng.randrange(total)
        acc = 0
        for key, weight in weighted:
            acc += weight
            if roll < acc:
                pool = self.available[key]
                value = pool.pop(rng.randrange(len(pool)))
                self.assigned.setdefault(key, set()).add(value)
                return key, value
        raise AssertionError("unreachable")

    def distractor(self, rng: random.Random, key: tuple[int, str]):
        pool = self.available[key]
        return pool[rng.randrange(len(pool))]


def _make_pools(entities: int, family: str) -> _Pools:
    vocab = load_vocabulary()
    numbers = list(vocab.numbers)
    if family == "complex":
        alt_values = numbers[-ALT_POOL_SIZE:]
        emittable_numbers = numbers[:-ALT_POOL_SIZE]
    else:
        alt_values = []
        emittable_numbers = numbers
    available: dict[tuple[int, str], list] = {}
    for entity in range(1, entities + 1):
        available[(entity, "animal")] = list(vocab.animals)
        available[(entity, "shape")] = list(vocab.shapes)
        available[(entity, "color")] = list(vocab.colors)
        available[(entity, "number")] = list(emittable_numbers)
    return _Pools(available=available, alt_values=alt_values)


def build_tree_formula(
    path_props: Sequence[str],
    alternatives: Iterator[str],
    rng: random.Random,
    depth: int = TREE_DEPTH,
) -> tuple[Formula, tuple[tuple[str, ...], ...]]:
    """Binary tree of chained eventualities; returns it with all its
    root-to-leaf label paths.  ``path_props`` labels one root-to-leaf
    path (placed on a random branch at each level) plus the shared leaf.
    """
    leaf = path_props[-1]

    def node(level: int, on_path: bool) -> tuple[Formula, list[tuple[str, ...]]]:
        label = path_props[level] if on_path else next(alternatives)
        if level == depth:
            return And(Prop(label), Next(Eventually(Prop(leaf)))), [(label, leaf)]
        path_side = rng.randrange(2) if on_path else 0
        children = []
        paths: list[tuple[str, ...]] = []
        for side in range(2):
            child, child_paths = node(level + 1, on_path and side == path_side)
            children.append(child)
            paths.extend((label, *p) for p in child_paths)
        return And(Prop(label), Next(Eventually(Or(children[0], children[1])))), paths

    root, paths = node(0, True)
    return Eventually(root), tuple(paths)


def _simple_formula(path_props: Sequence[str]) -> Formula:
    first, second = path_props
    return Eventually(And(Prop(first), Next(Eventually(Prop(second)))))


def _describe(prop: str) -> str:
    parts = prop.split("_")
    entity = None
    if parts[0].startswith("e") and parts[0][1:].isdigit():
        entity = int(parts[0][1:])
        parts = parts[1:]
    category, value = parts[0], "_".join(parts[1:])
    owner = f"Entity {entity}'s " if entity is not None else "the "
    if category == "number":
        return f"{owner}number is {value}"
    return f"{owner}{category} is {_article(value)} {value}" if category != "color" else f"{owner}color is {value}"


def _article(word: str) -> str:
    return "an" if word[:1].lower() in "aeiou" else "a"


def _simple_glosses(path_props: Sequence[str]) -> tuple[str, str]:
    first, second = (_describe(p) for p in path_props)
    informal = f"Eventually {first}, and then eventually {second}."
    precise = (
        f"At some time step, {first}, and then at some strictly later time step, {second}."
    )
    return informal, precise


def _tree_glosses(tree_paths: Sequence[Sequence[str]]) -> tuple[str, str]:
    # Regroup the flat path list back into the nested either/or wording.
    def precise_node(paths: Sequence[Sequence[str]]) -> str:
        heads = []
        for path in paths:
            if path[0] not in heads:
                heads.append(path[0])
        if len(paths) == 1 and len(paths[0]) == 1:
            return f"{_describe(paths[0][0])}"
        if len(heads) == 1:
            head = heads[0]
            rest = [p[1:] for p in paths if len(p) > 1]
            if not rest:
                return _describe(head)
            return (
                f"{_describe(head)}, and then at some strictly later time step, "
                f"{precise_node(rest)}"
            )
        branches = []
        for head in heads:
            group = [p for p in paths if p[0] == head]
            branches.append(f"({precise_node(group)})")
        return "either: " + " or ".join(branches)

    precise = f"At some time step, {precise_node(list(tree_paths))}."
    first = tree_paths[0][0]
    level1 = []
    for path in tree_paths:
        if path[1] not in level1:
            level1.append(path[1])
    leaf = tree_paths[0][-1]
    informal = (
        f"At some point {_describe(first)}, followed by either {_describe(level1[0])} or "
        f"{_describe(level1[1])}, branching further until finally {_describe(leaf)}."
    )
    return informal, precise


def _place_positions(
    rng: random.Random,
    occupied: set[int],
    count: int,
    gap: int,
    length: int,
) -> list[int]:
    span = (count - 1) * gap
    latest_start = length - span
    if latest_start < 1:
        raise GenerationError(
            f"trace length {length} cannot accommodate {count} events {gap} steps apart"
        )
    for _ in range(10000):
        start = rng.randint(1, latest_start)
        positions = [start + i * gap for i in range(count)]
        if not occupied.intersection(positions):
            occupied.update(positions)
            return positions
    for start in range(1, latest_start + 1):
        positions = [start + i * gap for i in range(count)]
        if not occupied.intersection(positions):
            occupied.update(positions)
            return positions
    raise GenerationError("could not place designated events without collisions")


def _build_case(
    *,
    family: str,
    n_constraints: int,
    entities: int,
    gap: int,
    seed_material: tuple,
    knobs: Mapping[str, object],
    truths: Sequence[bool] | None = None,
    length: int | None = None,
    tagged: bool | None = None,
) -> BenchCase:
    if family not in ("simple", "complex"):
        raise GenerationError(f"unknown formula family {family!r}")
    rng = random.Random(f"synthbench:{derive_seed(*seed_material)}")
    tagged = entities > 1 if tagged is None else tagged
    path_len = SIMPLE_PATH_LEN if family == "simple" else COMPLEX_PATH_LEN
    pools = _make_pools(entities, family)

    total_capacity = sum(max(0, pools.capacity(k)) for k in pools.available)
    if n_constraints * path_len > total_capacity:
        raise GenerationError(
            f"{n_constraints} {family} constraints need {n_constraints * path_len} "
            f"target values; vocabulary provides {total_capacity}"
        )

    if truths is None:
        truth = tuple(rng.random() < 0.5 for _ in range(n_constraints))
    else:
        truth = tuple(truths)

    keys = sorted(pools.available)
    constraint_slots: list[list[tuple[tuple[int, str], object]]] = []
    for _ in range(n_constraints):
        slots = [pools.draw_path_value(rng, keys) for _ in range(path_len)]
        constraint_slots.append(slots)

    constraints: list[BenchConstraint] = []
    for index, slots in enumerate(constraint_slots):
        path_props = tuple(
            prop_name(key[0] if tagged else None, key[1], value) for key, value in slots
        )
        if family == "simple":
            formula = _simple_formula(path_props)
            informal, precise = _simple_glosses(path_props)
            tree_paths: tuple[tuple[str, ...], ...] = ()
        else:
            needed = 2 ** (TREE_DEPTH + 1) - 2 - TREE_DEPTH  # off-path node count
            alt_values = rng.sample(pools.alt_values, needed)
            entity_for = (
                (lambda: rng.randint(1, entities)) if tagged else (lambda: None)
            )
            alternatives = iter(
                [prop_name(entity_for(), "number", v) for v in alt_values]
            )
            formula, tree_paths = build_tree_formula(path_props, alternatives, rng)
            informal, precise = _tree_glosses(tree_paths)
        constraints.append(
            BenchConstraint(
                constraint_id=f"c{index + 1}",
                formula=formula,
                informal=informal,
                precise=precise,
                path=path_props,
                tree_paths=tree_paths,
            )
        )

    # Designate event positions; satisfied cases place the full path,
    # unsatisfied ones omit the final fulfillment event.
    if length is None:
        start = rng.randint(1, 6)
        tail = rng.randint(0, 5)
        length = start + (path_len - 1) * gap + tail
        occupied: set[int] = set()
        positions_by_constraint = [
            [start + i * gap for i in range(path_len)]
        ]
        occupied.update(positions_by_constraint[0])
        if n_constraints != 1:
            raise GenerationError("auto trace length supported for single constraints only")
    else:
        occupied = set()
        positions_by_constraint = [
            _place_positions(rng, occupied, path_len, gap, length)
            for _ in range(n_constraints)
        ]

    designated: dict[int, tuple[tuple[int, str], object]] = {}
    for slots, positions, satisfied in zip(constraint_slots, positions_by_constraint, truth):
        placed = slots if satisfied else slots[:-1]
        for slot, position in zip(placed, positions):
            designated[position] = slot

    steps = []
    for t in range(1, length + 1):
        events = []
        for entity in range(1, entities + 1):
            fixed: dict[str, object] = {}
            slot = designated.get(t)
            if slot is not None and slot[0][0] == entity:
                fixed[slot[0][1]] = slot[1]
            attributes = {
                category: fixed.get(category, pools.distractor(rng, (entity, category)))
                for category in CATEGORIES
            }
            events.append(AttributeEvent(entity=entity, **attributes))
        labels = frozenset().union(*(event.props(tagged) for event in events))
        steps.append(
            StepRecord(t=t, input="", output=render_step(events, t, tagged), labels=labels)
        )

    trace = Trace(tuple(steps), metadata=dict(knobs))
    return BenchCase(trace=trace, constraints=tuple(constraints), truth=truth, knobs=knobs)


def gen_elasticity(gap: int, family: str, seed: int, count: int) -> list[BenchCase]:
    """Balanced batch of single-constraint cases with the fulfillment event
    exactly ``gap`` steps after the trigger; trace length grows with the gap."""
    if not 1 <= gap <= 1000:
        raise GenerationError(f"gap must be in [1, 1000], got {gap}")
    cases = []
    for i in range(count):
        satisfied = i % 2 == 0
        knobs = {
            "suite": "elasticity",
            "family": family,
            "gap": gap,
            "seed": seed,
            "case": i,
        }
        cases.append(
            _build_case(
                family=family,
                n_constraints=1,
                entities=1,
                gap=gap,
                seed_material=("elasticity", family, gap, seed, i),
                knobs=knobs,
                truths=(satisfied,),
            )
        )
    return cases


def gen_constraint_scaling(
    n: int,
    family: str,
    seed: int,
    gap: int | None = None,
    length: int | None = None,
) -> BenchCase:
    """One case with ``n`` constraints over disjoint target propositions,
    each independently satisfied with probability one half."""
    if not 1 <= n <= 20:
        raise GenerationError(f"constraint count must be in [1, 20], got {n}")
    if family == "simple":
        gap = 10 if gap is None else gap
        length = 500 if length is None else length
    else:
        if gap is None:
            eligible = [k for k in sorted(COMPLEX_GAP_SCHEDULE) if k <= n]
            gap = COMPLEX_GAP_SCHEDULE[eligible[-1]]
        length = 1000 if length is None else length
    knobs = {
        "suite": "constraint",
        "family": family,
        "n": n,
        "gap": gap,
        "length": length,
        "seed": seed,
    }
    return _build_case(
        family=family,
        n_constraints=n,
        entities=1,
        gap=gap,
        seed_material=("constraint", family, n, seed),
        knobs=knobs,
        length=length,
    )


def gen_proposition_scaling(
    entities: int,
    family: str,
    seed: int,
    length: int = 100,
    gap: int = 10,
) -> BenchCase:
    """One entity-tagged case; the constraint targets specific entities'
    attributes while the other entities act as distractors."""
    if entities < 1:
        raise GenerationError(f"entities must be >= 1, got {entities}")
    knobs = {
        "suite": "proposition",
        "family": family,
        "entities": entities,
        "gap": gap,
        "length": length,
        "seed": seed,
    }
    return _build_case(
        family=family,
        n_constraints=1,
        entities=entities,
        gap=gap,
        seed_material=("proposition", family, entities, seed),
        knobs=knobs,
        length=length,
        tagged=True,
    )


def extract_embedded_path(
    paths: Sequence[Sequence[str]], label_sets: Sequence[frozenset[str]]
) -> tuple[str, ...] | None:
    """First tree path embeddable in strictly increasing label positions."""
    for path in paths:
        position = -1
        for prop in path:
            position = next(
                (i for i in range(position + 1, len(label_sets)) if prop in label_sets[i]),
                -2,
            )
            if position == -2:
                break
        if position != -2:
            return tuple(path)
    return None
