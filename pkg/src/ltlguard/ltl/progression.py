"""Formula progression, syntactic simplification, and verdict extraction.

``progress`` rewrites a formula against one truth assignment into the
requirement on the rest of the trace.  It is total and returns the raw
rewrite; callers compose with ``simplify`` to reach the ``true``/``false``
literals that terminal verdicts are read from.
"""

from __future__ import annotations

from .ast import (
    FALSE,
    TRUE,
    And,
    Always,
    Eventually,
    FalseBool,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Prop,
    TrueBool,
    TruthAssignment,
    Until,
    Verdict,
)


def progress(phi: Formula, sigma: TruthAssignment) -> Formula:
    """One progression step of ``phi`` under the truth assignment ``sigma``."""
    match phi:
        case TrueBool():
            return TRUE
        case FalseBool():
            return FALSE
        case Prop(name):
            return TRUE if name in sigma else FALSE
        case Not(child):
            return Not(progress(child, sigma))
        case And(left, right):
            return And(progress(left, sigma), progress(right, sigma))
        case Or(left, right):
            return Or(progress(left, sigma), progress(right, sigma))
        case Implies(left, right):
            # Progressed through its boolean definition; the Implies node
            # itself survives only inside the untouched temporal operands.
            return Or(Not(progress(left, sigma)), progress(right, sigma))
        case Next(child):
            return child
        case Until(left, right):
            return Or(progress(right, sigma), And(progress(left, sigma), phi))
        case Eventually(child):
            return Or(progress(child, sigma), phi)
        case Always(child):
            return And(progress(child, sigma), phi)
    raise TypeError(f"not a formula: {phi!r}")


def _flatten(kind: type, phi: Formula, out: list[Formula]) -> None:
    if isinstance(phi, kind):
        _flatten(kind, phi.left, out)  # type: ignore[attr-defined]
        _flatten(kind, phi.right, out)  # type: ignore[attr-defined]
    else:
        out.append(phi)


def _rebuild(kind: type, children: list[Formula]) -> Formula:
    node = children[-1]
    for child in reversed(children[:-1]):
        node = kind(child, node)
    return node


def _simplify_connective(
    kind: type, unit: Formula, zero: Formula, left: Formula, right: Formula
) -> Formula:
    # Flatten same-kind chains, drop units and duplicates, short-circuit on
    # the absorbing element.  Children arrive already simplified.
    flat: list[Formula] = []
    _flatten(kind, left, flat)
    _flatten(kind, right, flat)
    children: list[Formula] = []
    for child in flat:
        if child == zero:
            return zero
        if child == unit or child in children:
            continue
        children.append(child)
    if not children:
        return unit
    return _rebuild(kind, children)


def simplify(phi: Formula) -> Formula:
    """Apply the syntactic reduction rules to a fixed point.

    Purely structural: boolean identities, double negation, and
    duplicate absorption under ``&``/``|``.  No semantic reasoning.
    """
    match phi:
        case TrueBool() | FalseBool() | Prop():
            return phi
        case Not(child):
            child = simplify(child)
            if child == TRUE:
                return FALSE
            if child == FALSE:
                return TRUE
            if isinstance(child, Not):
                return child.child
            return Not(child)
        case And(left, right):
            return _simplify_connective(And, TRUE, FALSE, simplify(left), simplify(right))
        case Or(left, right):
            return _simplify_connective(Or, FALSE, TRUE, simplify(left), simplify(right))
        case Implies(left, right):
            left, right = simplify(left), simplify(right)
            if left == TRUE:
                return right
            if left == FALSE:
                return TRUE
            return Implies(left, right)
        case Next(child):
            return Next(simplify(child))
        case Until(left, right):
            return Until(simplify(left), simplify(right))
        case Eventually(child):
            return Eventually(simplify(child))
        case Always(child):
            return Always(simplify(child))
    raise TypeError(f"not a formula: {phi!r}")


def verdict_of(phi: Formula) -> Verdict:
    """Three-valued verdict of an already-simplified residual formula."""
    if isinstance(phi, FalseBool):
        return Verdict.VIOLATED
    if isinstance(phi, TrueBool):
        return Verdict.SATISFIED
    return Verdict.INCONCLUSIVE
