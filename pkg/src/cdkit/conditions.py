"""The two semantic conditions tying the example sentences to their
second-order readings, and the constructive model expansions that realize
them.

check_I: at every state w there is an element forced into P at the base but
not into Q at w.  check_J: at every state w there is an element in P but not
in Q at w itself.  realize_R turns an I-model into one whose base forces
GAMMA; realize_S turns a J-violation into a model whose base fails DELTA.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kripke import GModel, ModelError, MonotoneRelation, expand, monotone_relations, valid_at_base
from .syntax import DELTA, GAMMA


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class ConditionReport:
    holds: bool
    witnesses: dict[str, int] = field(default_factory=dict)  # state -> element
    failing_state: str | None = None

    def __bool__(self) -> bool:
        return self.holds


def _require_unary_pq(m: GModel) -> None:
    for pred in ("P", "Q"):
        if m.arities.get(pred) != 1:
            raise SignatureError(f"model must interpret unary {pred}")


def check_I(m: GModel) -> ConditionReport:
    """For every state w, some element a with base |- P(a) and w |/- Q(a)."""
    _require_unary_pq(m)
    p, q = m.interp["P"], m.interp["Q"]
    witnesses: dict[str, int] = {}
    for w in m.states:
        for a in m.domain:
            if (m.base, a) in p and (w, a) not in q:
                witnesses[w] = a
                break
        else:
            return ConditionReport(False, failing_state=w)
    return ConditionReport(True, witnesses)


def check_J(m: GModel) -> ConditionReport:
    """For every state w, some element a with w |- P(a) and w |/- Q(a)."""
    _require_unary_pq(m)
    p, q = m.interp["P"], m.interp["Q"]
    witnesses: dict[str, int] = {}
    for w in m.states:
        for a in m.domain:
            if (w, a) in p and (w, a) not in q:
                witnesses[w] = a
                break
        else:
            return ConditionReport(False, failing_state=w)
    return ConditionReport(True, witnesses)


def _surjection_onto(domain: tuple[int, ...], targets: list[int]) -> dict[int, int]:
    # Deterministic surjection: element of rank r maps to targets[r mod n].
    n = len(targets)
    return {d: targets[r % n] for r, d in enumerate(sorted(domain))}


def realize_R(m: GModel) -> GModel:
    """Expand an I-model with a unary R so that the base forces GAMMA.

    R(a) holds at w iff Q(f(a)) does, where f is a deterministic surjection
    from the domain onto the elements witnessing the condition.
    """
    _require_unary_pq(m)
    if "R" in m.arities:
        raise ModelError("symbol clash: R")
    report = check_I(m)
    if not report.holds:
        raise ModelError(f"condition I fails at state {report.failing_state}")
    p, q = m.interp["P"], m.interp["Q"]
    targets = sorted(
        a
        for a in m.domain
        if (m.base, a) in p and any((w, a) not in q for w in m.states)
    )
    f = _surjection_onto(m.domain, targets)
    tuples = frozenset((w, a) for a in m.domain for w in m.states if (w, f[a]) in q)
    return expand(m, "R", MonotoneRelation(1, tuples))


def readings_differ(m: GModel, w: str) -> bool:
    """True when some state other than w is order-equivalent to w, i.e. the
    strict-above and mere-inequality readings of 'above w' disagree."""
    return any(u != w and m.leq(w, u) and m.leq(u, w) for u in m.states)


def realize_S(m: GModel, w: str) -> GModel:
    """Expand a model with a nullary S holding strictly above w.

    Requires the J-violation at w: every element in P at w is also in Q
    there.  In the result w forces the antecedent of DELTA but not S, so the
    base does not force DELTA.  Strictly above means w <= u and not u <= w;
    on quasi-orders this is the weakest reading that keeps S monotone.
    """
    _require_unary_pq(m)
    if "S" in m.arities:
        raise ModelError("symbol clash: S")
    if w not in m.succ:
        raise ModelError(f"unknown state: {w}")
    p, q = m.interp["P"], m.interp["Q"]
    for a in m.domain:
        if (w, a) in p and (w, a) not in q:
            raise ModelError(f"state {w} is not a J-violation: element {a} is in P but not Q")
    tuples = frozenset((u,) for u in m.states if m.leq(w, u) and not m.leq(u, w))
    return expand(m, "S", MonotoneRelation(0, tuples))


def brute_second_order(m: GModel) -> tuple[bool, bool]:
    """(some monotone unary R makes the base force GAMMA,
        every monotone nullary S makes the base force DELTA)."""
    _require_unary_pq(m)
    if "R" in m.arities or "S" in m.arities:
        raise ModelError("model already interprets R or S")
    exists_r = any(
        valid_at_base(expand(m, "R", r), GAMMA) for r in monotone_relations(m, 1)
    )
    forall_s = all(
        valid_at_base(expand(m, "S", s), DELTA) for s in monotone_relations(m, 0)
    )
    return exists_r, forall_s
