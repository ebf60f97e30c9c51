"""Quasi-partitions of the positive naturals and the two symbolic models
built from them.

A quasi-partition is a triple (a, b, c) of eventually periodic sets that
covers the naturals, is pairwise disjoint, has a and c infinite, and has b
empty or infinite.  Model 1 has base point V = (3N, 3N+1, 3N+2) and states
all quasi-partitions above it whose b-component meets 3N+1 infinitely;
model 2 has base point W = (2N, {}, 2N+1) and states with nonempty b, plus W
itself.  P holds of n at a state when n is in a or b; Q when n is in a.

The tuple relation between the two models relates (p, ds) to (q, es) when
the paired map is a bijection, a-elements map into the target's a, and
b-elements map into the target's a or b.  The witness constructors build the
successor, left-extension, and right-extension elements required of an
asimulation; every "choose" in those constructions takes the least eligible
element so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .epset import EMPTY, NATURALS, EPSet, finite, format_epset, parse_epset, progression, split_alternating
from .kripke import GModel


@dataclass(frozen=True)
class QuasiPartition:
    a: EPSet
    b: EPSet
    c: EPSet

    def __str__(self) -> str:
        return f"({format_epset(self.a)}; {format_epset(self.b)}; {format_epset(self.c)})"


V = QuasiPartition(progression(3, 0), progression(3, 1), progression(3, 2))
W = QuasiPartition(progression(2, 0), EMPTY, progression(2, 1))


def is_quasipartition(a: EPSet, b: EPSet, c: EPSet) -> bool:
    if a.union(b).union(c) != NATURALS:
        return False
    if not (a.intersect(b).is_empty() and a.intersect(c).is_empty() and b.intersect(c).is_empty()):
        return False
    if not (a.is_infinite() and c.is_infinite()):
        return False
    return b.is_empty() or b.is_infinite()


def sqsubseteq(p: QuasiPartition, q: QuasiPartition) -> bool:
    """The order on quasi-partitions: first components grow, third shrink."""
    return p.a.is_subset(q.a) and q.c.is_subset(p.c)


def in_state_space(p: QuasiPartition, model: int) -> bool:
    if model == 1:
        return sqsubseteq(V, p) and p.b.intersect(V.b).is_infinite()
    if model == 2:
        return p == W or (sqsubseteq(W, p) and not p.b.is_empty())
    raise ValueError("model must be 1 or 2")


def atom_forces(p: QuasiPartition, pred: str, n: int) -> bool:
    if pred == "P":
        return p.a.member(n) or p.b.member(n)
    if pred == "Q":
        return p.a.member(n)
    raise ValueError("pred must be 'P' or 'Q'")


@dataclass(frozen=True)
class ZQuery:
    frm: QuasiPartition
    frm_tuple: tuple[int, ...]
    to: QuasiPartition
    to_tuple: tuple[int, ...]
    direction: int  # model index of the `frm` side: 1 or 2

    def __post_init__(self):
        if len(self.frm_tuple) != len(self.to_tuple):
            raise ValueError("tuple lengths differ")
        if self.direction not in (1, 2):
            raise ValueError("direction must be 1 or 2")

    def reversed(self) -> ZQuery:
        return ZQuery(self.to, self.to_tuple, self.frm, self.frm_tuple, 3 - self.direction)


def pair_map_is_bijection(ds: tuple[int, ...], es: tuple[int, ...]) -> bool:
    forward: dict[int, int] = {}
    backward: dict[int, int] = {}
    for d, e in zip(ds, es):
        if forward.setdefault(d, e) != e or backward.setdefault(e, d) != d:
            return False
    return True


def z_related(q: ZQuery) -> bool:
    """The tuple relation: bijective pairing, a maps into a, b into a or b."""
    if not pair_map_is_bijection(q.frm_tuple, q.to_tuple):
        return False
    for d, e in zip(q.frm_tuple, q.to_tuple):
        if q.frm.a.member(d) and not q.to.a.member(e):
            return False
        if q.frm.b.member(d) and not (q.to.a.member(e) or q.to.b.member(e)):
            return False
    return True


def _inverse_image(ds: tuple[int, ...], es: tuple[int, ...], s: EPSet) -> EPSet:
    return finite(d for d, e in zip(ds, es) if s.member(e))


@dataclass(frozen=True)
class WitnessResult:
    witness: QuasiPartition
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def witness_successor(
    t: QuasiPartition,
    ds: tuple[int, ...],
    u: QuasiPartition,
    es: tuple[int, ...],
    v: QuasiPartition,
    direction: int = 1,
) -> WitnessResult:
    """The successor of t matching a step from u up to v.

    Components: keep t's components minus the tuple elements, then re-route
    each tuple element to the component its partner occupies in v.  When t's
    middle component is empty it is seeded with half of an alternating split
    of the third component so all three parts stay infinite.
    """
    if not z_related(ZQuery(t, ds, u, es, direction)):
        raise ValueError("tuples are not related between t and u")
    if not sqsubseteq(u, v):
        raise ValueError("v is not a successor of u")
    g, h, i_ = v.a, v.b, v.c
    if t.b.is_empty():
        c1, c2 = split_alternating(t.c.remove(ds))
        j = t.a.remove(ds).union(_inverse_image(ds, es, g))
        k = c1.union(_inverse_image(ds, es, h))
        l = c2.union(_inverse_image(ds, es, i_))
    else:
        j = t.a.remove(ds).union(_inverse_image(ds, es, g))
        k = t.b.remove(ds).union(_inverse_image(ds, es, h))
        l = t.c.remove(ds).union(_inverse_image(ds, es, i_))
    w = QuasiPartition(j, k, l)
    checks = {
        "t_below_witness": sqsubseteq(t, w),
        "witness_in_state_space": in_state_space(w, direction),
        "z_forward": z_related(ZQuery(w, ds, v, es, direction)),
        "z_backward": z_related(ZQuery(v, es, w, ds, 3 - direction)),
    }
    return WitnessResult(w, checks)


def witness_left_extension(
    t: QuasiPartition,
    ds: tuple[int, ...],
    u: QuasiPartition,
    es: tuple[int, ...],
    f: int,
    direction: int = 1,
) -> int:
    """The partner for a new element f on the t side: the paired element when
    f already occurs in the tuple, otherwise the least fresh element of u's
    first component."""
    if not z_related(ZQuery(t, ds, u, es, direction)):
        raise ValueError("tuples are not related between t and u")
    for d, e in zip(ds, es):
        if d == f:
            return e
    fresh = u.a.remove(es).least()
    if fresh is None:
        raise ValueError("first component of u is exhausted")
    return fresh


def witness_right_extension(
    t: QuasiPartition,
    ds: tuple[int, ...],
    u: QuasiPartition,
    es: tuple[int, ...],
    g: int,
    direction: int = 1,
) -> int:
    """The partner for a new element g on the u side: the paired element when
    g already occurs, otherwise the least fresh element of t's third
    component (where the pairing conditions are vacuous)."""
    if not z_related(ZQuery(t, ds, u, es, direction)):
        raise ValueError("tuples are not related between t and u")
    for d, e in zip(ds, es):
        if e == g:
            return d
    fresh = t.c.remove(ds).least()
    if fresh is None:
        raise ValueError("third component of t is exhausted")
    return fresh


# ---------------------------------------------------------------------------
# Quasi-partition literals


def parse_quasipartition(text: str) -> QuasiPartition:
    """Literal syntax: (expr; expr; expr) with EPSet expressions."""
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ValueError("quasi-partition literal must be parenthesized")
    parts = body[1:-1].split(";")
    if len(parts) != 3:
        raise ValueError("quasi-partition literal needs three components")
    return QuasiPartition(*(parse_epset(p) for p in parts))


def format_quasipartition(p: QuasiPartition) -> str:
    return str(p)


# ---------------------------------------------------------------------------
# Finite truncations


class TruncationError(ValueError):
    pass


INDEXING_NOTE = "kN+l denotes {k*n+l | n >= 0} restricted to positive naturals"


def _single_moves(p: QuasiPartition, max_n: int) -> list[QuasiPartition]:
    out = []
    for n in range(1, max_n + 1):
        if p.b.member(n):
            out.append(QuasiPartition(p.a.union(finite([n])), p.b.remove([n]), p.c))
        if p.c.member(n):
            out.append(QuasiPartition(p.a.union(finite([n])), p.b, p.c.remove([n])))
            out.append(QuasiPartition(p.a, p.b.union(finite([n])), p.c.remove([n])))
    return out


def generator_moves(p: QuasiPartition, model: int, max_n: int) -> list[QuasiPartition]:
    """One-step successors of p in the given model's state space.

    A step moves one element of 1..max_n out of the middle or third
    component.  A state with an empty middle component first receives half
    of an alternating split of its third component (the repair needed to
    stay inside the state space, which otherwise forbids empty middles);
    the seeded state and its one-element variants all count as one step.

    Moves that would empty a component's restriction to 1..max_n are not
    offered: the restriction is the truncated state, and the infinite sets
    it stands for are never empty there.  For the first model the middle
    component must keep meeting 3N+1 below the cutoff, mirroring the
    infinite side condition.
    """
    if p.b.is_empty():
        c1, c2 = split_alternating(p.c)
        seeded = QuasiPartition(p.a, c1, c2)
        candidates = [seeded] + _single_moves(seeded, max_n)
    else:
        candidates = _single_moves(p, max_n)
    witness = V.b if model == 1 else NATURALS
    out = []
    for q in candidates:
        if not (is_quasipartition(q.a, q.b, q.c) and in_state_space(q, model) and sqsubseteq(p, q)):
            continue
        if all(not q.b.intersect(witness).member(n) for n in range(1, max_n + 1)):
            continue
        if all(not q.c.member(n) for n in range(1, max_n + 1)):
            continue
        out.append(q)
    return out


def _restrict(p: QuasiPartition, max_n: int) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
    rng = range(1, max_n + 1)
    return (
        frozenset(n for n in rng if p.a.member(n)),
        frozenset(n for n in rng if p.b.member(n)),
        frozenset(n for n in rng if p.c.member(n)),
    )


def truncation_states(model: int, max_n: int, depth: int) -> list[QuasiPartition]:
    """Quasi-partitions reachable from the base in <= depth generator moves,
    deduplicated by their restriction to 1..max_n, in a deterministic order."""
    base = V if model == 1 else W
    seen = {_restrict(base, max_n): base}
    frontier = [base]
    for _ in range(depth):
        new_frontier = []
        for p in frontier:
            for q in generator_moves(p, model, max_n):
                key = _restrict(q, max_n)
                if key not in seen:
                    seen[key] = q
                    new_frontier.append(q)
        frontier = new_frontier
    return [seen[k] for k in sorted(seen, key=lambda key: tuple(sorted(s) for s in key))]


def finite_truncation(model: int, max_n: int, depth: int) -> GModel:
    """A finite model over domain 1..max_n whose states are restrictions of
    reachable quasi-partitions, ordered by component inclusion, with atoms
    inherited from the symbolic model.

    The truncation of model 1 must satisfy condition I and that of model 2
    must fail condition J; bounds too small to achieve this are reported.
    """
    from .conditions import check_I, check_J

    if max_n < 6:
        raise TruncationError("need max_n >= 6")
    if depth < 0:
        raise TruncationError("need depth >= 0")
    qps = truncation_states(model, max_n, depth)
    restrictions = [_restrict(p, max_n) for p in qps]
    names = [f"t{i}" for i in range(len(qps))]
    base_key = _restrict(V if model == 1 else W, max_n)
    base = names[restrictions.index(base_key)]
    order = set()
    for i, (a1, b1, c1) in enumerate(restrictions):
        for j, (a2, b2, c2) in enumerate(restrictions):
            if a1 <= a2 and c2 <= c1:
                order.add((names[i], names[j]))
    interp = {
        "P": frozenset(
            (names[i], n) for i, (a, b, c) in enumerate(restrictions) for n in sorted(a | b)
        ),
        "Q": frozenset((names[i], n) for i, (a, b, c) in enumerate(restrictions) for n in sorted(a)),
    }
    m = GModel(tuple(names), frozenset(order), base, range(1, max_n + 1), interp, {"P": 1, "Q": 1})
    if model == 1:
        rep = check_I(m)
        if not rep.holds:
            raise TruncationError(
                f"bounds ({max_n}, {depth}) too small: condition I fails at {rep.failing_state}"
            )
    else:
        rep = check_J(m)
        if rep.holds:
            raise TruncationError(f"bounds ({max_n}, {depth}) too small: condition J holds")
    return m
