"""Directed tuple-indexed simulations between two models, under which
forcing of every formula transfers from left to right.

A relation is stored as a finite set of directed entries
(model index, state, tuple) -> (state, tuple).  A finite entry set stands
for its closure under position maps: re-ordering, duplicating, or dropping
tuple positions never changes which constraints an entry carries, so an
entry is interchangeable with its set of element pairs, and a tuple pair
belongs to the represented relation exactly when its pair set is contained
in the pair set of some stored entry between the same states.  Under that
reading the side conditions below are checkable on the finite support and
imply preservation for formulas of every quantifier rank.

Conditions checked, for every stored entry (t, ds) -> (u, es):
  2. atoms over the tuple transfer from t to u;
  3. every successor v of u has a partner w above t related to it both ways;
  4. every domain element f on the t side extends the entry by some g;
  5. every domain element g on the u side extends the entry by some f.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .kripke import GModel, ModelError, TableSpace, sat_table
from .syntax import Atom, Exists, Falsum, Forall, Formula, Implies, And, Or, Var, free_vars, quantifier_rank


class Entry(NamedTuple):
    dir: int  # model index of the from side: 1 or 2
    from_state: str
    from_tuple: tuple[int, ...]
    to_state: str
    to_tuple: tuple[int, ...]


@dataclass(frozen=True)
class AsimRelation:
    pairs: frozenset[Entry]

    def __post_init__(self):
        for e in self.pairs:
            if e.dir not in (1, 2):
                raise ValueError(f"bad direction in {e}")
            if len(e.from_tuple) != len(e.to_tuple):
                raise ValueError(f"tuple lengths differ in {e}")


@dataclass(frozen=True)
class AsimViolation:
    condition: int
    entry: Entry
    detail: str

    def __str__(self) -> str:
        return f"condition {self.condition} at {self.entry}: {self.detail}"


def _models(m1: GModel, m2: GModel, dir: int) -> tuple[GModel, GModel]:
    return (m1, m2) if dir == 1 else (m2, m1)


def _pairset(e: Entry) -> frozenset[tuple[int, int]]:
    return frozenset(zip(e.from_tuple, e.to_tuple))


class _Index:
    """Stored pair sets grouped by (dir, from_state, to_state)."""

    def __init__(self, pairs: Iterable[Entry]):
        self.by_states: dict[tuple[int, str, str], list[frozenset]] = {}
        for e in pairs:
            self.by_states.setdefault((e.dir, e.from_state, e.to_state), []).append(_pairset(e))

    def related(self, dir: int, t: str, ds: Sequence[int], u: str, es: Sequence[int]) -> bool:
        need = set(zip(ds, es))
        return any(need <= ps for ps in self.by_states.get((dir, t, u), ()))


def check(z: AsimRelation, m1: GModel, m2: GModel) -> list[AsimViolation]:
    """All breaches of the four side conditions; empty means z is an
    asimulation (its closure preserves forcing of all formulas)."""
    shared = sorted(set(m1.arities) & set(m2.arities))
    for p in shared:
        if m1.arities[p] != m2.arities[p]:
            raise ModelError(f"predicate {p} has different arities in the two models")
    idx = _Index(z.pairs)
    violations: list[AsimViolation] = []
    for e in sorted(z.pairs):
        mi, mj = _models(m1, m2, e.dir)
        if e.from_state not in mi.succ or e.to_state not in mj.succ:
            violations.append(AsimViolation(1, e, "state missing from its model"))
            continue
        if any(d not in mi.domain for d in e.from_tuple) or any(
            d not in mj.domain for d in e.to_tuple
        ):
            violations.append(AsimViolation(1, e, "tuple element missing from its domain"))
            continue
        k = len(e.from_tuple)
        for pred in shared:
            arity = m1.arities[pred]
            for arg_positions in itertools.product(range(k), repeat=arity):
                dd = tuple(e.from_tuple[i] for i in arg_positions)
                ee = tuple(e.to_tuple[i] for i in arg_positions)
                if (e.from_state, *dd) in mi.interp[pred] and (
                    e.to_state,
                    *ee,
                ) not in mj.interp[pred]:
                    violations.append(
                        AsimViolation(2, e, f"{pred}{dd} forced on the left, {pred}{ee} not on the right")
                    )
        for v in mj.succ[e.to_state]:
            if not any(
                idx.related(e.dir, w, e.from_tuple, v, e.to_tuple)
                and idx.related(3 - e.dir, v, e.to_tuple, w, e.from_tuple)
                for w in mi.succ[e.from_state]
            ):
                violations.append(AsimViolation(3, e, f"no two-way partner above for successor {v}"))
        for f in mi.domain:
            if f in e.from_tuple:
                continue
            if not any(
                idx.related(e.dir, e.from_state, e.from_tuple + (f,), e.to_state, e.to_tuple + (g,))
                for g in mj.domain
            ):
                violations.append(AsimViolation(4, e, f"no extension for left element {f}"))
        for g in mj.domain:
            if g in e.to_tuple:
                continue
            if not any(
                idx.related(e.dir, e.from_state, e.from_tuple + (f,), e.to_state, e.to_tuple + (g,))
                for f in mi.domain
            ):
                violations.append(AsimViolation(5, e, f"no extension for right element {g}"))
    return violations


# ---------------------------------------------------------------------------
# Preservation


@dataclass(frozen=True)
class PreservationViolation:
    entry: Entry
    formula: Formula

    def __str__(self) -> str:
        return f"{self.formula} forced at {self.entry.from_state} but not at {self.entry.to_state}"


def _tuple_vars(n: int) -> tuple[str, ...]:
    return tuple(f"x{i+1}" for i in range(n))


def _rename_bound(f: Formula, depth: int = 0) -> Formula:
    # Bound variables take reserved names b1, b2, ... so they cannot collide
    # with the free tuple variables x1, x2, ...
    if isinstance(f, (Atom, Falsum)):
        return f
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_rename_bound(f.left, depth), _rename_bound(f.right, depth))
    if isinstance(f, (Forall, Exists)):
        name = f"b{depth + 1}"
        body = f.body if f.var == name else _subst_var(f.body, f.var, name)
        return type(f)(name, _rename_bound(body, depth + 1))
    raise TypeError(f"not a formula: {f!r}")


def _subst_var(f: Formula, old: str, new: str) -> Formula:
    if isinstance(f, Atom):
        return Atom(
            f.pred,
            tuple(Var(new) if isinstance(a, Var) and a.name == old else a for a in f.args),
        )
    if isinstance(f, Falsum):
        return f
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_subst_var(f.left, old, new), _subst_var(f.right, old, new))
    if isinstance(f, (Forall, Exists)):
        if f.var == old:
            return f
        return type(f)(f.var, _subst_var(f.body, old, new))
    raise TypeError(f"not a formula: {f!r}")


class _Evaluator:
    """Per-model satisfaction tables over tuple variables x1..xn plus
    reserved bound variables b1..b_rank."""

    def __init__(self, m: GModel, free_count: int, rank: int):
        self.m = m
        self.free_count = free_count
        self.scope = _tuple_vars(free_count) + tuple(f"b{i+1}" for i in range(rank))
        self.space = TableSpace(m, self.scope)
        self.dom_index = {d: i for i, d in enumerate(m.domain)}

    def table(self, f: Formula) -> int:
        return sat_table(self.space, _rename_bound(f))

    def position(self, state: str, elems: Sequence[int]) -> int:
        env_idx = 0
        nd = len(self.m.domain)
        for i in range(len(self.scope)):
            digit = self.dom_index[elems[i]] if i < len(elems) else 0
            env_idx = env_idx * nd + digit
        return self.space.state_index[state] * self.space.E + env_idx

    def holds(self, f: Formula, state: str, elems: Sequence[int]) -> bool:
        return bool((self.table(f) >> self.position(state, elems)) & 1)


def _formula_columns(ev: _Evaluator, formulas: Sequence[Formula]) -> list[int]:
    """Transpose: per (state, env) position, the set of formula indices
    forced there, as a formula-indexed bitmask."""
    nbytes = (len(formulas) + 7) // 8
    cols = [bytearray(nbytes) for _ in range(ev.space.total)]
    for fi, f in enumerate(formulas):
        t = ev.table(f)
        byte, bit = fi >> 3, 1 << (fi & 7)
        while t:
            low = t & -t
            p = low.bit_length() - 1
            cols[p][byte] |= bit
            t ^= low
    return [int.from_bytes(c, "little") for c in cols]


def preserves(
    z: AsimRelation, m1: GModel, m2: GModel, formulas: Sequence[Formula]
) -> list[PreservationViolation]:
    """Breaches of forcing transfer along entries, over the given formulas.

    Free variables must be named x1, x2, ... and refer to tuple positions;
    a formula is checked against every entry whose tuples cover its free
    variables.  Assumes check(z, m1, m2) came back empty.
    """
    if not z.pairs or not formulas:
        return []
    max_len = max(len(e.from_tuple) for e in z.pairs)
    max_rank = 0
    widths: list[int] = []
    for f in formulas:
        fv = free_vars(f)
        bad = fv - set(_tuple_vars(max_len))
        if bad:
            raise ValueError(
                f"free variables {sorted(bad)} are not tuple positions x1..x{max_len}"
            )
        widths.append(max((int(v[1:]) for v in fv), default=0))
        max_rank = max(max_rank, quantifier_rank(f))
    ev1 = _Evaluator(m1, max_len, max_rank)
    ev2 = _Evaluator(m2, max_len, max_rank)
    cols1 = _formula_columns(ev1, formulas)
    cols2 = _formula_columns(ev2, formulas)
    # width_mask[k]: formulas whose free variables fit a length-k tuple
    width_masks = []
    for k in range(max_len + 1):
        mask = bytearray((len(formulas) + 7) // 8)
        for fi, w in enumerate(widths):
            if w <= k:
                mask[fi >> 3] |= 1 << (fi & 7)
        width_masks.append(int.from_bytes(mask, "little"))
    violations: list[PreservationViolation] = []
    for e in sorted(z.pairs):
        src_cols, src_ev, dst_cols, dst_ev = (
            (cols1, ev1, cols2, ev2) if e.dir == 1 else (cols2, ev2, cols1, ev1)
        )
        forced_src = src_cols[src_ev.position(e.from_state, e.from_tuple)]
        forced_dst = dst_cols[dst_ev.position(e.to_state, e.to_tuple)]
        broken = forced_src & ~forced_dst & width_masks[len(e.from_tuple)]
        while broken:
            low = broken & -broken
            fi = low.bit_length() - 1
            violations.append(PreservationViolation(e, formulas[fi]))
            broken ^= low
    return violations


# ---------------------------------------------------------------------------
# Stratified greatest relation on tuples of bounded length


@dataclass(frozen=True)
class StratifiedAsim:
    strata: tuple[frozenset[Entry], ...]

    def relates(self, dir: int, t: str, ds: tuple[int, ...], u: str, es: tuple[int, ...]) -> bool:
        l = len(ds)
        return l < len(self.strata) and Entry(dir, t, ds, u, es) in self.strata[l]

    def as_relation(self) -> AsimRelation:
        return AsimRelation(frozenset(e for s in self.strata for e in s))


def bounded_greatest(
    m1: GModel, m2: GModel, max_len: int, ceiling: int = 2_000_000
) -> StratifiedAsim:
    """The largest stratified family in which stratum l satisfies the atom
    and successor conditions within itself and extends into stratum l+1.

    Contract: when (t, ds) relates to (u, es) in stratum l, every formula of
    quantifier rank at most max_len - l with free variables among the tuple
    transfers from t to u.
    """
    total = 0
    for l in range(max_len + 1):
        total += 2 * len(m1.states) * len(m2.states) * (len(m1.domain) * len(m2.domain)) ** l
    if total > ceiling:
        raise ModelError(f"~{total} candidate entries exceeds ceiling {ceiling}")
    shared = sorted(set(m1.arities) & set(m2.arities))
    strata: list[set[Entry]] = []
    for l in range(max_len + 1):
        stratum: set[Entry] = set()
        for dir in (1, 2):
            mi, mj = _models(m1, m2, dir)
            for t in mi.states:
                for u in mj.states:
                    for ds in itertools.product(mi.domain, repeat=l):
                        for es in itertools.product(mj.domain, repeat=l):
                            e = Entry(dir, t, ds, u, es)
                            if _atoms_transfer(e, m1, m2, shared):
                                stratum.add(e)
        strata.append(stratum)
    changed = True
    while changed:
        changed = False
        for l, stratum in enumerate(strata):
            drop = set()
            for e in stratum:
                mi, mj = _models(m1, m2, e.dir)
                ok = all(
                    any(
                        Entry(e.dir, w, e.from_tuple, v, e.to_tuple) in stratum
                        and Entry(3 - e.dir, v, e.to_tuple, w, e.from_tuple) in stratum
                        for w in mi.succ[e.from_state]
                    )
                    for v in mj.succ[e.to_state]
                )
                if ok and l < max_len:
                    nxt = strata[l + 1]
                    ok = all(
                        any(
                            Entry(e.dir, e.from_state, e.from_tuple + (f,), e.to_state, e.to_tuple + (g,))
                            in nxt
                            for g in mj.domain
                        )
                        for f in mi.domain
                    ) and all(
                        any(
                            Entry(e.dir, e.from_state, e.from_tuple + (f,), e.to_state, e.to_tuple + (g,))
                            in nxt
                            for f in mi.domain
                        )
                        for g in mj.domain
                    )
                if not ok:
                    drop.add(e)
            if drop:
                stratum -= drop
                changed = True
    return StratifiedAsim(tuple(frozenset(s) for s in strata))


def _atoms_transfer(e: Entry, m1: GModel, m2: GModel, shared: list[str]) -> bool:
    mi, mj = _models(m1, m2, e.dir)
    k = len(e.from_tuple)
    for pred in shared:
        arity = m1.arities[pred]
        for arg_positions in itertools.product(range(k), repeat=arity):
            dd = tuple(e.from_tuple[i] for i in arg_positions)
            ee = tuple(e.to_tuple[i] for i in arg_positions)
            if (e.from_state, *dd) in mi.interp[pred] and (e.to_state, *ee) not in mj.interp[pred]:
                return False
    return True


# ---------------------------------------------------------------------------
# Greatest check-valid relation (pair-set refinement)


def greatest_valid(m1: GModel, m2: GModel, ceiling: int = 2_000_000) -> AsimRelation:
    """The largest relation on pair sets that passes check(); used to
    generate valid asimulations between small models.

    May be empty.  One entry is emitted per surviving pair set, with tuples
    listing the pairs in increasing order.
    """
    n_pairsets = 2 ** (len(m1.domain) * len(m2.domain))
    total = 2 * len(m1.states) * len(m2.states) * n_pairsets
    if total > ceiling:
        raise ModelError(f"~{total} candidate pair sets exceeds ceiling {ceiling}")
    shared = sorted(set(m1.arities) & set(m2.arities))
    live: set[tuple[int, str, str, frozenset]] = set()
    for dir in (1, 2):
        mi, mj = _models(m1, m2, dir)
        all_pairs = list(itertools.product(mi.domain, mj.domain))
        for t in mi.states:
            for u in mj.states:
                for r in range(len(all_pairs) + 1):
                    for combo in itertools.combinations(all_pairs, r):
                        ps = frozenset(combo)
                        e = _entry_from_pairset(dir, t, u, ps)
                        if _atoms_transfer(e, m1, m2, shared):
                            live.add((dir, t, u, ps))
    changed = True
    while changed:
        changed = False
        drop = set()
        for item in live:
            dir, t, u, ps = item
            mi, mj = _models(m1, m2, dir)
            rev = frozenset((b, a) for a, b in ps)
            ok = all(
                any(
                    (dir, w, v, ps) in live and (3 - dir, v, w, rev) in live
                    for w in mi.succ[t]
                )
                for v in mj.succ[u]
            )
            if ok:
                dom = {a for a, _ in ps}
                ran = {b for _, b in ps}
                ok = all(
                    f in dom
                    or any((dir, t, u, ps | {(f, g)}) in live for g in mj.domain)
                    for f in mi.domain
                ) and all(
                    g in ran
                    or any((dir, t, u, ps | {(f, g)}) in live for f in mi.domain)
                    for g in mj.domain
                )
            if not ok:
                drop.add(item)
        if drop:
            live -= drop
            changed = True
    return AsimRelation(frozenset(_entry_from_pairset(*item) for item in live))


def _entry_from_pairset(dir: int, t: str, u: str, ps: frozenset) -> Entry:
    pairs = sorted(ps)
    return Entry(dir, t, tuple(a for a, _ in pairs), u, tuple(b for _, b in pairs))


# ---------------------------------------------------------------------------
# File format: one entry per line, `dir state [d1,d2] state [e1,e2]`


def format_asim(z: AsimRelation) -> str:
    lines = []
    for e in sorted(z.pairs):
        ds = ",".join(str(d) for d in e.from_tuple)
        es = ",".join(str(d) for d in e.to_tuple)
        lines.append(f"{e.dir} {e.from_state} [{ds}] {e.to_state} [{es}]")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_asim(text: str) -> AsimRelation:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"line {lineno}: expected 'dir state [..] state [..]'")
        dir_s, t, ds_s, u, es_s = parts
        try:
            dir = int(dir_s)
            ds = _parse_tuple(ds_s)
            es = _parse_tuple(es_s)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        entries.append(Entry(dir, t, ds, u, es))
    return AsimRelation(frozenset(entries))


def _parse_tuple(s: str) -> tuple[int, ...]:
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError(f"bad tuple {s!r}")
    body = s[1:-1].strip()
    if not body:
        return ()
    return tuple(int(x) for x in body.split(","))
