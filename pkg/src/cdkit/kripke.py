"""Finite constant-domain Kripke-style models and the forcing relation.

A model is a quasi-ordered set of states with a least base state, one fixed
domain of positive integers, and a monotone interpretation: once an atom
holds at a state it holds at every state above it.  Second-order expansion
adds one extra predicate interpreted by a monotone relation.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .syntax import (
    And,
    Atom,
    Const,
    Exists,
    Falsum,
    Forall,
    Formula,
    Implies,
    Or,
    Var,
    free_vars,
)


class ModelError(ValueError):
    pass


class EnumerationCeiling(RuntimeError):
    pass


@dataclass(frozen=True)
class MonotoneRelation:
    """A k+1-ary relation over states x domain^k, monotone along the order."""

    arity: int
    tuples: frozenset[tuple]  # elements are (state, d1, ..., dk)


class GModel:
    """Immutable after construction; all operations on it are pure.

    order is given as a set of (v, w) pairs meaning v <= w and must already
    be reflexive and transitive (validate() reports breaches rather than
    repairing them).
    """

    __slots__ = ("states", "order", "base", "domain", "interp", "arities", "succ", "_key")

    def __init__(
        self,
        states: Iterable[str],
        order: Iterable[tuple[str, str]],
        base: str,
        domain: Iterable[int],
        interp: Mapping[str, Iterable[tuple]],
        arities: Mapping[str, int],
    ):
        self.states: tuple[str, ...] = tuple(states)
        self.order: frozenset[tuple[str, str]] = frozenset(order)
        self.base: str = base
        self.domain: tuple[int, ...] = tuple(sorted(domain))
        self.arities: dict[str, int] = dict(arities)
        self.interp: dict[str, frozenset[tuple]] = {
            p: frozenset(interp.get(p, ())) for p in self.arities
        }
        self.succ: dict[str, tuple[str, ...]] = {
            v: tuple(w for w in self.states if (v, w) in self.order) for v in self.states
        }
        self._key = None

    def leq(self, v: str, w: str) -> bool:
        return (v, w) in self.order

    def signature(self) -> dict[str, int]:
        return dict(self.arities)

    def key(self) -> tuple:
        """Hashable identity used for deduplication and caching."""
        if self._key is None:
            self._key = (
                self.states,
                tuple(sorted(self.order)),
                self.base,
                self.domain,
                tuple(sorted((p, tuple(sorted(ts))) for p, ts in self.interp.items())),
                tuple(sorted(self.arities.items())),
            )
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, GModel) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return (
            f"GModel(states={len(self.states)}, domain={len(self.domain)}, "
            f"preds={sorted(self.arities)})"
        )


def validate(m: GModel) -> list[str]:
    """All invariant breaches, each naming the invariant and a witness."""
    violations = []
    if not m.domain:
        violations.append("empty-domain")
    if any(d < 1 for d in m.domain):
        violations.append("nonpositive-domain-element")
    if m.base not in m.states:
        violations.append(f"unknown-base: {m.base}")
    state_set = set(m.states)
    for v, w in sorted(m.order):
        if v not in state_set or w not in state_set:
            violations.append(f"order-over-unknown-state: {v}<={w}")
    for v in m.states:
        if (v, v) not in m.order:
            violations.append(f"reflexivity: missing {v}<={v}")
    for (a, b), (c, d) in itertools.product(sorted(m.order), repeat=2):
        if b == c and (a, d) not in m.order:
            violations.append(f"transitivity: {a}<={b}<={d} but not {a}<={d}")
    if m.base in state_set:
        for v in m.states:
            if (m.base, v) not in m.order:
                violations.append(f"base-state: base not below {v}")
    for pred, arity in sorted(m.arities.items()):
        for t in sorted(m.interp[pred]):
            if len(t) != arity + 1:
                violations.append(f"arity: {pred} tuple {t} has wrong length")
                continue
            if t[0] not in state_set:
                violations.append(f"interp-over-unknown-state: {pred}{t}")
            if any(d not in m.domain for d in t[1:]):
                violations.append(f"interp-over-unknown-element: {pred}{t}")
        for t in sorted(m.interp[pred]):
            if len(t) != arity + 1 or t[0] not in state_set:
                continue
            for w in m.succ.get(t[0], ()):
                if (w,) + t[1:] not in m.interp[pred]:
                    violations.append(f"monotonicity: {pred},{t},{w}")
    return violations


def forces(m: GModel, v: str, f: Formula, env: Mapping[str, int] | None = None) -> bool:
    """The inductive forcing relation at state v.

    f must be a sentence over the model's constants, or have all its free
    variables bound by env.
    """
    env = env or {}
    missing = free_vars(f) - set(env)
    if missing:
        raise ModelError(f"free variables not bound: {sorted(missing)}")
    if v not in m.succ:
        raise ModelError(f"unknown state: {v}")
    return _forces(m, v, f, dict(env))


def _forces(m: GModel, v: str, f: Formula, env: dict[str, int]) -> bool:
    if isinstance(f, Falsum):
        return False
    if isinstance(f, Atom):
        if f.pred not in m.interp:
            raise ModelError(f"unknown predicate: {f.pred}")
        args = []
        for a in f.args:
            d = a.value if isinstance(a, Const) else env[a.name]
            if d not in m.domain:
                raise ModelError(f"unknown constant: {d}")
            args.append(d)
        return (v, *args) in m.interp[f.pred]
    if isinstance(f, And):
        return _forces(m, v, f.left, env) and _forces(m, v, f.right, env)
    if isinstance(f, Or):
        return _forces(m, v, f.left, env) or _forces(m, v, f.right, env)
    if isinstance(f, Implies):
        return all(
            not _forces(m, w, f.left, env) or _forces(m, w, f.right, env) for w in m.succ[v]
        )
    if isinstance(f, Exists):
        saved = env.get(f.var)
        for d in m.domain:
            env[f.var] = d
            if _forces(m, v, f.body, env):
                _restore(env, f.var, saved)
                return True
        _restore(env, f.var, saved)
        return False
    if isinstance(f, Forall):
        saved = env.get(f.var)
        for d in m.domain:
            env[f.var] = d
            if not _forces(m, v, f.body, env):
                _restore(env, f.var, saved)
                return False
        _restore(env, f.var, saved)
        return True
    raise TypeError(f"not a formula: {f!r}")


def _restore(env: dict[str, int], var: str, saved: int | None) -> None:
    if saved is None:
        env.pop(var, None)
    else:
        env[var] = saved


def valid_at_base(m: GModel, f: Formula) -> bool:
    return forces(m, m.base, f)


def expand(m: GModel, sym: str, r: MonotoneRelation) -> GModel:
    """The same model with one extra predicate interpreted by r."""
    if sym in m.arities:
        raise ModelError(f"symbol clash: {sym}")
    state_set = set(m.states)
    for t in r.tuples:
        if len(t) != r.arity + 1 or t[0] not in state_set or any(d not in m.domain for d in t[1:]):
            raise ModelError(f"relation tuple out of range: {t}")
    for t in r.tuples:
        for w in m.succ[t[0]]:
            if (w,) + t[1:] not in r.tuples:
                raise ModelError(f"monotonicity violation in relation: {t} vs state {w}")
    interp = dict(m.interp)
    interp[sym] = frozenset(r.tuples)
    arities = dict(m.arities)
    arities[sym] = r.arity
    return GModel(m.states, m.order, m.base, m.domain, interp, arities)


def reduct(m: GModel, preds: Iterable[str]) -> GModel:
    """The same model restricted to the given predicate symbols."""
    keep = [p for p in preds if p in m.arities]
    return GModel(
        m.states,
        m.order,
        m.base,
        m.domain,
        {p: m.interp[p] for p in keep},
        {p: m.arities[p] for p in keep},
    )


# ---------------------------------------------------------------------------
# Up-sets and monotone interpretations


def upsets(m_order: frozenset[tuple[str, str]], states: tuple[str, ...]) -> list[frozenset[str]]:
    """All upward-closed state sets, in a deterministic order."""
    out = []
    for bits in itertools.product((False, True), repeat=len(states)):
        chosen = frozenset(s for s, b in zip(states, bits) if b)
        if all(w in chosen for v in chosen for (x, w) in m_order if x == v):
            out.append(chosen)
    return out


def monotone_relations(m: GModel, arity: int) -> Iterator[MonotoneRelation]:
    """Every monotone relation of the given arity over m, deterministically."""
    ups = upsets(m.order, m.states)
    tuples_of_elems = list(itertools.product(m.domain, repeat=arity))
    for choice in itertools.product(range(len(ups)), repeat=len(tuples_of_elems)):
        tups = set()
        for elems, ui in zip(tuples_of_elems, choice):
            for s in ups[ui]:
                tups.add((s, *elems))
        yield MonotoneRelation(arity, frozenset(tups))


# ---------------------------------------------------------------------------
# Exhaustive enumeration up to isomorphism


def _orders_with_least(n: int) -> list[frozenset[tuple[int, int]]]:
    """All quasi-orders on 0..n-1 that are reflexive, transitive, and have
    0 below every element."""
    idx = list(range(n))
    fixed = {(0, j) for j in idx} | {(i, i) for i in idx}
    optional = [(i, j) for i in idx for j in idx if i != j and (i, j) not in fixed]
    out = []
    for bits in itertools.product((False, True), repeat=len(optional)):
        rel = set(fixed) | {p for p, b in zip(optional, bits) if b}
        if all((a, d) in rel for (a, b) in rel for (c, d) in rel if b == c):
            out.append(frozenset(rel))
    return sorted(out, key=sorted)


def _interp_key(interp: dict[str, frozenset[tuple]], arities: dict[str, int]) -> tuple:
    return tuple((p, tuple(sorted(interp[p]))) for p in sorted(arities))


def enumerate_models(
    max_states: int,
    max_domain: int,
    signature: Mapping[str, int],
    ceiling: int = 10_000_000,
) -> Iterator[GModel]:
    """Every valid model up to isomorphism within the bounds, each exactly
    once, in a deterministic order.

    Isomorphisms permute non-base states and domain elements; the base is
    distinguished.  Raises EnumerationCeiling when the estimated number of
    labeled candidates exceeds the ceiling.
    """
    if max_states < 1 or max_domain < 1:
        raise ValueError("bounds must be >= 1")
    arities = dict(sorted(signature.items()))
    for n in range(1, max_states + 1):
        orders = _orders_with_least(n)
        for nd in range(1, max_domain + 1):
            domain = tuple(range(1, nd + 1))
            estimate = 0
            for order in orders:
                nup = len(upsets(order, tuple(str(i) for i in range(n))))
                per_order = 1
                for arity in arities.values():
                    per_order *= nup ** (nd**arity)
                estimate += per_order
            if estimate > ceiling:
                raise EnumerationCeiling(
                    f"~{estimate} labeled models at ({n} states, {nd} elements) "
                    f"exceeds ceiling {ceiling}"
                )
            state_perms = [
                {str(i): str(p[i]) for i in range(n)}
                for p in (
                    (0, *perm) for perm in itertools.permutations(range(1, n))
                )
            ]
            dom_perms = [dict(zip(domain, p)) for p in itertools.permutations(domain)]
            for order in orders:
                states = tuple(str(i) for i in range(n))
                named_order = frozenset((str(a), str(b)) for a, b in order)
                ups = upsets(named_order, states)
                pred_choices = []
                for pred in arities:
                    arity = arities[pred]
                    elem_tuples = list(itertools.product(domain, repeat=arity))
                    pred_choices.append((pred, elem_tuples))
                spaces = [
                    itertools.product(range(len(ups)), repeat=len(tups))
                    for _, tups in pred_choices
                ]
                for combo in itertools.product(*spaces):
                    interp: dict[str, frozenset[tuple]] = {}
                    for (pred, elem_tuples), choice in zip(pred_choices, combo):
                        tups = set()
                        for elems, ui in zip(elem_tuples, choice):
                            for s in ups[ui]:
                                tups.add((s, *elems))
                        interp[pred] = frozenset(tups)
                    if not _is_orbit_minimum(
                        named_order, interp, arities, state_perms, dom_perms
                    ):
                        continue
                    yield GModel(states, named_order, "0", domain, interp, arities)


def _apply_perm(
    order: frozenset[tuple[str, str]],
    interp: dict[str, frozenset[tuple]],
    sp: dict[str, str],
    dp: dict[int, int],
    arities: dict[str, int],
) -> tuple:
    new_order = frozenset((sp[a], sp[b]) for a, b in order)
    new_interp = {
        p: frozenset((sp[t[0]], *(dp[d] for d in t[1:])) for t in ts) for p, ts in interp.items()
    }
    return (tuple(sorted(new_order)), _interp_key(new_interp, arities))


def _is_orbit_minimum(order, interp, arities, state_perms, dom_perms) -> bool:
    own = (tuple(sorted(order)), _interp_key(interp, arities))
    for sp in state_perms:
        for dp in dom_perms:
            if _apply_perm(order, interp, sp, dp, arities) < own:
                return False
    return True


# ---------------------------------------------------------------------------
# Random models (seeded suites)


def random_model(
    rng: random.Random,
    max_states: int,
    max_domain: int,
    signature: Mapping[str, int],
) -> GModel:
    """A random valid model within the bounds, deterministic in the rng."""
    n = rng.randint(1, max_states)
    nd = rng.randint(1, max_domain)
    states = tuple(str(i) for i in range(n))
    domain = tuple(range(1, nd + 1))
    rel = {(str(0), s) for s in states} | {(s, s) for s in states}
    for a in range(1, n):
        for b in range(1, n):
            if a != b and rng.random() < 0.4:
                rel.add((str(a), str(b)))
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(tuple(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    interp: dict[str, frozenset[tuple]] = {}
    for pred, arity in sorted(signature.items()):
        tups = set()
        for elems in itertools.product(domain, repeat=arity):
            for s in states:
                if rng.random() < 0.3:
                    tups.add((s, *elems))
        closed = set(tups)
        for t in tups:
            for w in states:
                if (t[0], w) in rel:
                    closed.add((w, *t[1:]))
        interp[pred] = frozenset(closed)
    return GModel(states, frozenset(rel), "0", domain, interp, dict(signature))


# ---------------------------------------------------------------------------
# Fast satisfaction tables (integer bitmasks)
#
# A table for scope (x1..xk) is an int whose bit at position
# state_index * |D|^k + digits(env) records satisfaction at (state, env).
# forces() is the independent reference; the two are cross-checked in tests.


class TableSpace:
    def __init__(self, m: GModel, scope: tuple[str, ...]):
        self.m = m
        self.scope = scope
        self.k = len(scope)
        self.nd = len(m.domain)
        self.E = self.nd**self.k
        self.n_states = len(m.states)
        self.total = self.n_states * self.E
        self.full = (1 << self.total) - 1
        self.state_index = {s: i for i, s in enumerate(m.states)}
        self.dom_index = {d: i for i, d in enumerate(m.domain)}
        self.block = (1 << self.E) - 1
        # digit i (0-based from scope start) has stride nd^(k-1-i)
        self.stride = [self.nd ** (self.k - 1 - i) for i in range(self.k)]
        self._digit_masks: dict[tuple[int, int], int] = {}
        self._env_cache: dict[tuple, int] = {}
        self._table_cache: dict[Formula, int] = {}

    def digit_mask(self, i: int, a_idx: int) -> int:
        key = (i, a_idx)
        got = self._digit_masks.get(key)
        if got is None:
            s = self.stride[i]
            period = s * self.nd
            chunk = (1 << s) - 1
            mask_env = 0
            pos = a_idx * s
            while pos < self.E:
                mask_env |= chunk << pos
                pos += period
            got = 0
            for st in range(self.n_states):
                got |= mask_env << (st * self.E)
            self._digit_masks[key] = got
        return got

    def atom_table(self, pred: str, args: tuple) -> int:
        tups = self.m.interp[pred]
        key = (pred, args)
        got = self._env_cache.get(key)
        if got is not None:
            return got
        out = 0
        var_positions = [
            (j, self.scope.index(a.name)) for j, a in enumerate(args) if isinstance(a, Var)
        ]
        const_vals = [(j, a.value) for j, a in enumerate(args) if isinstance(a, Const)]
        for env_idx in range(self.E):
            digits = []
            rest = env_idx
            for i in range(self.k):
                digits.append(rest // self.stride[i])
                rest %= self.stride[i]
            concrete = [0] * len(args)
            for j, i in var_positions:
                concrete[j] = self.m.domain[digits[i]]
            for j, v in const_vals:
                concrete[j] = v
            tup = tuple(concrete)
            for st_i, st in enumerate(self.m.states):
                if (st, *tup) in tups:
                    out |= 1 << (st_i * self.E + env_idx)
        self._env_cache[key] = out
        return out

    def state_slice(self, table: int, st_i: int) -> int:
        return (table >> (st_i * self.E)) & self.block


def sat_table(space: TableSpace, f: Formula) -> int:
    """Bitmask of (state, environment) pairs at which f is forced.

    Tables are cached per space by structural equality, so families of
    formulas sharing subformulas evaluate in amortized constant time per
    node.
    """
    cached = space._table_cache.get(f)
    if cached is None:
        cached = _sat_table(space, f)
        space._table_cache[f] = cached
    return cached


def _sat_table(space: TableSpace, f: Formula) -> int:
    m = space.m
    if isinstance(f, Falsum):
        return 0
    if isinstance(f, Atom):
        if f.pred not in m.interp:
            raise ModelError(f"unknown predicate: {f.pred}")
        return space.atom_table(f.pred, f.args)
    if isinstance(f, And):
        return sat_table(space, f.left) & sat_table(space, f.right)
    if isinstance(f, Or):
        return sat_table(space, f.left) | sat_table(space, f.right)
    if isinstance(f, Implies):
        a = sat_table(space, f.left)
        b = sat_table(space, f.right)
        c = (~a | b) & space.full
        out = 0
        for st_i, st in enumerate(m.states):
            acc = space.block
            for w in m.succ[st]:
                acc &= space.state_slice(c, space.state_index[w])
            out |= acc << (st_i * space.E)
        return out
    if isinstance(f, (Forall, Exists)):
        if f.var not in space.scope:
            raise ModelError(f"quantified variable {f.var} missing from table scope")
        i = space.scope.index(f.var)
        t = sat_table(space, f.body)
        s = space.stride[i]
        parts = [
            ((t & space.digit_mask(i, a_idx)) >> (a_idx * s)) for a_idx in range(space.nd)
        ]
        if isinstance(f, Forall):
            core = parts[0]
            for p in parts[1:]:
                core &= p
        else:
            core = parts[0]
            for p in parts[1:]:
                core |= p
        out = 0
        for a_idx in range(space.nd):
            out |= core << (a_idx * s)
        return out
    raise TypeError(f"not a formula: {f!r}")


def forces_via_table(m: GModel, v: str, f: Formula, scope_hint: int | None = None) -> bool:
    """Evaluate a sentence through the table machinery (fast path)."""
    from .syntax import quantifier_rank

    depth = scope_hint if scope_hint is not None else quantifier_rank(f)
    scope = tuple(f"x{i+1}" for i in range(depth))
    space = TableSpace(m, scope)
    table = sat_table(space, canonical_bound_vars(f))
    return bool((table >> (space.state_index[v] * space.E)) & 1)


def canonical_bound_vars(f: Formula, _depth: int = 0) -> Formula:
    """Rename bound variables to x1, x2, ... by nesting depth."""
    if isinstance(f, (Atom, Falsum)):
        return f
    if isinstance(f, (And, Or, Implies)):
        return type(f)(
            canonical_bound_vars(f.left, _depth), canonical_bound_vars(f.right, _depth)
        )
    if isinstance(f, (Forall, Exists)):
        name = f"x{_depth + 1}"
        body = f.body if name == f.var else _rename_free(f.body, f.var, name)
        return type(f)(name, canonical_bound_vars(body, _depth + 1))
    raise TypeError(f"not a formula: {f!r}")


def _rename_free(f: Formula, old: str, new: str) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(Var(new) if isinstance(a, Var) and a.name == old else a for a in f.args))
    if isinstance(f, Falsum):
        return f
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_rename_free(f.left, old, new), _rename_free(f.right, old, new))
    if isinstance(f, (Forall, Exists)):
        if f.var == old:
            return f
        return type(f)(f.var, _rename_free(f.body, old, new))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Model file format


def format_model(m: GModel, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.append("states: " + " ".join(m.states))
    pairs = sorted((a, b) for a, b in m.order if a != b)
    lines.append("order: " + " ".join(f"{a}<={b}" for a, b in pairs))
    lines.append(f"base: {m.base}")
    lines.append("domain: " + " ".join(str(d) for d in m.domain))
    for pred in sorted(m.arities):
        entries = []
        for t in sorted(m.interp[pred]):
            entries.append(":".join([t[0], *(str(d) for d in t[1:])]))
        lines.append(f"{pred}/{m.arities[pred]}: " + " ".join(entries))
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> tuple[GModel, list[str]]:
    """Read the model file format; applies reflexive-transitive closure to
    the order and reports a warning when that added pairs."""
    states: tuple[str, ...] = ()
    order: set[tuple[str, str]] = set()
    base = None
    domain: tuple[int, ...] = ()
    interp: dict[str, set[tuple]] = {}
    arities: dict[str, int] = {}
    warnings: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ModelError(f"line {lineno}: expected 'key: values'")
        key, _, rest = line.partition(":")
        key = key.strip()
        fields = rest.split()
        if key == "states":
            states = tuple(fields)
        elif key == "order":
            for f in fields:
                if "<=" not in f:
                    raise ModelError(f"line {lineno}: bad order entry {f!r}")
                a, _, b = f.partition("<=")
                order.add((a, b))
        elif key == "base":
            if len(fields) != 1:
                raise ModelError(f"line {lineno}: base must be one state")
            base = fields[0]
        elif key == "domain":
            try:
                domain = tuple(int(f) for f in fields)
            except ValueError:
                raise ModelError(f"line {lineno}: domain elements must be integers") from None
        elif "/" in key:
            pred, _, ar = key.partition("/")
            try:
                arity = int(ar)
            except ValueError:
                raise ModelError(f"line {lineno}: bad arity in {key!r}") from None
            arities[pred] = arity
            tups = interp.setdefault(pred, set())
            for f in fields:
                parts = f.split(":")
                if len(parts) != arity + 1:
                    raise ModelError(f"line {lineno}: entry {f!r} does not match arity {arity}")
                tups.add((parts[0], *(int(p) for p in parts[1:])))
        else:
            raise ModelError(f"line {lineno}: unknown key {key!r}")
    if base is None or not states:
        raise ModelError("model file must define states and base")
    given = set(order) | {(s, s) for s in states}
    closed = set(given)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(tuple(closed), repeat=2):
            if b == c and (a, d) not in closed:
                closed.add((a, d))
                changed = True
    added = len(closed) - len(given)
    if added:
        warnings.append(f"order closure added {added} pair(s)")
    m = GModel(states, frozenset(closed), base, domain, interp, arities)
    return m, warnings
