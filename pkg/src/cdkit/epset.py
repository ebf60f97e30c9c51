"""Eventually periodic subsets of the positive naturals.

An EPSet stores membership of 1..threshold explicitly and of everything
beyond through a repeating pattern; the boolean algebra is exact and results
are canonical (minimal period, then minimal threshold), so structural
equality is set equality.

The progression kN+l is read as {k*n + l | n >= 0} intersected with the
positive naturals; with that reading 3N, 3N+1, 3N+2 together cover all of
the positive naturals.

Literal syntax: ``3N``, ``3N+1``, ``N``, finite sets ``{5,7}``, unions with
``+`` and differences with ``-`` (left associative).  After ``kN``, a ``+``
followed by a bare integer is the progression offset; a ``+`` followed by a
set literal is a union.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import lcm
from typing import Iterable


@dataclass(frozen=True)
class EPSet:
    threshold: int
    prefix: tuple[bool, ...]  # membership of 1..threshold
    period: int
    pattern: tuple[bool, ...]  # membership of n > threshold via (n-threshold-1) % period

    def __post_init__(self):
        if self.threshold != len(self.prefix):
            raise ValueError("prefix length must equal threshold")
        if self.period != len(self.pattern) or self.period < 1:
            raise ValueError("pattern length must equal period >= 1")
        t, prefix, pattern = _canonicalize(self.threshold, self.prefix, self.pattern)
        object.__setattr__(self, "threshold", t)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", len(pattern))
        object.__setattr__(self, "pattern", pattern)

    # -- queries ----------------------------------------------------------

    def member(self, n: int) -> bool:
        if n < 1:
            return False
        if n <= self.threshold:
            return self.prefix[n - 1]
        return self.pattern[(n - self.threshold - 1) % self.period]

    def __contains__(self, n: int) -> bool:
        return self.member(n)

    def is_empty(self) -> bool:
        return not any(self.prefix) and not any(self.pattern)

    def is_infinite(self) -> bool:
        return any(self.pattern)

    def is_finite(self) -> bool:
        return not self.is_infinite()

    def least(self) -> int | None:
        for i, b in enumerate(self.prefix):
            if b:
                return i + 1
        for i, b in enumerate(self.pattern):
            if b:
                return self.threshold + 1 + i
        return None

    def is_subset(self, other: EPSet) -> bool:
        return self.difference(other).is_empty()

    def iter_members(self, limit: int) -> Iterable[int]:
        for n in range(1, limit + 1):
            if self.member(n):
                yield n

    def finite_members(self) -> tuple[int, ...]:
        if self.is_infinite():
            raise ValueError("set is infinite")
        return tuple(i + 1 for i, b in enumerate(self.prefix) if b)

    # -- algebra -----------------------------------------------------------

    def _combine(self, other: EPSet, op) -> EPSet:
        t = max(self.threshold, other.threshold)
        p = lcm(self.period, other.period)
        prefix = tuple(op(self.member(n), other.member(n)) for n in range(1, t + 1))
        pattern = tuple(op(self.member(t + 1 + i), other.member(t + 1 + i)) for i in range(p))
        return _canonical(t, prefix, pattern)

    def union(self, other: EPSet) -> EPSet:
        return self._combine(other, lambda a, b: a or b)

    def intersect(self, other: EPSet) -> EPSet:
        return self._combine(other, lambda a, b: a and b)

    def difference(self, other: EPSet) -> EPSet:
        return self._combine(other, lambda a, b: a and not b)

    def complement(self) -> EPSet:
        return _canonical(
            self.threshold,
            tuple(not b for b in self.prefix),
            tuple(not b for b in self.pattern),
        )

    __or__ = union
    __and__ = intersect
    __sub__ = difference

    def remove(self, elems: Iterable[int]) -> EPSet:
        return self.difference(finite(elems))

    def __str__(self) -> str:
        return format_epset(self)


def _canonicalize(
    threshold: int, prefix: tuple[bool, ...], pattern: tuple[bool, ...]
) -> tuple[int, tuple[bool, ...], tuple[bool, ...]]:
    # Minimal period: smallest divisor whose repetition gives the pattern.
    p = len(pattern)
    for d in range(1, p + 1):
        if p % d == 0 and all(pattern[i] == pattern[i % d] for i in range(p)):
            pattern = pattern[:d]
            break
    # Minimal threshold: absorb trailing prefix bits into the rotated pattern.
    prefix = tuple(prefix)
    while threshold > 0 and prefix[-1] == pattern[-1]:
        pattern = pattern[-1:] + pattern[:-1]
        prefix = prefix[:-1]
        threshold -= 1
    return threshold, prefix, pattern


def _canonical(threshold: int, prefix: tuple[bool, ...], pattern: tuple[bool, ...]) -> EPSet:
    return EPSet(threshold, prefix, len(pattern), pattern)


EMPTY = EPSet(0, (), 1, (False,))
NATURALS = EPSet(0, (), 1, (True,))


def finite(elems: Iterable[int]) -> EPSet:
    chosen = sorted(set(elems))
    if any(e < 1 for e in chosen):
        raise ValueError("elements must be positive")
    if not chosen:
        return EMPTY
    t = chosen[-1]
    members = set(chosen)
    prefix = tuple(n in members for n in range(1, t + 1))
    return _canonical(t, prefix, (False,))


def progression(k: int, l: int) -> EPSet:
    """{k*n + l | n >= 0} restricted to positive naturals."""
    if k < 1 or l < 0:
        raise ValueError("need k >= 1 and l >= 0")
    start = l if l >= 1 else k
    prefix = tuple(False for _ in range(start - 1))
    pattern = tuple(i == 0 for i in range(k))
    return _canonical(start - 1, prefix, pattern)


def split_alternating(s: EPSet) -> tuple[EPSet, EPSet]:
    """Partition an infinite set into two infinite halves by alternating its
    elements in increasing order; the first half takes the 2nd, 4th, ...
    elements.  Realized exactly with a doubled period."""
    if not s.is_infinite():
        raise ValueError("set is finite")
    t = s.threshold
    # Parity of the running element count repeats every 2 periods beyond t.
    count = 0
    first_bits = []
    second_bits = []
    for n in range(1, t + 1):
        if s.member(n):
            count += 1
            first_bits.append(count % 2 == 0)
            second_bits.append(count % 2 == 1)
        else:
            first_bits.append(False)
            second_bits.append(False)
    first_pat = []
    second_pat = []
    for i in range(2 * s.period):
        n = t + 1 + i
        if s.member(n):
            count += 1
            first_pat.append(count % 2 == 0)
            second_pat.append(count % 2 == 1)
        else:
            first_pat.append(False)
            second_pat.append(False)
    return (
        _canonical(t, tuple(first_bits), tuple(first_pat)),
        _canonical(t, tuple(second_bits), tuple(second_pat)),
    )


# ---------------------------------------------------------------------------
# Literal syntax


class EPSetSyntaxError(ValueError):
    pass


_EP_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<sym>[N+\-{},()]))")


def _ep_tokens(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _EP_TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise EPSetSyntaxError(f"unexpected character {text[pos:].lstrip()[0]!r}")
        pos = m.end()
        if m.group("int"):
            out.append(("INT", m.group("int")))
        else:
            out.append((m.group("sym"), m.group("sym")))
    out.append(("EOF", ""))
    return out


def parse_epset(text: str) -> EPSet:
    tokens = _ep_tokens(text)
    i = 0

    def peek(k=0):
        return tokens[min(i + k, len(tokens) - 1)]

    def take(kind):
        nonlocal i
        tok = tokens[i]
        if tok[0] != kind:
            raise EPSetSyntaxError(f"expected {kind!r}, found {tok[1]!r}")
        i += 1
        return tok

    def primary() -> EPSet:
        nonlocal i
        kind, val = peek()
        if kind == "(":
            take("(")
            s = expr()
            take(")")
            return s
        if kind == "{":
            take("{")
            elems = []
            if peek()[0] != "}":
                elems.append(int(take("INT")[1]))
                while peek()[0] == ",":
                    take(",")
                    elems.append(int(take("INT")[1]))
            take("}")
            return finite(elems)
        k = 1
        if kind == "INT":
            k = int(take("INT")[1])
        take("N")
        l = 0
        # `+ INT` right after N is a progression offset unless the INT starts
        # a new kN term.
        if peek()[0] == "+" and peek(1)[0] == "INT" and peek(2)[0] != "N":
            take("+")
            l = int(take("INT")[1])
        return progression(k, l)

    def expr() -> EPSet:
        s = primary()
        while peek()[0] in ("+", "-"):
            op = take(peek()[0])[0]
            t = primary()
            s = s.union(t) if op == "+" else s.difference(t)
        return s

    result = expr()
    if peek()[0] != "EOF":
        raise EPSetSyntaxError(f"trailing input {peek()[1]!r}")
    return result


def format_epset(s: EPSet) -> str:
    """A literal that parses back to s: a union of progressions over one
    period window, plus/minus finite corrections."""
    if s.is_empty():
        return "{}"
    if s.is_finite():
        return "{" + ",".join(str(e) for e in s.finite_members()) + "}"
    k = s.period
    t = s.threshold
    parts = []
    for i, bit in enumerate(s.pattern):
        if bit:
            offset = t + 1 + i
            parts.append(f"{k}N" if offset == k else f"{k}N+{offset}")
    core = " + ".join(parts)
    extra = [n for n in range(1, t + 1) if s.member(n)]
    if extra:
        core = core + " + {" + ",".join(str(e) for e in extra) + "}"
    return core
