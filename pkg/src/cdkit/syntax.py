"""First-order formulas over &, |, ->, bot, forall, exists.

Negation is not a constructor: ``~A`` is parsed as ``A -> bot`` and the
printer re-sugars it.  Predicate symbols may have any arity; arity 0 gives
propositional variables.  Domain constants are positive integers, one per
domain element.

Concrete grammar (ASCII)::

    formula  := quantified | implication
    quantified := ('forall' | 'exists') VAR '.' formula
    implication := disjunction ['->' formula]          (right associative)
    disjunction := conjunction ('|' conjunction)*
    conjunction := negation ('&' negation)*
    negation := '~' negation | quantified | primary
    primary  := 'bot' | IDENT ['(' term (',' term)* ')'] | '(' formula ')'
    term     := IDENT | INT

Precedence: ~ > & > | > ->; quantifier bodies extend maximally right.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterator, Mapping


# ---------------------------------------------------------------------------
# Terms and formulas


class Term:
    pass


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const(Term):
    value: int

    def __post_init__(self) -> None:
        if self.value < 1:
            raise ValueError(f"domain constants are positive integers, got {self.value}")

    def __str__(self) -> str:
        return str(self.value)


class Formula:
    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    args: tuple[Term, ...] = ()


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
class Falsum(Formula):
    pass


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


FALSUM = Falsum()


def neg(f: Formula) -> Formula:
    """The defined negation: f -> bot."""
    return Implies(f, FALSUM)


# ---------------------------------------------------------------------------
# Parsing


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<punct>[().,&|~])|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9']*))"
)

_KEYWORDS = {"forall", "exists", "bot"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        pos = m.end()
        if m.group("arrow"):
            tokens.append(("->", "->", m.start("arrow")))
        elif m.group("punct"):
            tokens.append((m.group("punct"), m.group("punct"), m.start("punct")))
        elif m.group("int"):
            tokens.append(("INT", m.group("int"), m.start("int")))
        else:
            word = m.group("ident")
            kind = word if word in _KEYWORDS else "IDENT"
            tokens.append((kind, word, m.start("ident")))
    tokens.append(("EOF", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.arities: dict[str, int] = {}

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def formula(self) -> Formula:
        kind, _, _ = self.peek()
        if kind in ("forall", "exists"):
            return self.quantified()
        return self.implication()

    def quantified(self) -> Formula:
        kind, _, _ = self.take(self.peek()[0])
        _, var, _ = self.take("IDENT")
        self.take(".")
        body = self.formula()
        return Forall(var, body) if kind == "forall" else Exists(var, body)

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek()[0] == "->":
            self.take("->")
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek()[0] == "|":
            self.take("|")
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.negation()
        while self.peek()[0] == "&":
            self.take("&")
            f = And(f, self.negation())
        return f

    def negation(self) -> Formula:
        kind, _, _ = self.peek()
        if kind == "~":
            self.take("~")
            return neg(self.negation())
        if kind in ("forall", "exists"):
            return self.quantified()
        return self.primary()

    def primary(self) -> Formula:
        kind, word, pos = self.peek()
        if kind == "bot":
            self.take("bot")
            return FALSUM
        if kind == "(":
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if kind == "IDENT":
            self.take("IDENT")
            args: list[Term] = []
            if self.peek()[0] == "(":
                self.take("(")
                if self.peek()[0] != ")":
                    args.append(self.term())
                    while self.peek()[0] == ",":
                        self.take(",")
                        args.append(self.term())
                self.take(")")
            seen = self.arities.get(word)
            if seen is not None and seen != len(args):
                raise ParseError(
                    f"predicate {word!r} used with arity {len(args)} after arity {seen}", pos
                )
            self.arities[word] = len(args)
            return Atom(word, tuple(args))
        raise ParseError(f"expected a formula, found {word!r}", pos)

    def term(self) -> Term:
        kind, word, pos = self.peek()
        if kind == "INT":
            self.take("INT")
            value = int(word)
            if value < 1:
                raise ParseError("domain constants are positive integers", pos)
            return Const(value)
        if kind == "IDENT":
            self.take("IDENT")
            return Var(word)
        raise ParseError(f"expected a term, found {word!r}", pos)


def parse(text: str) -> Formula:
    """Parse the concrete syntax; raises ParseError with a position."""
    p = _Parser(text)
    f = p.formula()
    kind, word, pos = p.peek()
    if kind != "EOF":
        raise ParseError(f"trailing input {word!r}", pos)
    return f


# ---------------------------------------------------------------------------
# Printing


def _print(f: Formula, tail: bool) -> str:
    # tail=True means the formula extends to the end of the enclosing
    # context, so quantifiers and -> need no parentheses.
    if isinstance(f, Falsum):
        return "bot"
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(str(a) for a in f.args)})"
    if isinstance(f, Implies) and f.right == FALSUM:
        inner = _print(f.left, True)
        if isinstance(f.left, (And, Or, Implies, Forall, Exists)) and not (
            isinstance(f.left, Implies) and f.left.right == FALSUM
        ):
            inner = f"({inner})"
        return f"~{inner}"
    if isinstance(f, (Forall, Exists)):
        kw = "forall" if isinstance(f, Forall) else "exists"
        body = f"{kw} {f.var}. {_print(f.body, True)}"
        return body if tail else f"({body})"
    if isinstance(f, Implies):
        body = f"{_print(f.left, False)} -> {_print(f.right, True)}"
        return body if tail else f"({body})"
    if isinstance(f, And):
        parts = []
        for side in (f.left, f.right):
            s = _print(side, False)
            if isinstance(side, Or) or (isinstance(side, And) and side is f.right):
                s = f"({s})"
            parts.append(s)
        return " & ".join(parts)
    if isinstance(f, Or):
        parts = []
        for side in (f.left, f.right):
            s = _print(side, False)
            if isinstance(side, Or) and side is f.right:
                s = f"({s})"
            parts.append(s)
        return " | ".join(parts)
    raise TypeError(f"not a formula: {f!r}")


def print_formula(f: Formula) -> str:
    """Emit the concrete grammar; parse(print_formula(f)) == f."""
    return _print(f, True)


# ---------------------------------------------------------------------------
# Analysis


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(a.name for a in f.args if isinstance(a, Var))
    if isinstance(f, (And, Or, Implies)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Falsum):
        return frozenset()
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def constants(f: Formula) -> frozenset[int]:
    if isinstance(f, Atom):
        return frozenset(a.value for a in f.args if isinstance(a, Const))
    if isinstance(f, (And, Or, Implies)):
        return constants(f.left) | constants(f.right)
    if isinstance(f, (Forall, Exists)):
        return constants(f.body)
    return frozenset()


def predicates(f: Formula) -> dict[str, int]:
    """Predicate symbols with their arities."""
    out: dict[str, int] = {}

    def walk(g: Formula) -> None:
        if isinstance(g, Atom):
            seen = out.get(g.pred)
            if seen is not None and seen != len(g.args):
                raise ValueError(f"predicate {g.pred!r} used with two arities")
            out[g.pred] = len(g.args)
        elif isinstance(g, (And, Or, Implies)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Forall, Exists)):
            walk(g.body)

    walk(f)
    return out


def in_language(f: Formula, preds: frozenset[str] | set[str]) -> bool:
    """True iff every predicate symbol of f is in preds."""
    return set(predicates(f)) <= set(preds)


def quantifier_rank(f: Formula) -> int:
    if isinstance(f, (Atom, Falsum)):
        return 0
    if isinstance(f, (And, Or, Implies)):
        return max(quantifier_rank(f.left), quantifier_rank(f.right))
    if isinstance(f, (Forall, Exists)):
        return 1 + quantifier_rank(f.body)
    raise TypeError(f"not a formula: {f!r}")


def size(f: Formula) -> int:
    """Number of formula constructors (terms do not count)."""
    if isinstance(f, (Atom, Falsum)):
        return 1
    if isinstance(f, (And, Or, Implies)):
        return 1 + size(f.left) + size(f.right)
    if isinstance(f, (Forall, Exists)):
        return 1 + size(f.body)
    raise TypeError(f"not a formula: {f!r}")


def _fresh_name(base: str, avoid: frozenset[str]) -> str:
    # Deterministic fresh-name counter: base1, base2, ...
    root = base.rstrip("0123456789")
    n = 1
    while f"{root}{n}" in avoid or f"{root}{n}" == base:
        n += 1
    return f"{root}{n}"


def substitute(f: Formula, var: str, t: Term) -> Formula:
    """Capture-avoiding substitution of t for free occurrences of var."""
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(t if isinstance(a, Var) and a.name == var else a for a in f.args))
    if isinstance(f, Falsum):
        return f
    if isinstance(f, (And, Or, Implies)):
        return type(f)(substitute(f.left, var, t), substitute(f.right, var, t))
    if isinstance(f, (Forall, Exists)):
        if f.var == var or var not in free_vars(f.body):
            return f
        if isinstance(t, Var) and t.name == f.var:
            avoid = free_vars(f.body) | {var, t.name}
            newvar = _fresh_name(f.var, avoid)
            renamed = substitute(f.body, f.var, Var(newvar))
            return type(f)(newvar, substitute(renamed, var, t))
        return type(f)(f.var, substitute(f.body, var, t))
    raise TypeError(f"not a formula: {f!r}")


def alpha_eq(f: Formula, g: Formula, _env: tuple[tuple[str, str], ...] = ()) -> bool:
    """Structural equality up to renaming of bound variables."""
    if type(f) is not type(g):
        return False
    if isinstance(f, Atom):
        if f.pred != g.pred or len(f.args) != len(g.args):
            return False
        fmap = dict(_env)
        gmap = {b: a for a, b in _env}
        for a, b in zip(f.args, g.args):
            if isinstance(a, Const) or isinstance(b, Const):
                if a != b:
                    return False
            else:
                if fmap.get(a.name, a.name) != b.name or gmap.get(b.name, b.name) != a.name:
                    return False
        return True
    if isinstance(f, Falsum):
        return True
    if isinstance(f, (And, Or, Implies)):
        return alpha_eq(f.left, g.left, _env) and alpha_eq(f.right, g.right, _env)
    if isinstance(f, (Forall, Exists)):
        env = tuple((a, b) for a, b in _env if a != f.var and b != g.var) + ((f.var, g.var),)
        return alpha_eq(f.body, g.body, env)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Random generation (seeded suites)


def random_sentence(
    rng: random.Random,
    signature: Mapping[str, int],
    max_size: int,
    domain: tuple[int, ...] = (),
    max_rank: int | None = None,
) -> Formula:
    """A random closed formula over the signature, with AST size <= max_size.

    Atom arguments are bound variables when available, otherwise domain
    constants; signatures whose predicates all have arity >= 1 need a
    nonempty domain or at least one quantifier above each atom.
    """

    def gen(budget: int, scope: tuple[str, ...], rank: int) -> Formula:
        choices = ["atom"]
        if budget >= 2 and rank != 0:
            choices += ["forall", "exists"]
        if budget >= 3:
            choices += ["and", "or", "implies"]
        kind = rng.choice(choices)
        if kind == "atom":
            opts: list[Formula] = [FALSUM]
            for pred, arity in sorted(signature.items()):
                pools: list[list[Term]] = []
                pool: list[Term] = [Var(v) for v in scope] + [Const(c) for c in domain]
                if arity > 0 and not pool:
                    continue
                opts.append(Atom(pred, tuple(rng.choice(pool) for _ in range(arity))))
            return rng.choice(opts)
        if kind in ("forall", "exists"):
            var = f"x{len(scope) + 1}"
            body = gen(budget - 1, scope + (var,), rank - 1)
            return Forall(var, body) if kind == "forall" else Exists(var, body)
        lsize = rng.randint(1, budget - 2)
        left = gen(lsize, scope, rank)
        right = gen(budget - 1 - lsize, scope, rank)
        ctor = {"and": And, "or": Or, "implies": Implies}[kind]
        return ctor(left, right)

    return gen(max_size, (), -1 if max_rank is None else max_rank)


# ---------------------------------------------------------------------------
# The two bundled sentences used throughout


GAMMA = And(
    Forall("x", Exists("y", And(Atom("P", (Var("y"),)), Implies(Atom("Q", (Var("y"),)), Atom("R", (Var("x"),)))))),
    neg(Forall("x", Atom("R", (Var("x"),)))),
)

DELTA = Implies(
    Forall("x", Implies(Atom("P", (Var("x"),)), Or(Atom("Q", (Var("x"),)), Atom("S")))),
    Atom("S"),
)
