"""Bounded refutation of candidate interpolants between GAMMA and DELTA.

Every sentence over the two unary predicates P and Q, up to a size and rank
bound, is tested on two fronts: a model whose base forces GAMMA but not the
candidate (gamma side), or a model whose base forces the candidate but not
DELTA (delta side).  The designed witnesses are the finite truncations of
the two symbolic models, expanded with R and S by the constructive
realizations; candidates that evade both fall through to exhaustive
enumeration of small models.  `exhausted` is a first-class outcome: nothing
is claimed beyond the bounds searched.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .conditions import check_I, check_J, realize_R, realize_S
from .kripke import (
    GModel,
    TableSpace,
    canonical_bound_vars,
    enumerate_models,
    forces,
    reduct,
    sat_table,
)
from .quasipartition import finite_truncation
from .syntax import (
    DELTA,
    FALSUM,
    GAMMA,
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    Implies,
    Or,
    Var,
    print_formula,
)


# ---------------------------------------------------------------------------
# Formula enumeration


def enumerate_formulas(
    max_size: int,
    max_rank: int,
    free_vars: tuple[str, ...] = (),
    preds: tuple[str, ...] = ("P", "Q"),
) -> list[Formula]:
    """All formulas over unary preds with the given free variables, of AST
    size <= max_size and quantifier rank <= max_rank, deduplicated up to
    commutativity of conjunction/disjunction and renaming of bound
    variables; deterministic order (by size, then print form).

    Bound variables are named x{n+1}, x{n+2}, ... by nesting depth below the
    n given free variables, which makes alpha-equivalent formulas
    structurally equal.
    """
    if any(v != f"x{i+1}" for i, v in enumerate(free_vars)):
        raise ValueError("free variables must be named x1, x2, ...")

    @lru_cache(maxsize=None)
    def level(size: int, depth: int, rank: int) -> tuple[Formula, ...]:
        out: list[Formula] = []
        if size == 1:
            out.append(FALSUM)
            for p in preds:
                for i in range(depth):
                    out.append(Atom(p, (Var(f"x{i+1}"),)))
            return tuple(out)
        if rank > 0:
            var = f"x{depth+1}"
            for body in level(size - 1, depth + 1, rank - 1):
                out.append(Forall(var, body))
                out.append(Exists(var, body))
        for lsize in range(1, size - 1):
            rsize = size - 1 - lsize
            lefts = level(lsize, depth, rank)
            rights = level(rsize, depth, rank)
            for le in lefts:
                for ri in rights:
                    out.append(Implies(le, ri))
            if lsize < rsize:
                for le in lefts:
                    for ri in rights:
                        out.append(And(le, ri))
                        out.append(Or(le, ri))
            elif lsize == rsize:
                for i, le in enumerate(lefts):
                    for ri in rights[i:]:
                        out.append(And(le, ri))
                        out.append(Or(le, ri))
        return tuple(out)

    out: list[Formula] = []
    n = len(free_vars)
    for size in range(1, max_size + 1):
        out.extend(sorted(level(size, n, max_rank), key=print_formula))
    return out


def enumerate_candidates(max_size: int, max_rank: int) -> list[Formula]:
    """All closed candidate interpolants over P and Q within the bounds."""
    return enumerate_formulas(max_size, max_rank, free_vars=())


# ---------------------------------------------------------------------------
# Refutations


@dataclass(frozen=True)
class ForcingFact:
    state: str
    formula: Formula
    value: bool


@dataclass(frozen=True)
class Refutation:
    candidate: Formula
    side: str  # "gamma" or "delta"
    model: GModel
    certificate: tuple[ForcingFact, ...]

    def reverify(self) -> bool:
        return all(forces(self.model, f.state, f.formula) == f.value for f in self.certificate)


EXHAUSTED = "exhausted"


class SweepSoundnessError(RuntimeError):
    pass


def _gamma_portfolio(truncation_specs: Sequence[tuple[int, int]]) -> list[GModel]:
    out = []
    for max_n, depth in truncation_specs:
        out.append(realize_R(finite_truncation(1, max_n, depth)))
    return out


def _delta_portfolio(truncation_specs: Sequence[tuple[int, int]]) -> list[GModel]:
    out = []
    for max_n, depth in truncation_specs:
        m = finite_truncation(2, max_n, depth)
        out.append(realize_S(m, m.base))
    return out


DEFAULT_TRUNCATIONS: tuple[tuple[int, int], ...] = ((9, 0), (9, 1), (9, 2), (12, 1))


class Refuter:
    """Shared search state: the designed witness models plus lazily built
    enumeration pools, with cached satisfaction tables."""

    def __init__(
        self,
        model_bounds: tuple[int, int],
        truncations: Sequence[tuple[int, int]] = DEFAULT_TRUNCATIONS,
        max_rank: int = 2,
    ):
        self.model_bounds = model_bounds
        self.gamma_models = _gamma_portfolio(truncations)
        self.delta_models = _delta_portfolio(truncations)
        self.max_rank = max_rank
        self._spaces: dict[int, TableSpace] = {}
        self._base_bit: dict[int, int] = {}
        self._pool: tuple[list[GModel], list[GModel]] | None = None

    def _space(self, m: GModel) -> TableSpace:
        key = id(m)
        sp = self._spaces.get(key)
        if sp is None:
            scope = tuple(f"x{i+1}" for i in range(self.max_rank))
            sp = TableSpace(m, scope)
            self._spaces[key] = sp
            self._base_bit[key] = sp.state_index[m.base] * sp.E
        return sp

    def forced_at_base(self, m: GModel, f: Formula) -> bool:
        sp = self._space(m)
        return bool((sat_table(sp, canonical_bound_vars(f)) >> self._base_bit[id(m)]) & 1)

    def _enumerated(self, side: str) -> list[GModel]:
        # The fallback pool enumerates P,Q-models once and applies the two
        # constructive expansions.  Candidates only see the P,Q-reduct, a
        # model with R forcing GAMMA has an I-reduct, and a model with S
        # failing DELTA has a J-violating state, so every refutation
        # findable with free R or S interpretations within the bounds is
        # also found through a realized model.
        if self._pool is None:
            gamma_pool: list[GModel] = []
            delta_pool: list[GModel] = []
            ms, md = self.model_bounds
            for m in enumerate_models(ms, md, {"P": 1, "Q": 1}):
                if check_I(m).holds:
                    gamma_pool.append(realize_R(m))
                rep = check_J(m)
                if not rep.holds:
                    delta_pool.append(realize_S(m, rep.failing_state))
            self._pool = (gamma_pool, delta_pool)
        return self._pool[0] if side == "gamma" else self._pool[1]

    def refute_gamma(self, theta: Formula) -> Refutation | None:
        for m in self.gamma_models:
            if not self.forced_at_base(m, theta):
                return _certified(theta, "gamma", m)
        for m in self._enumerated("gamma"):
            if not self.forced_at_base(m, theta):
                return _certified(theta, "gamma", m)
        return None

    def refute_delta(self, theta: Formula) -> Refutation | None:
        for m in self.delta_models:
            if self.forced_at_base(m, theta):
                return _certified(theta, "delta", m)
        for m in self._enumerated("delta"):
            if self.forced_at_base(m, theta):
                return _certified(theta, "delta", m)
        return None


def _certified(theta: Formula, side: str, m: GModel) -> Refutation:
    if side == "gamma":
        certificate = (
            ForcingFact(m.base, GAMMA, True),
            ForcingFact(m.base, theta, False),
        )
    else:
        certificate = (
            ForcingFact(m.base, theta, True),
            ForcingFact(m.base, DELTA, False),
        )
    return Refutation(theta, side, m, certificate)


def refute(
    theta: Formula,
    model_bounds: tuple[int, int],
    refuter: Refuter | None = None,
) -> Refutation | str:
    """First refutation found for the candidate, or `exhausted`.

    Aborts when both sides are refuted over the same P,Q-reduct: that would
    mean the candidate is both forced and not forced at the same base, or a
    model forcing GAMMA while failing DELTA, either of which falsifies the
    machinery and must never be reported as a result.
    """
    from .syntax import free_vars, in_language, quantifier_rank

    if free_vars(theta):
        raise ValueError("candidate must be a sentence")
    if not in_language(theta, {"P", "Q"}):
        raise ValueError("candidate must use only P and Q")
    r = refuter or Refuter(model_bounds, max_rank=max(2, quantifier_rank(theta)))
    gamma_side = r.refute_gamma(theta)
    delta_side = r.refute_delta(theta)
    if gamma_side and delta_side:
        g_core = reduct(gamma_side.model, ("P", "Q")).key()
        d_core = reduct(delta_side.model, ("P", "Q")).key()
        if g_core == d_core:
            raise SweepSoundnessError(
                f"candidate {print_formula(theta)} refuted on both sides over one model"
            )
    return gamma_side or delta_side or EXHAUSTED


@dataclass(frozen=True)
class SweepReport:
    bounds: tuple[int, int, int, int]  # max_size, max_rank, max_states, max_domain
    results: tuple[tuple[Formula, Refutation | str], ...]

    @property
    def survivors(self) -> tuple[Formula, ...]:
        return tuple(f for f, r in self.results if r == EXHAUSTED)

    def counts(self) -> dict[str, int]:
        out = {"candidates": len(self.results), "gamma": 0, "delta": 0, EXHAUSTED: 0}
        for _, r in self.results:
            if r == EXHAUSTED:
                out[EXHAUSTED] += 1
            else:
                out[r.side] += 1
        return out

    def render(self) -> str:
        lines = [
            "# interpolant refutation sweep",
            f"# bounds: size<={self.bounds[0]} rank<={self.bounds[1]} "
            f"models<=({self.bounds[2]},{self.bounds[3]})",
        ]
        for f, r in self.results:
            if r == EXHAUSTED:
                lines.append(f"EXHAUSTED  {print_formula(f)}")
            else:
                lines.append(f"refuted[{r.side}]  {print_formula(f)}")
        c = self.counts()
        lines.append(
            f"# total {c['candidates']}  gamma {c['gamma']}  delta {c['delta']}  "
            f"exhausted {c[EXHAUSTED]}"
        )
        return "\n".join(lines) + "\n"


def refutation_sweep(
    max_size: int,
    max_rank: int,
    model_bounds: tuple[int, int],
    truncations: Sequence[tuple[int, int]] = DEFAULT_TRUNCATIONS,
) -> SweepReport:
    """Refute every candidate interpolant within the bounds; deterministic."""
    refuter = Refuter(model_bounds, truncations=truncations, max_rank=max_rank)
    results = []
    for theta in enumerate_candidates(max_size, max_rank):
        results.append((theta, refute(theta, model_bounds, refuter)))
    return SweepReport((max_size, max_rank, *model_bounds), tuple(results))
