import random

import pytest

from cdkit.conditions import (
    SignatureError,
    brute_second_order,
    check_I,
    check_J,
    readings_differ,
    realize_R,
    realize_S,
)
from cdkit.kripke import (
    GModel,
    ModelError,
    enumerate_models,
    forces,
    random_model,
    valid_at_base,
    validate,
)
from cdkit.syntax import DELTA, GAMMA, Implies, parse


def one_state_pq(p_elems, q_elems, domain=(1,)):
    return GModel(
        ("w",),
        {("w", "w")},
        "w",
        domain,
        {"P": frozenset(("w", d) for d in p_elems), "Q": frozenset(("w", d) for d in q_elems)},
        {"P": 1, "Q": 1},
    )


def test_check_i_basic():
    m = one_state_pq((1,), ())
    rep = check_I(m)
    assert rep.holds and rep.witnesses == {"w": 1}
    m2 = one_state_pq((1,), (1,))
    rep2 = check_I(m2)
    assert not rep2.holds and rep2.failing_state == "w"


def test_check_j_basic():
    assert check_J(one_state_pq((1,), ())).holds
    # P contained in Q pointwise at the base: fails at the base
    rep = check_J(one_state_pq((1,), (1,)))
    assert not rep.holds and rep.failing_state == "w"


def test_signature_error():
    m = GModel(("w",), {("w", "w")}, "w", (1,), {"P": frozenset()}, {"P": 1})
    with pytest.raises(SignatureError):
        check_I(m)


def test_check_i_j_against_direct_evaluation_exhaustive():
    # Truth-table the two conditions on all small models against a direct
    # quantifier unfold.
    for m in enumerate_models(2, 2, {"P": 1, "Q": 1}):
        p, q = m.interp["P"], m.interp["Q"]
        want_i = all(
            any((m.base, a) in p and (w, a) not in q for a in m.domain) for w in m.states
        )
        want_j = all(
            any((w, a) in p and (w, a) not in q for a in m.domain) for w in m.states
        )
        assert check_I(m).holds == want_i
        assert check_J(m).holds == want_j


def test_realize_r_one_state():
    m = one_state_pq((1,), ())
    m2 = realize_R(m)
    assert validate(m2) == []
    assert forces(m2, "w", parse("R(1)")) is False  # Q(f(1)) never holds
    assert valid_at_base(m2, GAMMA) is True


def test_realize_r_forces_gamma_exhaustively():
    for m in enumerate_models(3, 2, {"P": 1, "Q": 1}):
        if check_I(m).holds:
            m2 = realize_R(m)
            assert validate(m2) == []
            assert valid_at_base(m2, GAMMA) is True


def test_realize_r_requires_i():
    with pytest.raises(ModelError):
        realize_R(one_state_pq((1,), (1,)))


def test_realize_s_two_state_chain():
    order = {("w", "w"), ("u", "u"), ("w", "u")}
    m = GModel(
        ("w", "u"),
        order,
        "w",
        (1,),
        {"P": frozenset({("w", 1), ("u", 1)}), "Q": frozenset({("w", 1), ("u", 1)})},
        {"P": 1, "Q": 1},
    )
    m2 = realize_S(m, "w")
    assert m2.interp["S"] == {("u",)}
    assert forces(m2, "w", parse("forall x. (P(x) -> (Q(x) | S))")) is True
    assert forces(m2, "w", parse("S")) is False
    assert valid_at_base(m2, DELTA) is False


def test_realize_s_one_state():
    m = one_state_pq((1,), (1,))
    m2 = realize_S(m, "w")
    assert m2.interp["S"] == frozenset()
    assert forces(m2, "w", parse("forall x. (P(x) -> (Q(x) | S))")) is True
    assert valid_at_base(m2, DELTA) is False


def test_realize_s_rejects_non_violation():
    with pytest.raises(ModelError):
        realize_S(one_state_pq((1,), ()), "w")


def test_realize_s_breaks_delta_exhaustively():
    for m in enumerate_models(3, 2, {"P": 1, "Q": 1}):
        rep = check_J(m)
        if not rep.holds:
            m2 = realize_S(m, rep.failing_state)
            assert validate(m2) == []
            assert valid_at_base(m2, DELTA) is False
            assert forces(
                m2, rep.failing_state, parse("forall x. (P(x) -> (Q(x) | S))")
            )
            assert not forces(m2, rep.failing_state, parse("S"))


def test_readings_differ_flag():
    order = {("w", "w"), ("u", "u"), ("w", "u"), ("u", "w")}
    m = GModel(("w", "u"), order, "w", (1,), {"P": frozenset(), "Q": frozenset()}, {"P": 1, "Q": 1})
    assert readings_differ(m, "w") is True
    assert readings_differ(one_state_pq((), ()), "w") is False


def test_brute_second_order_matches_conditions():
    # The two second-order quantifications coincide with the first-order
    # conditions; checked exhaustively on small models.
    for m in enumerate_models(2, 2, {"P": 1, "Q": 1}):
        exists_r, forall_s = brute_second_order(m)
        assert exists_r == check_I(m).holds
        assert forall_s == check_J(m).holds
        assert (not exists_r) or forall_s  # the second-order implication


def test_gamma_delta_random_models():
    rng = random.Random(13)
    imp = Implies(GAMMA, DELTA)
    for _ in range(300):
        m = random_model(rng, 4, 3, {"P": 1, "Q": 1, "R": 1, "S": 0})
        assert valid_at_base(m, imp) is True
