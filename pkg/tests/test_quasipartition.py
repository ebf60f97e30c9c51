import random

import pytest

from cdkit.conditions import check_I, check_J
from cdkit.epset import EMPTY, NATURALS, finite, progression
from cdkit.kripke import validate
from cdkit.quasipartition import (
    V,
    W,
    QuasiPartition,
    TruncationError,
    ZQuery,
    atom_forces,
    finite_truncation,
    format_quasipartition,
    in_state_space,
    is_quasipartition,
    pair_map_is_bijection,
    parse_quasipartition,
    sqsubseteq,
    truncation_states,
    witness_left_extension,
    witness_right_extension,
    witness_successor,
    z_related,
    generator_moves,
)


def random_state(rng, model, moves=2):
    p = V if model == 1 else W
    for _ in range(moves):
        options = generator_moves(p, model, rng.randint(6, 15))
        if not options:
            break
        p = rng.choice(options)
    return p


def random_related_tuples(rng, t, u, k):
    # Build tuples position by position so the pairing is a bijection and
    # the component conditions hold by construction.
    ds, es = [], []
    for _ in range(k):
        if ds and rng.random() < 0.25:
            i = rng.randrange(len(ds))
            ds.append(ds[i])
            es.append(es[i])
            continue
        comp = rng.choice(["a", "b", "c"])
        src = getattr(t, comp)
        if src.is_empty():
            comp = "a"
            src = t.a
        d = _fresh(src, ds)
        if comp == "a":
            e = _fresh(u.a, es)
        elif comp == "b":
            e = _fresh(u.a if rng.random() < 0.5 else u.b, es)
            if e is None:
                e = _fresh(u.a, es)
        else:
            e = _fresh(rng.choice([u.a, u.b, u.c]), es)
            if e is None:
                e = _fresh(u.c, es)
        ds.append(d)
        es.append(e)
    return tuple(ds), tuple(es)


def _fresh(s, used):
    t = s.remove(used)
    return t.least()


def test_base_points_are_quasipartitions():
    assert is_quasipartition(V.a, V.b, V.c)
    assert is_quasipartition(W.a, W.b, W.c)
    assert is_quasipartition(progression(3, 0), progression(3, 1), progression(3, 2))
    assert not is_quasipartition(NATURALS, EMPTY, EMPTY)
    # b finite and nonempty is not allowed
    assert not is_quasipartition(progression(2, 0), finite([1]), progression(2, 1).remove([1]))


def test_sqsubseteq():
    assert sqsubseteq(V, V)
    assert not sqsubseteq(V, W)  # 3 is in V.a but not in W.a
    bigger = QuasiPartition(W.a.union(finite([1])), EMPTY, W.c.remove([1]))
    assert sqsubseteq(W, bigger)
    rng = random.Random(41)
    for _ in range(300):
        p = random_state(rng, rng.choice([1, 2]))
        q = random_state(rng, rng.choice([1, 2]))
        r = random_state(rng, rng.choice([1, 2]))
        assert sqsubseteq(p, p)
        if sqsubseteq(p, q) and sqsubseteq(q, r):
            assert sqsubseteq(p, r)


def test_in_state_space():
    assert in_state_space(V, 1)
    assert in_state_space(W, 2)
    assert not in_state_space(W, 1)  # empty b cannot meet 3N+1 infinitely
    assert not in_state_space(V, 2)  # 3 is in V.a but not above W


def test_atom_forces():
    assert atom_forces(V, "P", 3)
    assert atom_forces(V, "Q", 3)
    assert atom_forces(V, "P", 1)  # 1 is in 3N+1
    assert not atom_forces(V, "Q", 1)
    assert not atom_forces(W, "P", 1)  # 1 is in W's third component
    with pytest.raises(ValueError):
        atom_forces(V, "R", 1)


def test_atom_monotonicity():
    rng = random.Random(43)
    for _ in range(300):
        model = rng.choice([1, 2])
        p = random_state(rng, model, moves=1)
        q = random_state(rng, model, moves=3)
        if not sqsubseteq(p, q):
            continue
        for n in range(1, 20):
            for pred in ("P", "Q"):
                if atom_forces(p, pred, n):
                    assert atom_forces(q, pred, n)


def test_model1_states_have_base_p_not_q_witness():
    # Every state keeps infinitely many of 3N+1 in its middle component, so
    # a base-P element that the state does not force into Q always exists.
    rng = random.Random(47)
    for _ in range(300):
        u = random_state(rng, 1)
        k = u.b.intersect(V.b).least()
        assert k is not None
        assert atom_forces(V, "P", k)
        assert not atom_forces(u, "Q", k)


def test_model2_base_forces_p_into_q():
    assert W.b.is_empty()
    for a in range(1, 200):
        if atom_forces(W, "P", a):
            assert atom_forces(W, "Q", a)


def test_bijection_pairing():
    assert pair_map_is_bijection((1, 1, 2, 3, 2), (4, 4, 5, 6, 5))
    assert not pair_map_is_bijection((1, 1), (4, 5))
    assert not pair_map_is_bijection((1, 2), (4, 4))
    assert pair_map_is_bijection((), ())


def test_z_related_base_points():
    assert z_related(ZQuery(V, (), W, (), 1))
    assert z_related(ZQuery(W, (), V, (), 2))


def test_z_related_components():
    # 3 is in V.a; 4 is in W.a: allowed. 1 is in V.b; 1 is in W.c: not allowed.
    assert z_related(ZQuery(V, (3,), W, (4,), 1))
    assert not z_related(ZQuery(V, (1,), W, (1,), 1))
    assert z_related(ZQuery(V, (1,), W, (2,), 1))  # b into a is allowed
    assert z_related(ZQuery(V, (2,), W, (1,), 1))  # c side unconstrained


def test_witness_successor_base_case():
    res = witness_successor(V, (), W, (), W, direction=1)
    assert res.ok
    assert sqsubseteq(V, res.witness)


def test_witness_successor_empty_b_case():
    res = witness_successor(W, (), V, (), V, direction=2)
    assert res.ok
    assert res.witness.a.is_infinite()
    assert res.witness.b.is_infinite()
    assert res.witness.c.is_infinite()


def test_witness_successor_requires_relation():
    with pytest.raises(ValueError):
        witness_successor(V, (1,), W, (1,), W, direction=1)


def test_witness_successor_randomized():
    rng = random.Random(53)
    done = 0
    while done < 300:
        i = rng.choice([1, 2])
        j = 3 - i
        t = random_state(rng, i)
        u = random_state(rng, j, moves=1)
        v = random_state(rng, j, moves=3)
        if not sqsubseteq(u, v):
            continue
        ds, es = random_related_tuples(rng, t, u, rng.randint(0, 4))
        q = ZQuery(t, ds, u, es, i)
        if not z_related(q):
            continue
        done += 1
        res = witness_successor(t, ds, u, es, v, direction=i)
        assert res.ok, (res.checks, str(t), ds, str(u), es, str(v))


def test_witness_left_extension():
    # Existing position reuses its partner.
    assert witness_left_extension(V, (3,), W, (4,), 3, direction=1) == 4
    # Fresh element pairs with the least fresh element of u's first component.
    g = witness_left_extension(V, (3,), W, (4,), 5, direction=1)
    assert g == 2  # least of W.a minus {4}
    assert z_related(ZQuery(V, (3, 5), W, (4, g), 1))
    # Empty tuples: least of the first component.
    assert witness_left_extension(V, (), W, (), 7, direction=1) == 2


def test_witness_right_extension():
    assert witness_right_extension(V, (3,), W, (4,), 4, direction=1) == 3
    f = witness_right_extension(V, (3,), W, (4,), 6, direction=1)
    assert f == 2  # least of V.c minus {3}
    assert z_related(ZQuery(V, (3, f), W, (4, 6), 1))
    assert witness_right_extension(V, (), W, (), 2, direction=1) == 2


def test_witness_extensions_randomized():
    rng = random.Random(59)
    done = 0
    while done < 300:
        i = rng.choice([1, 2])
        t = random_state(rng, i)
        u = random_state(rng, 3 - i)
        ds, es = random_related_tuples(rng, t, u, rng.randint(0, 3))
        q = ZQuery(t, ds, u, es, i)
        if not z_related(q):
            continue
        done += 1
        f = rng.randint(1, 12)
        g = witness_left_extension(t, ds, u, es, f, direction=i)
        assert z_related(ZQuery(t, ds + (f,), u, es + (g,), i))
        g2 = rng.randint(1, 12)
        if g2 in es or not any(e == g2 for e in es):
            f2 = witness_right_extension(t, ds, u, es, g2, direction=i)
            assert z_related(ZQuery(t, ds + (f2,), u, es + (g2,), i))


def test_two_way_relation_makes_components_match():
    # When both directions hold, a-elements pair with a-elements and
    # b-elements with b-elements.
    rng = random.Random(61)
    done = 0
    while done < 200:
        i = rng.choice([1, 2])
        t = random_state(rng, i)
        u = random_state(rng, 3 - i)
        ds, es = random_related_tuples(rng, t, u, rng.randint(1, 4))
        if not (
            z_related(ZQuery(t, ds, u, es, i)) and z_related(ZQuery(u, es, t, ds, 3 - i))
        ):
            continue
        done += 1
        for d, e in zip(ds, es):
            assert t.a.member(d) == u.a.member(e)
            assert t.b.member(d) == u.b.member(e)


def test_literal_roundtrip():
    p = parse_quasipartition("(3N; 3N+1; 3N+2)")
    assert p == V
    assert parse_quasipartition(format_quasipartition(W)) == W
    with pytest.raises(ValueError):
        parse_quasipartition("(3N; 3N+1)")


def test_finite_truncation_model2_depth0():
    m = finite_truncation(2, 6, 0)
    assert len(m.states) == 1
    assert m.interp["P"] == m.interp["Q"] == frozenset({(m.base, 2), (m.base, 4), (m.base, 6)})
    assert not check_J(m).holds
    assert validate(m) == []


def test_finite_truncation_model1():
    m = finite_truncation(1, 9, 1)
    assert validate(m) == []
    assert check_I(m).holds
    assert len(m.states) > 1


def test_finite_truncation_bounds_error():
    with pytest.raises(TruncationError):
        finite_truncation(1, 5, 0)


def test_truncation_states_deterministic():
    a = truncation_states(1, 9, 2)
    b = truncation_states(1, 9, 2)
    assert a == b
