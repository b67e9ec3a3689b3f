import math

import numpy as np
import pytest

from oracles import transvection_by_pairing
from twistlab.lefschetz import (
    H1Action,
    MappingClass,
    ResidueRefusal,
    curve_class,
    integrand_spread,
    iota_X_pushforward_alpha,
    lefschetz_number,
    residue_prediction,
    sample_tangents,
    symplectic_form,
    twist_action,
)


@pytest.mark.parametrize("genus", [2, 3, 4])
def test_basic_numbers(genus):
    assert lefschetz_number(H1Action.identity(genus)) == 2 - 2 * genus
    assert lefschetz_number(H1Action.hyperelliptic(genus)) == 2 * genus + 2
    for name in "ab":
        for i in range(1, genus + 1):
            t = twist_action(curve_class(name, i, genus))
            assert lefschetz_number(t) == 2 - 2 * genus
            assert np.array_equal(t.matrix, np.array(transvection_by_pairing(list(curve_class(name, i, genus)), genus)))


def test_transvection_oracle_nonstandard_curve():
    c = [1, -1, 0, 2]
    t = twist_action(c)
    assert np.array_equal(t.matrix, np.array(transvection_by_pairing(c, 2)))
    n = t.matrix - np.eye(4, dtype=int)
    assert not (n @ n).any()


def test_inverse_and_powers():
    g = 3
    m = MappingClass.parse("a1,b2^-2,a3^3,b1").action(g)
    assert m @ m.inverse() == H1Action.identity(g)
    assert m.power(3) == m @ m @ m
    assert m.power(-2) == m.inverse() @ m.inverse()
    assert m.power(0) == H1Action.identity(g)
    t = twist_action(curve_class("a", 1, g))
    n = t.matrix - np.eye(2 * g, dtype=int)
    assert np.array_equal(t.power(5).matrix, np.eye(2 * g, dtype=int) + 5 * n)
    assert t.power(5).matrix[0, g] == -5


def test_commuting_twists():
    g = 3
    ta = [twist_action(curve_class("a", i, g)) for i in (1, 2, 3)]
    tb = [twist_action(curve_class("b", i, g)) for i in (1, 2, 3)]
    for i in range(g):
        for j in range(g):
            assert ta[i] @ ta[j] == ta[j] @ ta[i]
            if i != j:
                assert ta[i] @ tb[j] == tb[j] @ ta[i]
    assert ta[0] @ tb[0] != tb[0] @ ta[0]


def test_symplectic_and_class_function():
    g = 2
    j = symplectic_form(g)
    m = MappingClass.parse("a1,b1,a2^2,b2^-1").action(g)
    h = MappingClass.parse("b1^3,a2").action(g)
    assert np.array_equal(m.matrix.T @ j @ m.matrix, j)
    assert lefschetz_number(h @ m @ h.inverse()) == lefschetz_number(m)


def test_validation():
    with pytest.raises(ValueError):
        H1Action(2, np.eye(4) * 2)
    with pytest.raises(ValueError):
        H1Action(2, np.eye(4) + 0.5)
    with pytest.raises(ValueError):
        H1Action(1, np.eye(2))
    with pytest.raises(ValueError):
        twist_action([0, 0, 0, 0])
    with pytest.raises(ValueError):
        curve_class("a", 3, 2)
    with pytest.raises(ValueError):
        H1Action.identity(2) @ H1Action.identity(3)


def test_parser():
    assert MappingClass.parse("") == MappingClass(())
    mc = MappingClass.parse(" a1 , b2^-3,a2^2 ")
    assert mc.word == (("a", 1, 1), ("b", 2, -3), ("a", 2, 2))
    assert str(mc) == "a1,b2^-3,a2^2"
    assert MappingClass.parse(str(mc)) == mc
    for bad in ("c1", "a", "a1^", "a1,,b1", "a1^0", "a0", "a1 b1"):
        with pytest.raises(ValueError):
            MappingClass.parse(bad)


def test_left_to_right_order():
    g = 2
    a1, b1 = (twist_action(curve_class(n, 1, g)) for n in "ab")
    assert MappingClass.parse("a1,b1").action(g) == b1 @ a1


def test_integrand_pointwise():
    for theta in (0.0, math.pi / 4, math.pi / 2, 1.0, 2.9):
        for v in sample_tangents(100, seed=3):
            assert abs(iota_X_pushforward_alpha(theta, v) - math.cos(theta)) < 1e-8
    spread, vals = integrand_spread(1.0)
    assert spread < 1e-8 and len(vals) == 100


@pytest.mark.parametrize("theta", [0.0, math.pi / 4, math.pi / 2, 1.0])
def test_residue_targets(theta):
    assert residue_prediction(H1Action.identity(2), theta) == (1 - 2 * 2) + math.cos(theta)
    assert residue_prediction(H1Action.identity(2), 0.0) == -2.0


def test_residue_refusal(monkeypatch):
    import twistlab.lefschetz as lf

    monkeypatch.setattr(lf, "integrand_spread", lambda th, n=100, seed=0: (1e-3, np.array([0.0, 1e-3])))
    with pytest.raises(ResidueRefusal):
        lf.residue_prediction(H1Action.identity(2), 0.5)
