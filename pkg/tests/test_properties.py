import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import transvection_by_pairing
from twistlab.hyperbolic import (
    HPoint,
    MobiusTransform,
    UnitTangent,
    distance,
    flow,
    rotate_fiber,
    tangent_residual,
    translation_length,
)
from twistlab.lefschetz import H1Action, MappingClass, lefschetz_number, symplectic_form, twist_action
from twistlab.series import decomposition_remainder, reference_term
from twistlab.transversality import CollarPoint, TwistProfile, conjugated_jet, frame_matrix
from twistlab.twisted import amplitude, rho

coord = st.floats(-3.0, 3.0)
height = st.floats(0.2, 5.0)
angle = st.floats(0.0, 2 * math.pi, exclude_max=True)
theta = st.floats(-3.0, 3.0)
ell = st.floats(0.1, 20.0)
points = st.builds(HPoint, coord, height)
tangents = st.builds(UnitTangent, points, angle)


@st.composite
def mobius(draw):
    a, b, c = draw(st.floats(0.3, 3.0)), draw(st.floats(-2.0, 2.0)), draw(st.floats(-2.0, 2.0))
    return MobiusTransform.from_entries(a, b, c, (1.0 + b * c) / a)


@given(mobius(), mobius(), mobius())
def test_group_law(g, h, k):
    lhs, rhs = (g @ h) @ k, g @ (h @ k)
    assert lhs.isclose(rhs, tol=1e-9 * max(1.0, np.abs(lhs.as_array()).max()))
    m = g @ h
    a, b, c, d = m.entries()
    assert abs(a * d - b * c - 1.0) < 1e-12
    assert (g @ g.inverse()).isclose(MobiusTransform.identity(), tol=1e-9)


@given(mobius(), points, points)
def test_isometry_invariance(g, p, q):
    d = distance(p, q)
    assert abs(distance(g.apply(p), g.apply(q)) - d) <= 1e-8 * max(1.0, d)
    assert abs(distance(q, p) - d) <= 1e-12 * max(1.0, d)


@given(tangents, st.floats(-3, 3), st.floats(-3, 3))
def test_flow_group_law(v, s, t):
    assert np.abs(tangent_residual(flow(flow(v, s), t), flow(v, s + t))).max() < 1e-9
    assert abs(distance(v.base, flow(v, t).base) - abs(t)) < 1e-9


@given(tangents, angle, angle)
def test_rotation_commutes_with_composition(v, a, b):
    assert np.abs(tangent_residual(rotate_fiber(rotate_fiber(v, a), b), rotate_fiber(v, a + b))).max() < 1e-12


@given(st.floats(0.1, 8.0), st.integers(1, 4), mobius())
def test_translation_length_invariants(length, k, h):
    g = MobiusTransform.translation(length)
    conj = h @ g @ h.inverse()
    assert abs(translation_length(conj) - length) < 1e-7 * max(1.0, np.abs(h.as_array()).max() ** 4)
    assert abs(translation_length(g.power(k)) - k * length) < 1e-9 * k * length


@given(theta, ell)
def test_rho_invariants(th, L):
    r = rho(th, L)
    assert r >= L
    assert r == rho(-th, L)
    assert amplitude(th, L) == amplitude(-th, L) >= 1.0 - 1e-15
    assert abs(math.cosh(r / 2) * math.cos(th / 2) - math.cosh(L / 2)) <= 1e-12 * math.cosh(L / 2)


@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), ell)
def test_rho_monotone_in_theta(a, b, L):
    assume(a < b)
    assert rho(a, L) <= rho(b, L)


@given(st.floats(-3.0, 3.0), st.floats(1.2, 4.0), st.floats(1.0, 3.0))
def test_remainder_is_term_minus_expansion(th, s, L):
    term = reference_term(th, s, L)
    c2, s2 = math.cos(th / 2) ** 2, math.sin(th / 2) ** 2
    direct = term - math.exp(-s * L) * c2**s * (1 + 2 * s2 * (1 - s) * math.exp(-L))
    rem = decomposition_remainder(th, s, L)
    assert abs(rem - direct) <= 1e-13 * abs(term)
    assert decomposition_remainder(-th, s, L) == rem


@st.composite
def mapping_words(draw):
    n = draw(st.integers(0, 6))
    toks = [f"{draw(st.sampled_from('ab'))}{draw(st.integers(1, 3))}^{draw(st.sampled_from([-2, -1, 1, 3]))}"
            for _ in range(n)]
    return ",".join(toks)


@given(mapping_words(), mapping_words())
def test_mapping_class_actions(w1, w2):
    g = 3
    j = symplectic_form(g)
    m, h = MappingClass.parse(w1).action(g), MappingClass.parse(w2).action(g)
    assert np.array_equal(m.matrix.T @ j @ m.matrix, j)
    assert lefschetz_number(h @ m @ h.inverse()) == lefschetz_number(m)
    assert (m @ h).inverse() == h.inverse() @ m.inverse()
    assert MappingClass.parse(str(MappingClass.parse(w1))) == MappingClass.parse(w1)


@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_transvection_matches_pairing(c):
    assume(any(c))
    t = twist_action(c)
    assert np.array_equal(t.matrix, np.array(transvection_by_pairing(c, 2)))
    assert lefschetz_number(t) == -2
    assert t.inverse() @ t == H1Action.identity(2)


@given(st.floats(0, 1), st.floats(-2, 2), angle, st.floats(0.0, 1.0))
def test_jet_block_structure(tau, r, th, L):
    j = conjugated_jet(CollarPoint(tau, r, th), TwistProfile(L)).matrix
    assert max(abs(j[1, 0]), abs(j[0, 2]), abs(j[1, 2])) < 1e-8
    assert abs(np.linalg.det(frame_matrix(r, th)) - 1.0 / math.cosh(r)) < 1e-12
