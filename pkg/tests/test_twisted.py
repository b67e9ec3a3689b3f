import math

import numpy as np
import pytest

from oracles import AMP_PI2_2, RHO_PI2_2, SYSTOLE, amplitude_mp, rho_mp
from twistlab.hyperbolic import HPoint, MobiusTransform, UnitTangent, distance
from twistlab.twisted import (
    DegenerateIntersectionWarning,
    ShootingError,
    TwistedOrbit,
    amplitude,
    connecting_arcs,
    jacobian_singular_values,
    rho,
    shoot_twisted_arc,
    transversal_index,
    twisted_residual,
)


def _conjugated(ell, rng):
    a = rng.normal(size=(2, 2))
    if np.linalg.det(a) < 0:
        a[0] *= -1.0
    h = MobiusTransform.from_array(a)
    return h @ MobiusTransform.translation(ell) @ h.inverse()


def test_frozen_values():
    assert rho(math.pi / 2, 2.0) == pytest.approx(RHO_PI2_2, abs=1e-12)
    assert amplitude(math.pi / 2, 2.0) == pytest.approx(AMP_PI2_2, abs=1e-12)
    assert float(rho_mp(math.pi / 2, 2)) == pytest.approx(RHO_PI2_2, abs=1e-15)
    assert float(amplitude_mp(math.pi / 2, 2)) == pytest.approx(AMP_PI2_2, abs=1e-15)


@pytest.mark.parametrize("ell", [0.5, 1.0, 3.0571420])
def test_rho_identity_case(ell):
    assert rho(0.0, ell) == ell
    assert amplitude(0.0, ell) == 1.0


def test_rho_against_mpmath_grid():
    for theta in np.linspace(-3.0, 3.0, 10):
        for ell in np.linspace(0.1, 20.0, 10):
            r = rho(theta, ell)
            assert r == pytest.approx(float(rho_mp(theta, ell)), rel=1e-14)
            lhs = math.cosh(r / 2) * math.cos(theta / 2)
            assert lhs == pytest.approx(math.cosh(ell / 2), rel=1e-12)
            assert amplitude(theta, ell) == pytest.approx(float(amplitude_mp(theta, ell)), rel=1e-13)


def test_rho_asymptotics():
    assert abs(rho(1.0, 30.0) - (30.0 - 2.0 * math.log(math.cos(0.5)))) < 1e-6
    assert amplitude(1.0, 30.0) - 1.0 < 1e-6


@pytest.mark.parametrize("theta", [math.pi, -math.pi, 4.0])
def test_theta_out_of_range(theta):
    with pytest.raises(ValueError):
        rho(theta, 1.0)
    with pytest.raises(ValueError):
        amplitude(theta, 1.0)
    with pytest.raises(ValueError):
        shoot_twisted_arc(MobiusTransform.translation(1.0), theta)


def test_shoot_closed_geodesic():
    o = shoot_twisted_arc(MobiusTransform.translation(2.0), 0.0)
    assert o.t == pytest.approx(2.0, abs=1e-12)
    assert o.z.base.x == pytest.approx(0.0, abs=1e-12)
    assert o.z.psi == pytest.approx(math.pi / 2, abs=1e-12)
    assert transversal_index(o) > 0.0


def test_shoot_pi_half():
    o = shoot_twisted_arc(MobiusTransform.translation(2.0), math.pi / 2)
    assert abs(o.t - RHO_PI2_2) < 1e-8
    assert float(np.linalg.norm(twisted_residual(o.t, o.z, o.g, o.theta))) < 1e-10
    assert transversal_index(o) > 0.0


def test_shoot_random_batch():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        theta, ell = rng.uniform(-2.5, 2.5), rng.uniform(0.5, 6.0)
        o = shoot_twisted_arc(_conjugated(ell, rng), theta)
        assert abs(o.t - rho(theta, ell)) < 1e-8
        assert float(np.linalg.norm(twisted_residual(o.t, o.z, o.g, o.theta))) < 1e-10


def test_shoot_symmetric_in_theta():
    rng = np.random.default_rng(5)
    for _ in range(5):
        theta, ell = rng.uniform(0.1, 2.5), rng.uniform(0.5, 6.0)
        g = _conjugated(ell, rng)
        assert abs(shoot_twisted_arc(g, theta).t - shoot_twisted_arc(g, -theta).t) < 1e-10


def test_index_step_consistency():
    rng = np.random.default_rng(9)
    for _ in range(5):
        o = shoot_twisted_arc(_conjugated(rng.uniform(0.5, 4), rng), rng.uniform(-2, 2))
        a = jacobian_singular_values(o, 1e-5)
        b = jacobian_singular_values(o, 1e-4)
        assert np.abs(a - b).max() <= 1e-4 * a.max()


def test_degenerate_warning(monkeypatch):
    import twistlab.twisted as tw

    o = shoot_twisted_arc(MobiusTransform.translation(2.0), 0.5)
    monkeypatch.setattr(tw._Gauge, "jacobian", lambda self, u, th, h: np.diag([1.0, 1.0, 1e-9]))
    with pytest.warns(DegenerateIntersectionWarning):
        assert tw.transversal_index(o) < 1e-6


def test_orbit_validation():
    v = UnitTangent(HPoint(0.0, 1.0), 0.0)
    with pytest.raises(ValueError):
        TwistedOrbit(0.0, v, MobiusTransform.translation(1.0), 0.0)
    bad = TwistedOrbit(1.0, v, MobiusTransform.translation(1.0), 0.3)
    with pytest.raises(ValueError):
        transversal_index(bad)


def test_non_convergence_reported(monkeypatch):
    import twistlab.twisted as tw

    monkeypatch.setattr(tw, "_newton", lambda gauge, u, theta, max_steps=50: (u, 1.0, max_steps))
    with pytest.raises(ShootingError) as info:
        tw.shoot_twisted_arc(MobiusTransform.translation(1.0), 0.3)
    assert info.value.residual == 1.0


# ------------------------------------------------------------------ arcs

X = HPoint(0.1, 1.05)
Y = HPoint(-0.15, 0.9)


def test_arcs_short_cutoff(bolza):
    assert connecting_arcs(X, X, bolza, 1.0) == []
    arcs = connecting_arcs(X, Y, bolza, 1.0)
    assert len(arcs) == 1 and arcs[0].word == ""
    assert arcs[0].length == pytest.approx(distance(X, Y), abs=1e-12)


def test_arcs_invariants(bolza):
    arcs = connecting_arcs(X, Y, bolza, 7.0)
    lengths = [a.length for a in arcs]
    assert lengths == sorted(lengths)
    for a in arcs:
        assert a.length == pytest.approx(distance(X, a.g.apply(Y)), abs=1e-12)
    counts = [len([t for t in lengths if t <= L]) for L in np.linspace(0, 7, 30)]
    assert counts == sorted(counts)
    # everything shorter than the systole-type bound of the closed loop from X
    loops = connecting_arcs(X, X, bolza, SYSTOLE - 1e-6)
    assert all(a.length <= SYSTOLE for a in loops)


def test_arcs_dual_strategy(bolza):
    a = connecting_arcs(X, X, bolza, 8.0, strategy="word-bfs")
    b = connecting_arcs(X, X, bolza, 8.0, strategy="matrix-ball")
    assert len(a) == len(b)
    assert np.abs(np.array([x.length for x in a]) - np.array([x.length for x in b])).max() < 1e-9


def test_arcs_deck_invariance(bolza):
    h = MobiusTransform.from_entries(1.3, 0.4, -0.2, 0.8)
    moved = bolza.conjugated(h)
    a = connecting_arcs(X, Y, bolza, 6.0)
    b = connecting_arcs(h.apply(X), h.apply(Y), moved, 6.0)
    assert len(a) == len(b)
    assert np.abs(np.array([x.length for x in a]) - np.array([x.length for x in b])).max() < 1e-9
