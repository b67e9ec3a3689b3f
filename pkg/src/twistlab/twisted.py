"""Geodesic loops with a prescribed angle defect.

For ``F = R_theta`` a twisted orbit is a pair ``(t, z)`` with
``flow(z, t) = g . R_theta(z)`` in the universal cover, ``g`` a deck element.
Along the closed geodesic of ``g`` (length ``ell``) these loops have length
``rho(theta, ell)``; :func:`shoot_twisted_arc` finds them by Newton's method
without using that law.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .hyperbolic import (
    HPoint,
    MobiusTransform,
    UnitTangent,
    flow,
    normalizing_conjugator,
    rotate_fiber,
    tangent_residual,
    translation_length,
)
from .spectrum import DEFAULT_CAP, connecting_ball_radius, enumerate_ball

RESIDUAL_TOL = 1e-10
FD_STEP = 1e-5


class ShootingError(RuntimeError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message if residual is None else f"{message} (residual {residual:.3g})")


class DegenerateIntersectionWarning(UserWarning):
    pass


def _check_theta(theta):
    if not abs(theta) < math.pi:
        raise ValueError(f"|theta| must be < pi (cos(theta/2) > 0), got {theta!r}")


def rho(theta, ell):
    """Length of the loop with angle defect ``theta`` around a geodesic of length ``ell``.

    Evaluated as ``2 asinh(sqrt(sinh^2(ell/2) + sin^2(theta/2)) / cos(theta/2))``, which
    is the same quantity as ``2 acosh(cosh(ell/2) / cos(theta/2))`` without the
    cancellation near ``theta = 0``.
    """
    _check_theta(theta)
    if ell <= 0.0:
        raise ValueError("ell must be positive")
    if theta == 0.0:
        return float(ell)
    half = 0.5 * theta
    sh = math.sinh(0.5 * ell)
    return 2.0 * math.asinh(math.sqrt(sh * sh + math.sin(half) ** 2) / math.cos(half))


def amplitude(theta, ell):
    _check_theta(theta)
    if ell <= 0.0:
        raise ValueError("ell must be positive")
    if theta == 0.0:
        return 1.0
    half = 0.5 * theta
    return math.cos(half) * math.sqrt(1.0 + math.tan(half) ** 2 / math.tanh(0.5 * ell) ** 2)


@dataclass(frozen=True)
class TwistedOrbit:
    t: float
    z: UnitTangent
    g: MobiusTransform
    theta: float
    residual: float = 0.0
    iterations: int = 0

    def __post_init__(self):
        if not self.t > 0.0:
            raise ValueError("travel time must be positive")


@dataclass(frozen=True)
class ConnectingArc:
    g: MobiusTransform
    length: float
    endpoints: tuple
    word: str = ""


def twisted_residual(t, z, g, theta):
    """``flow(z, t) - g . R_theta(z)`` in chart coordinates (x, y, angle)."""
    return tangent_residual(flow(z, t), g.apply_tangent(rotate_fiber(z, theta)))


class _Gauge:
    """Slice ``(beta, psi) -> k^-1 . (e^{i beta}, psi)`` transverse to the axis translations.

    ``k`` moves the axis of ``g`` onto the imaginary axis, so the unit semicircle is
    the perpendicular through the foot of ``i`` on the axis.
    """

    def __init__(self, g):
        self.g = g
        self.k = normalizing_conjugator(g)
        self.kinv = self.k.inverse()

    def point(self, beta, psi):
        return self.kinv.apply_tangent(UnitTangent(HPoint(math.cos(beta), math.sin(beta)), psi))

    def params(self, z):
        w = self.k.apply_tangent(z)
        return math.atan2(w.base.y, w.base.x), w.psi

    def residual(self, u, theta):
        t, beta, psi = u
        return twisted_residual(t, self.point(beta, psi), self.g, theta)

    def jacobian(self, u, theta, h):
        jac = np.empty((3, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            jac[:, j] = (self.residual(u + e, theta) - self.residual(u - e, theta)) / (2.0 * h)
        return jac


def _newton(gauge, u, theta, max_steps=50):
    r = gauge.residual(u, theta)
    nr = float(np.linalg.norm(r))
    for it in range(1, max_steps + 1):
        if nr < 1e-13:
            return u, nr, it - 1
        jac = gauge.jacobian(u, theta, 1e-7)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-6:
            cand = u + lam * step
            if 0.0 < cand[0] < 700.0 and 0.0 < cand[1] < math.pi:
                try:
                    rc = gauge.residual(cand, theta)
                except (OverflowError, ValueError, ZeroDivisionError):
                    rc = None
                if rc is not None:
                    nc = float(np.linalg.norm(rc))
                    if nc < nr:
                        break
            lam *= 0.5
        else:
            break
        small_step = np.abs(lam * step).max() < 1e-15
        stalled = nc < 1e-11 and nc > 0.5 * nr
        u, r, nr = cand, rc, nc
        if small_step or stalled:
            return u, nr, it
    return u, nr, max_steps


def shoot_twisted_arc(g, theta, max_steps=50):
    """Newton solve of ``flow(z, t) = g . R_theta(z)`` starting on the axis of ``g``.

    Starts at the foot of ``i`` on the axis, pointing along it, with
    ``t0 = rho(theta, ell(g))``. If the direct solve does not converge the start
    is carried along a continuation path from ``theta = 0``.
    """
    _check_theta(theta)
    ell = translation_length(g)
    gauge = _Gauge(g)
    u0 = np.array([rho(theta, ell), 0.5 * math.pi, 0.5 * math.pi])
    u, res, its = _newton(gauge, u0, theta, max_steps)
    if res >= RESIDUAL_TOL:
        u = np.array([ell, 0.5 * math.pi, 0.5 * math.pi])
        its = 0
        for th in np.linspace(0.0, theta, 17)[1:]:
            u[0] = max(u[0], rho(float(th), ell))
            u, res, k = _newton(gauge, u, float(th), max_steps)
            its += k
        if res >= RESIDUAL_TOL:
            raise ShootingError(f"Newton did not converge in {max_steps} steps", res)
    z = gauge.point(u[1], u[2])
    return TwistedOrbit(float(u[0]), z, g, float(theta), res, its)


def transversal_index(orbit, step=FD_STEP):
    """Smallest singular value of the Jacobian of the twisted residual on the gauge slice."""
    if float(np.linalg.norm(twisted_residual(orbit.t, orbit.z, orbit.g, orbit.theta))) >= RESIDUAL_TOL:
        raise ValueError("orbit does not satisfy the residual invariant")
    gauge = _Gauge(orbit.g)
    beta, psi = gauge.params(orbit.z)
    u = np.array([orbit.t, beta, psi])
    sv = np.linalg.svd(gauge.jacobian(u, orbit.theta, step), compute_uv=False)
    index = float(sv[-1])
    if index < 1e-6:
        warnings.warn(f"degenerate intersection: smallest singular value {index:.3g}",
                      DegenerateIntersectionWarning, stacklevel=2)
    return index


def jacobian_singular_values(orbit, step=FD_STEP):
    gauge = _Gauge(orbit.g)
    beta, psi = gauge.params(orbit.z)
    u = np.array([orbit.t, beta, psi])
    return np.linalg.svd(gauge.jacobian(u, orbit.theta, step), compute_uv=False)


def connecting_arcs(x, y, p, L, strategy="word-bfs", workers=1, cap=DEFAULT_CAP):
    """Geodesic arcs from ``x`` to the translates ``g.y`` of length at most ``L``, sorted."""
    if L > cap:
        # route through enumerate_ball's refusal so the estimate is reported
        enumerate_ball(p, L, strategy, workers, cap)
    ball = enumerate_ball(p, connecting_ball_radius(x, y, L), strategy, workers, cap=math.inf)
    m = ball.mats
    yz = y.z
    images = (m[:, 0] * yz + m[:, 1]) / (m[:, 2] * yz + m[:, 3])
    dx = images.real - x.x
    dy = images.imag - x.y
    tau = 2.0 * np.arcsinh(np.hypot(dx, dy) / (2.0 * np.sqrt(x.y * images.imag)))
    same = x == y
    sel = np.nonzero(tau <= L)[0]
    arcs = []
    for i in sel.tolist():
        word = ball.words[i]
        if same and word == "":
            continue
        g = MobiusTransform(*m[i])
        arcs.append(ConnectingArc(g, float(tau[i]), (x, HPoint(images[i].real, images[i].imag)), word))
    arcs.sort(key=lambda a: (a.length, a.word))
    return arcs
