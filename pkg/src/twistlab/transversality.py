"""Collar chart, moving frame and the Dehn-twist bundle map.

Coordinates ``(tau, rho, theta)`` on the unit tangent bundle of a collar with
metric ``cosh(rho)^2 dtau^2 + drho^2``; ``theta`` is the angle of the unit
vector measured from ``d/dtau`` towards ``d/drho``. The chart extends to Fermi
coordinates about the imaginary axis of the upper half-plane, which is how the
geodesic field is checked against the exact flow.

Frame: ``X`` is the geodesic generator, ``H = (R_{-pi/2})_* X`` and
``V = d/dtheta``. The stable and unstable lines are ``H - V`` and ``H + V``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .hyperbolic import HPoint, UnitTangent, angle_diff, flow, wrap_angle

COLLAR_HALF_WIDTH = 2.0
STRUCTURAL_TOL = 1e-8
FLOW_GATE = 1e-6
# change of basis (X, H, V) <- (X, E_s, E_u) with E_s = H - V, E_u = H + V
SPLIT = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, -1.0, 1.0]])
SPLIT_INV = np.linalg.inv(SPLIT)


class TransversalityError(RuntimeError):
    pass


class FlowValidationError(TransversalityError):
    def __init__(self, error, state):
        self.error = error
        self.state = state
        super().__init__(f"chart geodesic field disagrees with the exact flow by {error:.3g} "
                         f"from state {state}")


class StructuralZeroError(TransversalityError):
    pass


class StableDirectionError(TransversalityError):
    def __init__(self, angle, estimate, formula):
        self.angle = angle
        self.estimate = estimate
        self.formula = formula
        super().__init__(f"Lyapunov direction is {angle:.3g} rad away from H -/+ V "
                         f"(estimate {estimate}, formula {formula})")


@dataclass(frozen=True)
class CollarPoint:
    """``tau`` is kept as a cover coordinate; reduce it with :meth:`reduced`."""

    tau: float
    rho: float
    theta: float

    def __post_init__(self):
        if not abs(self.rho) <= COLLAR_HALF_WIDTH + 1e-12:
            raise ValueError(f"rho must lie in [-2, 2], got {self.rho!r}")
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    def reduced(self, ell):
        return CollarPoint(math.fmod(self.tau, ell) % ell if ell > 0 else self.tau, self.rho, self.theta)

    def as_array(self):
        return np.array([self.tau, self.rho, self.theta])


# ------------------------------------------------------------------ cutoff


def _logistic_parts(x):
    """``u(x) = 2x/(1-x^2)`` with its first two derivatives."""
    q = 1.0 - x * x
    return 2.0 * x / q, 2.0 * (1.0 + x * x) / q**2, 4.0 * x * (3.0 + x * x) / q**3


@dataclass(frozen=True)
class TwistProfile:
    """Twist amount ``ell`` and the cutoff ``chi(rho) = 1/(1 + exp(-2 rho/(1 - rho^2)))``.

    ``chi`` is smooth, increasing, identically 0 for ``rho <= -1`` and 1 for
    ``rho >= 1``; ``chi'`` is a bump supported in ``(-1, 1)`` with unit integral.
    """

    ell: float

    def __post_init__(self):
        if not self.ell >= 0.0:
            raise ValueError("twist length must be non-negative")

    @staticmethod
    def chi(x):
        if x <= -1.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        u = _logistic_parts(x)[0]
        if u < 0.0:
            e = math.exp(u) if u > -745.0 else 0.0
            return e / (1.0 + e)
        return 1.0 / (1.0 + math.exp(-u))

    @staticmethod
    def dchi(x):
        if not -1.0 < x < 1.0:
            return 0.0
        u, du, _ = _logistic_parts(x)
        if abs(u) > 700.0:
            return 0.0
        return du / (4.0 * math.cosh(0.5 * u) ** 2)

    @staticmethod
    def d2chi(x):
        if not -1.0 < x < 1.0:
            return 0.0
        u, du, d2u = _logistic_parts(x)
        if abs(u) > 700.0:
            return 0.0
        bump = 1.0 / (4.0 * math.cosh(0.5 * u) ** 2)
        return bump * (-math.tanh(0.5 * u) * du * du + d2u)

    def kappa(self, rho):
        """Shear ``ell * h * chi'`` and its ``rho``-derivative."""
        h, dh = math.cosh(rho), math.sinh(rho)
        d1, d2 = self.dchi(rho), self.d2chi(rho)
        return self.ell * h * d1, self.ell * (dh * d1 + h * d2)


# ------------------------------------------------------------- chart & flow


def collar_h(rho):
    return math.cosh(rho)


def geodesic_field(point):
    r, t = point.rho, point.theta
    c, s = math.cos(t), math.sin(t)
    return np.array([c / math.cosh(r), s, math.tanh(r) * c])


def _field(y):
    r, t = y[1], y[2]
    c, s = math.cos(t), math.sin(t)
    return np.array([c / math.cosh(r), s, math.tanh(r) * c])


def _field_jacobian(y):
    r, t = y[1], y[2]
    c, s = math.cos(t), math.sin(t)
    ch, th = math.cosh(r), math.tanh(r)
    return np.array([
        [0.0, -c * th / ch, -s / ch],
        [0.0, 0.0, c],
        [0.0, c / ch**2, -th * s],
    ])


def chart_to_tangent(tau, rho, theta):
    """Fermi chart about the imaginary axis: ``rho`` is signed distance (positive to the left)."""
    e = math.exp(tau)
    z = complex(-e * math.tanh(rho), e / math.cosh(rho))
    return UnitTangent(HPoint(z.real, z.imag), math.atan2(z.imag, z.real) + theta)


def tangent_to_chart(v):
    z = v.base.z
    arg = math.atan2(z.imag, z.real)
    return np.array([math.log(abs(z)), math.atanh(-math.cos(arg)), angle_diff(v.psi, arg)])


def integrate_field(state, t, rtol=1e-12, atol=1e-13):
    sol = solve_ivp(lambda _s, y: _field(y), (0.0, t), np.asarray(state, float),
                    method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise TransversalityError(sol.message)
    return sol.y[:, -1]


def chart_flow_error(state, t=1.0):
    """Distance between the integrated chart field and the exact flow after time ``t``."""
    tau, rho, theta = state
    end = integrate_field(state, t)
    exact = tangent_to_chart(flow(chart_to_tangent(tau, rho, theta), t))
    diff = end - exact
    diff[2] = angle_diff(end[2], exact[2])
    return float(np.abs(diff).max())


def validate_flow(n=50, seed=0, t=1.0, gate=FLOW_GATE):
    """Compare the chart field with the exact flow on ``n`` seeded states; returns the max error."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        state = np.array([rng.uniform(0.0, 1.0), rng.uniform(-1.5, 1.5), rng.uniform(-math.pi, math.pi)])
        err = chart_flow_error(state, t)
        if err > gate:
            raise FlowValidationError(err, tuple(state))
        worst = max(worst, err)
    return worst


# -------------------------------------------------------------------- frame


def frame_matrix(rho, theta):
    """Columns ``X, H, V`` in the coordinate basis ``(d_tau, d_rho, d_theta)``."""
    c, s = math.cos(theta), math.sin(theta)
    ch, th = math.cosh(rho), math.tanh(rho)
    return np.array([
        [c / ch, -s / ch, 0.0],
        [s, c, 0.0],
        [th * c, -th * s, 1.0],
    ])


def contact_form(point):
    """``alpha = h cos(theta) dtau + sin(theta) drho`` as a covector."""
    return np.array([math.cosh(point.rho) * math.cos(point.theta), math.sin(point.theta), 0.0])


def sasaki_metric(point):
    """Gram matrix of the Sasaki-type metric in the coordinate basis."""
    h, dh = math.cosh(point.rho), math.sinh(point.rho)
    # vertical part of (a, b, c) is c - h' a
    vert = np.array([-dh, 0.0, 1.0])
    return np.diag([h * h, 1.0, 0.0]) + np.outer(vert, vert)


@dataclass(frozen=True)
class FrameJet:
    point: CollarPoint
    frame: np.ndarray
    jet: np.ndarray

    @property
    def condition_number(self):
        return float(np.linalg.cond(self.frame))


def frame(point):
    return FrameJet(point, frame_matrix(point.rho, point.theta), np.eye(3))


def _lyapunov_stable(state, T=20.0, segment=1.0, seed=0):
    """Stable direction at ``state`` by inverse power iteration along the forward orbit.

    The orbit is cut into unit segments; each segment's variational matrix is
    integrated, and a random vector at the far end is pulled back through the
    inverses with renormalization. Backward-expanded directions dominate, which
    singles out the stable line (the flow line is neutral).
    """
    def rhs(_s, y):
        m = y[3:].reshape(3, 3)
        return np.concatenate([_field(y[:3]), (_field_jacobian(y[:3]) @ m).ravel()])

    y = np.asarray(state, float)
    mats = []
    for _ in range(int(round(T / segment))):
        sol = solve_ivp(rhs, (0.0, segment), np.concatenate([y, np.eye(3).ravel()]),
                        method="DOP853", rtol=1e-11, atol=1e-12)
        mats.append(sol.y[3:, -1].reshape(3, 3))
        y = sol.y[:3, -1]
    w = np.random.default_rng(seed).normal(size=3)
    w /= np.linalg.norm(w)
    for m in reversed(mats):
        w = np.linalg.solve(m, w)
        w /= np.linalg.norm(w)
    return w


def _angle_between_lines(u, v):
    cosang = abs(float(u @ v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.acos(min(1.0, cosang))


@dataclass(frozen=True)
class StableSplitting:
    stable: np.ndarray
    unstable: np.ndarray
    estimate: np.ndarray
    angle: float
    sign: int


def stable_unstable(point, T=20.0, seed=0, tol=1e-3):
    """``E_s``/``E_u`` from the formula ``H -/+ V`` plus a Lyapunov estimate of ``E_s``.

    ``sign`` is -1 when the estimate matches ``H - V`` and +1 for ``H + V``. The
    comparison is done in frame coefficients, where ``(X, H, V)`` is orthonormal.
    """
    fm = frame_matrix(point.rho, point.theta)
    stable = fm @ np.array([0.0, 1.0, -1.0])
    unstable = fm @ np.array([0.0, 1.0, 1.0])
    est = _lyapunov_stable(point.as_array(), T, seed=seed)
    coef = np.linalg.solve(fm, est)
    a_minus = _angle_between_lines(coef, np.array([0.0, 1.0, -1.0]))
    a_plus = _angle_between_lines(coef, np.array([0.0, 1.0, 1.0]))
    sign, angle = (-1, a_minus) if a_minus <= a_plus else (1, a_plus)
    if angle > tol:
        raise StableDirectionError(angle, est, stable)
    return StableSplitting(stable, unstable, est, angle, sign)


# --------------------------------------------------------------- Dehn twist


def _twist_angle(theta, kappa):
    s, c = math.sin(theta), math.cos(theta)
    w2 = 1.0 + 2.0 * kappa * s * c + kappa * kappa * s * s
    if not w2 > 1e-300:
        raise TransversalityError("twisted direction vanishes")
    # phi - theta lies in (-pi, 0]; this atan2 has no branch cut on that range
    return theta - math.atan2(kappa * s * s, 1.0 + kappa * s * c), w2


def dehn_twist(point, profile):
    """``f_0(tau, rho) = (tau + ell chi(rho), rho)`` lifted to unit vectors."""
    kappa, _ = profile.kappa(point.rho)
    phi, _ = _twist_angle(point.theta, kappa)
    return CollarPoint(point.tau + profile.ell * profile.chi(point.rho), point.rho, phi)


def _twist_map_raw(y, profile):
    tau, rho, theta = y
    kappa, _ = profile.kappa(rho)
    phi, _ = _twist_angle(theta, kappa)
    return np.array([tau + profile.ell * profile.chi(rho), rho, phi])


def coordinate_jet(point, profile):
    """Differential of the bundle map in the coordinate basis."""
    r, t = point.rho, point.theta
    kappa, dkappa = profile.kappa(r)
    _, w2 = _twist_angle(t, kappa)
    s = math.sin(t)
    return np.array([
        [1.0, profile.ell * profile.dchi(r), 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -dkappa * s * s / w2, 1.0 / w2],
    ])


def finite_difference_jet(point, profile, step=1e-6):
    y = point.as_array()
    jac = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        hi = _twist_map_raw(y + e, profile)
        lo = _twist_map_raw(y - e, profile)
        d = hi - lo
        d[2] = angle_diff(hi[2], lo[2])
        jac[:, j] = d / (2.0 * step)
    return jac


def dehn_twist_jet(point, profile):
    image = dehn_twist(point, profile)
    return FrameJet(image, frame_matrix(image.rho, image.theta), coordinate_jet(point, profile))


@dataclass(frozen=True)
class ConjugatedJet:
    lam: float
    mu_perp: float
    mu: float
    delta: float
    eps: float
    nu: float
    matrix: np.ndarray


def conjugated_jet(point, profile, rotation=0.0, check=True):
    """``frame(image)^-1 . dF . frame(point)`` for ``F = R_rotation o F_0``.

    For ``rotation = 0`` the block form is ``[[lam, mu_perp, 0], [0, mu, 0],
    [delta, eps, nu]]`` and the three zeros are checked unless ``check`` is false.
    A nonzero rotation mixes ``X`` and ``H`` at the image, so no zeros are expected.
    """
    image = dehn_twist(point, profile)
    target = frame_matrix(image.rho, image.theta + rotation)
    m = np.linalg.solve(target, coordinate_jet(point, profile) @ frame_matrix(point.rho, point.theta))
    if check and rotation == 0.0:
        zeros = (abs(m[1, 0]), abs(m[0, 2]), abs(m[1, 2]))
        if max(zeros) > STRUCTURAL_TOL:
            raise StructuralZeroError(f"structural zeros violated: {zeros}")
    return ConjugatedJet(m[0, 0], m[0, 1], m[1, 1], m[2, 0], m[2, 1], m[2, 2], m)


def mu_closed_form(point, profile):
    t = point.theta
    kappa, _ = profile.kappa(point.rho)
    phi, _ = _twist_angle(t, kappa)
    return math.sin(t) * math.sin(phi) + math.cos(t) * (-kappa * math.sin(phi) + math.cos(phi))


def eps_closed_form(point, profile):
    """Lower-left block entry; derived from the collar metric (coefficient ``tanh rho``)."""
    r, t = point.rho, point.theta
    kappa, dkappa = profile.kappa(r)
    _, w2 = _twist_angle(t, kappa)
    c, s, th = math.cos(t), math.sin(t), math.tanh(r)
    dphi_drho = -dkappa * s * s / w2
    return c * dphi_drho + th * s * (1.0 - 1.0 / w2) - th * kappa * c


def nu_closed_form(point, profile):
    kappa, _ = profile.kappa(point.rho)
    return 1.0 / _twist_angle(point.theta, kappa)[1]


def condition_iii_margin(point, profile, rotation=0.0):
    """Norm of the ``E_s`` row of ``dF`` restricted to ``E_0 + E_s``.

    Positive exactly when ``dF(E_s + E_0)`` projects onto ``E_s`` along ``E_u + E_0``.
    """
    m = conjugated_jet(point, profile, rotation).matrix
    split = SPLIT_INV @ m @ SPLIT
    return float(math.hypot(split[1, 0], split[1, 1]))


# --------------------------------------------------------------------- scans


@dataclass(frozen=True)
class TransversalityReport:
    ell: float
    grid: tuple
    min_margin: float
    argmin: tuple
    sup_eps: float
    sup_mu_minus_1: float
    sup_nu_minus_1: float
    tau_spread: float

    def as_dict(self):
        return {
            "ell": self.ell,
            "grid": list(self.grid),
            "min_margin": self.min_margin,
            "argmin": list(self.argmin),
            "sup_eps": self.sup_eps,
            "sup_mu_minus_1": self.sup_mu_minus_1,
            "sup_nu_minus_1": self.sup_nu_minus_1,
        }


def grid_points(grid):
    n_rho, n_theta = grid
    if n_rho < 16 or n_theta < 16:
        raise ValueError("grid dimensions must be at least 16")
    rhos = np.linspace(-COLLAR_HALF_WIDTH, COLLAR_HALF_WIDTH, n_rho)
    thetas = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    return rhos, thetas


def scan(profile, grid=(64, 64), rotation=0.0, tau_values=(0.0, 0.37)):
    """Grid scan over ``(rho, theta)``; every quantity is recomputed at each ``tau`` value
    and the largest disagreement is reported as ``tau_spread``."""
    rhos, thetas = grid_points(grid)
    best = (math.inf, None)
    sup_eps = sup_mu = sup_nu = 0.0
    spread = 0.0
    for r in rhos.tolist():
        for t in thetas.tolist():
            vals = []
            for tau in tau_values:
                p = CollarPoint(tau, r, t)
                j = conjugated_jet(p, profile, rotation)
                vals.append((condition_iii_margin(p, profile, rotation), j.eps, j.mu, j.nu))
            spread = max(spread, max(abs(a - b) for a, b in zip(vals[0], vals[-1])))
            margin, eps, mu, nu = vals[0]
            if margin < best[0]:
                best = (margin, (r, t))
            sup_eps = max(sup_eps, abs(eps))
            sup_mu = max(sup_mu, abs(mu - 1.0))
            sup_nu = max(sup_nu, abs(nu - 1.0))
    return TransversalityReport(profile.ell, tuple(grid), best[0], best[1], sup_eps, sup_mu, sup_nu,
                                spread)


@dataclass(frozen=True)
class RotationReport:
    theta: float
    ell: float
    min_displacement: float
    min_margin: float
    fixed_point_free: bool


def rotation_near_identity_check(theta, profile, grid=(64, 64)):
    """Look for fixed points of ``R_theta o F_0`` on the collar grid.

    Displacement is ``sqrt((h dtau)^2 + dtheta^2)`` with ``dtau`` reduced modulo the
    collar length ``ell`` (for ``ell = 0`` the collar is not identified).
    """
    if abs(math.remainder(theta, 2.0 * math.pi)) <= 1e-9:
        raise ValueError("theta is a multiple of 2 pi: R_theta is the identity")
    rhos, thetas = grid_points(grid)
    ell = profile.ell
    min_disp = math.inf
    min_margin = math.inf
    for r in rhos.tolist():
        h = math.cosh(r)
        for t in thetas.tolist():
            p = CollarPoint(0.0, r, t)
            q = dehn_twist(p, profile)
            dtau = math.remainder(q.tau - p.tau, ell) if ell > 0 else q.tau - p.tau
            dth = angle_diff(q.theta + theta, p.theta)
            min_disp = min(min_disp, math.hypot(h * dtau, dth))
            min_margin = min(min_margin, condition_iii_margin(p, profile, theta))
    return RotationReport(theta, ell, min_disp, min_margin, min_disp > 0.0)
