"""Constant curvature -1 geometry in the upper half-plane.

Directions are angles ``psi`` measured counterclockwise from the +x direction
of the chart. A Mobius map ``z -> (az+b)/(cz+d)`` turns tangent directions at
``z`` by ``-2 arg(cz+d)``.
"""
import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
PARABOLIC_BAND = 1e-9


class GeometryError(ValueError):
    """Raised when an isometry does not have the type an operation needs."""


class NumericallyParabolicError(GeometryError):
    pass


class IsometryClass(str, enum.Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


def wrap_angle(a):
    """Reduce to [0, 2pi)."""
    a = math.fmod(a, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI:
        a = 0.0
    return a


def angle_diff(a, b):
    """Signed difference ``a - b`` reduced to (-pi, pi]."""
    d = math.remainder(a - b, TWO_PI)
    return math.pi if d == -math.pi else d


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0.0:
            raise ValueError(f"point must lie in the upper half-plane, got y={self.y!r}")

    @classmethod
    def from_complex(cls, z):
        return cls(float(z.real), float(z.imag))

    @property
    def z(self):
        return complex(self.x, self.y)


@dataclass(frozen=True)
class UnitTangent:
    base: HPoint
    psi: float

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(float(self.psi)))

    def as_array(self):
        return np.array([self.base.x, self.base.y, self.psi])


@dataclass(frozen=True, eq=False)
class MobiusTransform:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        scale = max(1.0, self.a**2 + self.b**2 + self.c**2 + self.d**2)
        if abs(det - 1.0) > 1e-9 * scale:
            raise ValueError(f"determinant {det!r} is not 1")

    @classmethod
    def from_entries(cls, a, b, c, d):
        """Build from any real matrix with positive determinant, rescaled to det 1."""
        det = a * d - b * c
        if not det > 0.0:
            raise ValueError(f"determinant must be positive, got {det!r}")
        r = 1.0 / math.sqrt(det)
        return cls(a * r, b * r, c * r, d * r)

    @classmethod
    def from_array(cls, m):
        m = np.asarray(m, dtype=float).ravel()
        return cls.from_entries(*m)

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation(cls, ell):
        """Hyperbolic translation of length ``ell`` along the imaginary axis (upwards)."""
        h = 0.5 * ell
        return cls(math.exp(h), 0.0, 0.0, math.exp(-h))

    @classmethod
    def rotation(cls, angle):
        """Elliptic rotation about ``i`` turning tangent directions there by ``angle``."""
        h = 0.5 * angle
        return cls(math.cos(h), math.sin(h), -math.sin(h), math.cos(h))

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def as_array(self):
        return np.array(self.entries())

    @property
    def trace(self):
        return self.a + self.d

    def inverse(self):
        return MobiusTransform(self.d, -self.b, -self.c, self.a)

    def compose(self, other):
        """``self o other``, renormalized to unit determinant."""
        return compose(self, other)

    __matmul__ = compose

    def sign_normalized(self):
        for v in self.entries():
            if v != 0.0:
                if v < 0.0:
                    return MobiusTransform(-self.a, -self.b, -self.c, -self.d)
                return self
        return self

    def __eq__(self, other):
        if not isinstance(other, MobiusTransform):
            return NotImplemented
        return self.sign_normalized().entries() == other.sign_normalized().entries()

    def __hash__(self):
        return hash(self.sign_normalized().entries())

    def isclose(self, other, tol=1e-12):
        """Projective entrywise closeness."""
        p, q = self.as_array(), other.as_array()
        return min(np.abs(p - q).max(), np.abs(p + q).max()) <= tol

    def power(self, k):
        out = MobiusTransform.identity()
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = compose(out, base)
        return out

    def apply(self, p):
        z = p.z if isinstance(p, HPoint) else complex(p)
        w = (self.a * z + self.b) / (self.c * z + self.d)
        return HPoint(w.real, w.imag)

    def apply_tangent(self, v):
        z = v.base.z
        den = self.c * z + self.d
        w = (self.a * z + self.b) / den
        return UnitTangent(HPoint(w.real, w.imag), v.psi - 2.0 * cmath.phase(den))

    def __call__(self, p):
        if isinstance(p, UnitTangent):
            return self.apply_tangent(p)
        return self.apply(p)


def compose(g, h):
    a = g.a * h.a + g.b * h.c
    b = g.a * h.b + g.b * h.d
    c = g.c * h.a + g.d * h.c
    d = g.c * h.b + g.d * h.d
    r = 1.0 / math.sqrt(a * d - b * c)
    return MobiusTransform(a * r, b * r, c * r, d * r)


def distance(p, q):
    dx = p.x - q.x
    dy = p.y - q.y
    return 2.0 * math.asinh(math.hypot(dx, dy) / (2.0 * math.sqrt(p.y * q.y)))


def displacement_at_i(m):
    """``distance(i, g.i)`` from the Frobenius norm: ``|g|^2 = 2 cosh d``."""
    a, b, c, d = m.entries() if isinstance(m, MobiusTransform) else m
    return math.acosh(max(1.0, 0.5 * (a * a + b * b + c * c + d * d)))


def classify(g):
    t = abs(g.trace)
    if abs(t - 2.0) <= PARABOLIC_BAND:
        if abs(g.b) <= PARABOLIC_BAND and abs(g.c) <= PARABOLIC_BAND and abs(g.a - g.d) <= PARABOLIC_BAND:
            return IsometryClass.IDENTITY
        raise NumericallyParabolicError(
            f"|trace| = {t!r} is within {PARABOLIC_BAND} of 2 for a non-identity element")
    return IsometryClass.HYPERBOLIC if t > 2.0 else IsometryClass.ELLIPTIC


def translation_length(g):
    if classify(g) is not IsometryClass.HYPERBOLIC:
        raise GeometryError("element is not hyperbolic: no closed geodesic")
    return 2.0 * math.acosh(0.5 * abs(g.trace))


def axis(g):
    """Boundary fixed points ``(repelling, attracting)``; ``math.inf`` stands for infinity."""
    if classify(g) is not IsometryClass.HYPERBOLIC:
        raise GeometryError("axis is only defined for hyperbolic elements")
    a, b, c, d = g.entries()
    if abs(c) <= 1e-15 * max(1.0, abs(a), abs(d)):
        finite = b / (d - a)
        return (finite, math.inf) if a * a > 1.0 else (math.inf, finite)
    tr = a + d
    root = math.sqrt(tr * tr - 4.0)
    z1 = (a - d + root) / (2.0 * c)
    z2 = (a - d - root) / (2.0 * c)
    # attracting fixed point has |cz + d| > 1
    if abs(c * z1 + d) > 1.0:
        return z2, z1
    return z1, z2


def distance_to_axis(g, p=HPoint(0.0, 1.0)):
    """Distance from ``p`` to the axis of a hyperbolic ``g``.

    Uses ``sinh(d(p, gp)/2) = cosh(dist) sinh(ell/2)``.
    """
    ell = translation_length(g)
    disp = distance(p, g.apply(p))
    ratio = math.sinh(0.5 * disp) / math.sinh(0.5 * ell)
    return math.acosh(max(1.0, ratio))


def normalizing_conjugator(g):
    """Isometry ``k`` with ``k g k^-1 = diag(l, 1/l)``, ``l > 1``.

    The foot of the perpendicular from ``i`` to the axis of ``g`` is sent to ``i``.
    """
    r, att = axis(g)
    if math.isinf(att):
        k = MobiusTransform(1.0, -r, 0.0, 1.0)
    elif math.isinf(r):
        k = MobiusTransform(0.0, -1.0, 1.0, -att)
    else:
        det = r - att
        if det > 0:
            k = MobiusTransform.from_entries(1.0, -r, 1.0, -att)
        else:
            k = MobiusTransform.from_entries(-1.0, r, 1.0, -att)
    foot = abs(k.apply(HPoint(0.0, 1.0)).z)
    s = 1.0 / math.sqrt(foot)
    return compose(MobiusTransform(s, 0.0, 0.0, 1.0 / s), k)


def _frame_map(v):
    """Isometry sending the upward unit vector at ``i`` to ``v``."""
    sy = math.sqrt(v.base.y)
    h = 0.5 * (v.psi - 0.5 * math.pi)
    ch, sh = math.cos(h), math.sin(h)
    # [[sy, x/sy], [0, 1/sy]] @ [[ch, sh], [-sh, ch]]
    x = v.base.x
    return (sy * ch - x / sy * sh, sy * sh + x / sy * ch, -sh / sy, ch / sy)


def flow(v, t):
    """Geodesic flow for time ``t``."""
    a, b, c, d = _frame_map(v)
    w = 1j * math.exp(t)
    den = c * w + d
    z = (a * w + b) / den
    return UnitTangent(HPoint(z.real, z.imag), 0.5 * math.pi - 2.0 * cmath.phase(den))


def rotate_fiber(v, theta):
    return UnitTangent(v.base, v.psi + theta)


def tangent_residual(u, v):
    """Chart difference ``u - v``: (dx, dy, wrapped dpsi)."""
    return np.array([u.base.x - v.base.x, u.base.y - v.base.y, angle_diff(u.psi, v.psi)])
