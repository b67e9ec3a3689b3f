"""Mapping classes acting on first cohomology, Lefschetz numbers and the
residue prediction for rotated lifts.

Homology classes are integer vectors in the basis ``a_1..a_g, b_1..b_g`` with
intersection form ``J = [[0, I], [-I, 0]]``. All matrix work is exact integer
arithmetic.
"""
import math
import re
from dataclasses import dataclass

import numpy as np

from .hyperbolic import HPoint, UnitTangent, flow, rotate_fiber

CONSTANCY_TOL = 1e-8
_TOKEN = re.compile(r"^([ab])(\d+)(?:\^(-?\d+))?$")


class ResidueRefusal(ValueError):
    pass


def symplectic_form(genus):
    eye = np.eye(genus, dtype=np.int64)
    zero = np.zeros((genus, genus), dtype=np.int64)
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True, eq=False)
class H1Action:
    genus: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.genus < 2:
            raise ValueError("genus must be at least 2")
        m = np.asarray(self.matrix)
        n = 2 * self.genus
        if m.shape != (n, n):
            raise ValueError(f"matrix must be {n}x{n}")
        if not np.issubdtype(m.dtype, np.integer):
            if not np.array_equal(m, np.round(m)):
                raise ValueError("matrix must have integer entries")
        m = m.astype(np.int64)
        object.__setattr__(self, "matrix", m)
        j = symplectic_form(self.genus)
        if not np.array_equal(m.T @ j @ m, j):
            raise ValueError("matrix does not preserve the intersection form")

    @classmethod
    def identity(cls, genus):
        return cls(genus, np.eye(2 * genus, dtype=np.int64))

    @classmethod
    def hyperelliptic(cls, genus):
        return cls(genus, -np.eye(2 * genus, dtype=np.int64))

    @property
    def trace(self):
        return int(np.trace(self.matrix))

    def compose(self, other):
        """``self o other``: apply ``other`` first."""
        if other.genus != self.genus:
            raise ValueError("genus mismatch")
        return H1Action(self.genus, self.matrix @ other.matrix)

    __matmul__ = compose

    def inverse(self):
        j = symplectic_form(self.genus)
        return H1Action(self.genus, -j @ self.matrix.T @ j)

    def power(self, k):
        out = H1Action.identity(self.genus)
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = base @ out
        return out

    def __eq__(self, other):
        if not isinstance(other, H1Action):
            return NotImplemented
        return self.genus == other.genus and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.genus, self.matrix.tobytes()))


def curve_class(name, index, genus):
    """Homology vector of the standard curve ``a_index`` or ``b_index`` (1-based)."""
    if not 1 <= index <= genus:
        raise ValueError(f"curve index {index} out of range for genus {genus}")
    c = np.zeros(2 * genus, dtype=np.int64)
    c[index - 1 if name == "a" else genus + index - 1] = 1
    return c


def twist_action(c, genus=None):
    """Transvection ``x -> x + <x, c> c`` with ``<x, c> = x^T J c``."""
    c = np.asarray(c, dtype=np.int64)
    if genus is None:
        genus = len(c) // 2
    if len(c) != 2 * genus:
        raise ValueError("class has the wrong length")
    if not c.any():
        raise ValueError("twist curve class must be nonzero")
    j = symplectic_form(genus)
    return H1Action(genus, np.eye(2 * genus, dtype=np.int64) - np.outer(c, c) @ j)


def lefschetz_number(action):
    """``1 - tr(f* on H^1) + 1`` for an orientation-preserving class."""
    return 2 - action.trace


@dataclass(frozen=True)
class MappingClass:
    """Product of Dehn twists about standard curves, applied left to right."""

    word: tuple

    def __post_init__(self):
        for name, index, exp in self.word:
            if name not in ("a", "b") or index < 1:
                raise ValueError(f"bad curve {name}{index}")
            if exp == 0:
                raise ValueError("twist exponents must be nonzero")

    @classmethod
    def parse(cls, text):
        """Grammar: comma-separated ``a<i>`` / ``b<i>`` with optional ``^<int>``."""
        word = []
        text = text.strip()
        if not text:
            return cls(())
        for tok in text.split(","):
            m = _TOKEN.match(tok.strip())
            if m is None:
                raise ValueError(f"cannot parse twist {tok.strip()!r}")
            exp = int(m.group(3)) if m.group(3) is not None else 1
            word.append((m.group(1), int(m.group(2)), exp))
        return cls(tuple(word))

    def action(self, genus):
        out = H1Action.identity(genus)
        for name, index, exp in self.word:
            out = twist_action(curve_class(name, index, genus), genus).power(exp) @ out
        return out

    def __str__(self):
        return ",".join(f"{n}{i}" + (f"^{e}" if e != 1 else "") for n, i, e in self.word)


# ------------------------------------------------------------ contact pairing


def _alpha(v, xi):
    """Liouville form at ``v`` on a chart tangent vector ``xi = (dx, dy, dpsi)``."""
    return (math.cos(v.psi) * xi[0] + math.sin(v.psi) * xi[1]) / v.base.y


def iota_X_pushforward_alpha(theta, v, step=1e-6):
    """``((R_theta)_* alpha)(X)`` at ``v``.

    Pushes the generator ``X`` at ``v`` through ``dR_{-theta}`` by centered finite
    differences of ``R_{-theta} o flow`` and pairs the result with ``alpha`` at
    ``R_{-theta} v``.
    """
    q = rotate_fiber(v, -theta)
    hi = rotate_fiber(flow(v, step), -theta)
    lo = rotate_fiber(flow(v, -step), -theta)
    xi = ((hi.base.x - lo.base.x) / (2.0 * step), (hi.base.y - lo.base.y) / (2.0 * step))
    return _alpha(q, xi)


def sample_tangents(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        out.append(UnitTangent(HPoint(rng.uniform(-2.0, 2.0), math.exp(rng.uniform(-1.5, 1.5))),
                               rng.uniform(0.0, 2.0 * math.pi)))
    return out


def integrand_spread(theta, samples=100, seed=0):
    vals = np.array([iota_X_pushforward_alpha(theta, v) for v in sample_tangents(samples, seed)])
    return float(vals.max() - vals.min()), vals


def residue_prediction(action, theta, samples=100, seed=0):
    """``Lambda + (cos theta - 1)``, after checking the integrand is constant ``cos theta``.

    With a constant integrand the average over the unit tangent bundle equals
    that constant, so no fundamental-domain integration is needed.
    """
    spread, vals = integrand_spread(theta, samples, seed)
    if spread >= CONSTANCY_TOL or abs(vals.mean() - math.cos(theta)) >= CONSTANCY_TOL:
        raise ResidueRefusal(f"integrand is not constant (spread {spread:.3g})")
    return (lefschetz_number(action) - 1) + math.cos(theta)
