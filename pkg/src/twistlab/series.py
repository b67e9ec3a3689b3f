"""Dynamical Dirichlet series summed over a computed length spectrum.

Everything here is a plain truncated sum. Curvature is -1, so the series
converge for ``Re s > 1`` and evaluations at or below ``1 + CONVERGENCE_MARGIN``
are refused instead of being extrapolated.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .spectrum import fit_growth
from .twisted import amplitude, rho

ABSCISSA = 1.0
CONVERGENCE_MARGIN = 0.1
PROBE_MARGIN = 0.05
PROBE_COLUMNS = ("s", "s_eta", "eta", "cutoff", "terms", "tail_bound")


class SeriesRefusal(ValueError):
    """The requested point lies outside the half-plane where summation converges."""

    def __init__(self, s, limit):
        self.s = s
        self.limit = limit
        super().__init__(f"Re s = {complex(s).real:g} is not above {limit:g}; "
                         "summation does not converge there")


@dataclass(frozen=True)
class SeriesEvaluation:
    s: complex
    value: complex
    cutoff: float
    tail_bound: float
    term_count: int
    warning: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tail_bound", float(self.tail_bound))
        if not self.tail_bound >= 0.0:
            raise ValueError("tail_bound must be non-negative")


def _require(s, limit):
    s = complex(s)
    if not s.real > limit:
        raise SeriesRefusal(s, limit)
    return s


def _csum(values):
    return float(kernels.compensated_sum(np.ascontiguousarray(values, dtype=float)))


def _tail_model(lengths, cutoff, sigma, weight_power=1):
    """Heuristic bound for the omitted part, from ``N(L) ~ a e^{bL}``.

    Integrates ``x^weight_power e^{-sigma x} dN(x)`` over ``[cutoff, inf)``.
    """
    if len(lengths) == 0:
        return 0.0
    a, b = fit_growth(lengths, cutoff)
    gap = sigma - b
    if gap <= 0.0:
        return math.inf
    base = a * b * math.exp(-gap * cutoff)
    if weight_power == 0:
        return base / gap
    return base * (cutoff / gap + 1.0 / gap**2)


def eta_terms(table, theta, s):
    """Per-class terms ``ell_prim * amplitude * exp(-s * rho)`` as a complex array."""
    s = complex(s)
    re, im = kernels.twisted_terms(
        np.ascontiguousarray(table.lengths), np.ascontiguousarray(table.primitive_lengths),
        float(theta), s.real, s.imag)
    return re + 1j * im


def eta_theta(table, theta, s):
    if not abs(theta) < math.pi:
        raise ValueError("|theta| must be < pi")
    s = _require(s, ABSCISSA + CONVERGENCE_MARGIN)
    terms = eta_terms(table, theta, s)
    value = complex(_csum(terms.real), _csum(terms.imag))
    if s.imag == 0.0:
        value = complex(value.real, 0.0)
    amp = amplitude(theta, table.cutoff) if len(table) else 1.0
    tail = amp * _tail_model(table.lengths, table.cutoff, s.real)
    return SeriesEvaluation(s, value, table.cutoff, tail, len(terms))


def ruelle_logderiv(table, eps, s):
    """``e^{eps s} sum ell_prim e^{-s ell}``: the log-derivative series of the flow."""
    if eps < 0.0:
        raise ValueError("eps must be non-negative")
    s = _require(s, ABSCISSA + CONVERGENCE_MARGIN)
    base = eta_theta(table, 0.0, s)
    value = base.value if eps == 0.0 else complex(np.exp(eps * s)) * base.value
    if s.imag == 0.0:
        value = complex(value.real, 0.0)
    scale = abs(np.exp(eps * s))
    return SeriesEvaluation(s, value, table.cutoff, base.tail_bound * scale, base.term_count)


def poincare_two_point(arcs, s, cutoff=None):
    """``sum exp(-s tau)`` over connecting arcs."""
    s = _require(s, ABSCISSA + CONVERGENCE_MARGIN)
    taus = np.array([a.length for a in arcs], dtype=float)
    if cutoff is None:
        cutoff = float(taus.max()) if len(taus) else 0.0
    if len(taus) == 0:
        return SeriesEvaluation(s, 0j, cutoff, 0.0, 0, warning="empty arc list")
    mag = np.exp(-s.real * taus)
    value = complex(_csum(mag * np.cos(s.imag * taus)), -_csum(mag * np.sin(s.imag * taus)))
    if s.imag == 0.0:
        value = complex(value.real, 0.0)
    tail = _tail_model(taus, cutoff, s.real, weight_power=0)
    return SeriesEvaluation(s, value, cutoff, tail, len(taus))


def decomposition_remainder(theta, s, ell):
    """Remainder of one term after removing its two-term large-``ell`` expansion.

    The term ``amplitude(theta, ell) * exp(-s rho(theta, ell))`` is compared with
    ``exp(-s ell) cos(theta/2)^(2s) (1 + 2 sin^2(theta/2) (1 - s) exp(-ell))``; the
    difference is ``O(exp(-(s + 2) ell))``. Evaluated without cancellation so the
    rate stays visible far below double-precision resolution of the term itself.
    """
    if ell < 1.0:
        raise ValueError("ell must be at least 1")
    if not abs(theta) < math.pi:
        raise ValueError("|theta| must be < pi")
    half = 0.5 * theta
    sig = math.sin(half)
    if sig == 0.0:
        return 0.0
    c = math.cos(half)
    s2 = sig * sig
    u = math.exp(-ell)
    a = 0.5 * (1.0 + u)
    w = c * c * u / (a * a)
    q1 = u - c * c * u / (a * (1.0 + math.sqrt(1.0 - w)))
    # log-ratio minus its first-order part 2 sin^2 (1 - s) u, each piece O(u^2)
    x = 4.0 * s2 * u / (1.0 - u) ** 2
    d_amp = 0.5 * _log1p_minus_x(x) + 2.0 * s2 * u * u * (2.0 - u) / (1.0 - u) ** 2
    d_q = _log1p_minus_x(q1) + c * c * u * q1 / (1.0 + q1)
    first = 2.0 * s2 * (1.0 - s) * u
    log_ratio = first + d_amp - 2.0 * s * d_q
    bracket = _expm1_minus_x(log_ratio) + d_amp - 2.0 * s * d_q
    return c ** (2.0 * s) * math.exp(-s * ell) * bracket


def _log1p_minus_x(x):
    if abs(x) < 1e-3:
        return sum((-1) ** (k + 1) * x**k / k for k in range(7, 1, -1))
    return math.log1p(x) - x


def _expm1_minus_x(x):
    if abs(x) < 1e-3:
        return sum(x**k / math.factorial(k) for k in range(7, 1, -1))
    return math.expm1(x) - x


def reference_term(theta, s, ell):
    """The same term from the closed forms, for cross-checks at moderate ``ell``."""
    return amplitude(theta, ell) * math.exp(-s * rho(theta, ell))


@dataclass(frozen=True)
class ProbeRow:
    s: float
    s_eta: float
    eta: float
    cutoff: float
    terms: int
    tail_bound: float


def residue_probe(table, theta, s_list):
    """Heuristic record of ``s * eta_theta(s)`` for real ``s`` approaching the abscissa.

    Exploratory only: the behaviour at ``s = 0`` needs analytic continuation and is
    not accessible from these sums.
    """
    limit = ABSCISSA + PROBE_MARGIN
    for s in s_list:
        if not float(s) > limit:
            raise SeriesRefusal(s, limit)
    rows = []
    for s in s_list:
        s = float(s)
        terms = eta_terms(table, theta, s)
        eta = _csum(terms.real)
        amp = amplitude(theta, table.cutoff) if len(table) else 1.0
        tail = amp * _tail_model(table.lengths, table.cutoff, s)
        rows.append(ProbeRow(s, s * eta, eta, table.cutoff, len(terms), tail))
    return rows
