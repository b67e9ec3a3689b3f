"""Fast deterministic invariant checks behind ``twistlab selftest``.

Each check returns ``(passed, detail)``; details are rounded so the report is
byte-stable across runs and worker counts.
"""
import math

import numpy as np

from . import kernels
from .hyperbolic import HPoint, MobiusTransform, UnitTangent, flow, tangent_residual
from .lefschetz import (
    H1Action,
    curve_class,
    integrand_spread,
    lefschetz_number,
    residue_prediction,
    symplectic_form,
    twist_action,
)
from .series import decomposition_remainder, eta_theta, ruelle_logderiv
from .spectrum import bolza_presentation, spectrum
from .transversality import (
    CollarPoint,
    TwistProfile,
    conjugated_jet,
    contact_form,
    coordinate_jet,
    finite_difference_jet,
    frame_matrix,
    validate_flow,
)
from .twisted import rho, shoot_twisted_arc

SYSTOLE = 2.0 * math.acosh(1.0 + math.sqrt(2.0))


def _e(x):
    return format(float(x), ".1e")


def check_relator():
    p = bolza_presentation()
    m = p.evaluate(p.relator)
    err = min(np.abs(m.as_array() - np.eye(2).ravel()).max(), np.abs(m.as_array() + np.eye(2).ravel()).max())
    return err < 1e-9, f"relator error {_e(err)}"


def check_flow_group_law(rng):
    worst = 0.0
    for _ in range(20):
        v = UnitTangent(HPoint(rng.uniform(-1, 1), rng.uniform(0.5, 2)), rng.uniform(0, 2 * math.pi))
        s, t = rng.uniform(-2, 2, size=2)
        worst = max(worst, np.abs(tangent_residual(flow(flow(v, s), t), flow(v, s + t))).max())
    return worst < 1e-9, f"max deviation {_e(worst)}"


def check_dual_enumeration():
    p = bolza_presentation()
    a = spectrum(p, 6.5, "word-bfs")
    b = spectrum(p, 6.5, "matrix-ball")
    same = len(a) == len(b) and np.abs(np.sort(a.lengths) - np.sort(b.lengths)).max() < 1e-9
    sys_err = abs(a.lengths.min() - SYSTOLE)
    return same and sys_err < 1e-8, f"{len(a)} classes, systole error {_e(sys_err)}"


def check_shooting(rng):
    worst = 0.0
    for _ in range(5):
        th, ell = rng.uniform(-2.5, 2.5), rng.uniform(0.5, 6.0)
        g = MobiusTransform.translation(ell)
        worst = max(worst, abs(shoot_twisted_arc(g, th).t - rho(th, ell)))
    return worst < 1e-8, f"max |t - rho| {_e(worst)}"


def check_series_identities():
    table = spectrum(bolza_presentation(), 6.0, "word-bfs")
    e0 = eta_theta(table, 0.0, 5.0).value
    direct = math.fsum(c.primitive_length * math.exp(-5.0 * c.length) for c in table.classes)
    r = ruelle_logderiv(table, 0.0, 5.0).value
    even = abs(eta_theta(table, 0.8, 3.0).value - eta_theta(table, -0.8, 3.0).value)
    ok = abs(e0 - direct) <= 1e-15 * abs(direct) and r == e0 and even < 1e-12
    return ok, f"theta=0 collapse {_e(abs(e0 - direct))}, parity {_e(even)}"


def check_remainder():
    vals = [abs(decomposition_remainder(math.pi / 3, 2.0, ell)) * math.exp(4.0 * ell)
            for ell in np.linspace(5.0, 25.0, 41)]
    ratio = max(vals) / min(vals)
    return ratio < 10.0, f"variation factor {ratio:.4f}"


def check_collar(rng):
    flow_err = validate_flow(n=10, seed=0)
    prof = TwistProfile(0.1)
    zeros = fd = duality = 0.0
    for _ in range(50):
        p = CollarPoint(rng.uniform(0, 1), rng.uniform(-2, 2), rng.uniform(0, 2 * math.pi))
        m = conjugated_jet(p, prof, check=False).matrix
        zeros = max(zeros, abs(m[1, 0]), abs(m[0, 2]), abs(m[1, 2]))
        fd = max(fd, np.abs(finite_difference_jet(p, prof) - coordinate_jet(p, prof)).max())
        pairing = contact_form(p) @ frame_matrix(p.rho, p.theta)
        duality = max(duality, np.abs(pairing - np.array([1.0, 0.0, 0.0])).max())
    ok = flow_err < 1e-8 and zeros < 1e-8 and fd < 1e-6 and duality < 1e-12
    return ok, f"flow {_e(flow_err)}, zeros {_e(zeros)}, jet fd {_e(fd)}, duality {_e(duality)}"


def check_lefschetz():
    g = 2
    j = symplectic_form(g)
    ident = H1Action.identity(g)
    ta1 = twist_action(curve_class("a", 1, g))
    ta2 = twist_action(curve_class("a", 2, g))
    tb2 = twist_action(curve_class("b", 2, g))
    ok = (lefschetz_number(ident) == 2 - 2 * g
          and lefschetz_number(ta1) == 2 - 2 * g
          and lefschetz_number(H1Action.hyperelliptic(g)) == 2 * g + 2
          and ta1 @ ta2 == ta2 @ ta1 and ta1 @ tb2 == tb2 @ ta1
          and all(np.array_equal(a.matrix.T @ j @ a.matrix, j) for a in (ta1, ta2, tb2, ta1 @ tb2)))
    return ok, "identity, transvection, -I, commuting twists"


def check_residue():
    worst = 0.0
    for th in (0.0, math.pi / 4, math.pi / 2, 1.0):
        pred = residue_prediction(H1Action.identity(2), th)
        worst = max(worst, abs(pred - ((1 - 2 * 2) + math.cos(th))))
    spread, _ = integrand_spread(1.0)
    return worst == 0.0 and spread < 1e-8, f"integrand spread {_e(spread)}"


def check_kernel_parity(rng):
    mats = rng.normal(size=(64, 4))
    keys_a = kernels.matrix_keys_numba(mats, 1e-6)
    keys_b = kernels.matrix_keys_numpy(mats, 1e-6)
    ell = rng.uniform(3, 10, 200)
    ra, ia = kernels.twisted_terms_numba(ell, ell, 0.7, 2.0, 0.5)
    rb, ib = kernels.twisted_terms_numpy(ell, ell, 0.7, 2.0, 0.5)
    dev = max(np.abs(ra - rb).max(), np.abs(ia - ib).max())
    return np.array_equal(keys_a, keys_b) and dev < 1e-14, f"term deviation {_e(dev)}"


def run(seed=0):
    checks = [
        ("relator", lambda: check_relator()),
        ("flow group law", lambda: check_flow_group_law(np.random.default_rng(seed))),
        ("dual enumeration", check_dual_enumeration),
        ("shooting vs rho", lambda: check_shooting(np.random.default_rng(seed + 1))),
        ("series identities", check_series_identities),
        ("decomposition remainder", check_remainder),
        ("collar frame and jet", lambda: check_collar(np.random.default_rng(seed + 2))),
        ("lefschetz", check_lefschetz),
        ("residue prediction", check_residue),
        ("kernel parity", lambda: check_kernel_parity(np.random.default_rng(seed + 3))),
    ]
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed report
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
