"""Command line entry point: ``twistlab <subcommand> ...``.

Exit codes: 0 success, 1 refused computation, 2 usage error, 3 corrupt cache.
Refusals and cache errors print one JSON object on stderr.
"""
import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .hyperbolic import GeometryError, HPoint, MobiusTransform
from .lefschetz import H1Action, MappingClass, ResidueRefusal, lefschetz_number, residue_prediction
from .series import (
    PROBE_COLUMNS,
    SeriesRefusal,
    eta_theta,
    poincare_two_point,
    residue_probe,
    ruelle_logderiv,
)
from .spectrum import (
    CSV_HEADER,
    STRATEGIES,
    CacheCorruptError,
    SpectrumError,
    bolza_presentation,
    cached_spectrum,
    load_presentation,
    table_to_csv,
)
from .transversality import TransversalityError, TwistProfile, rotation_near_identity_check, scan
from .twisted import ShootingError, connecting_arcs, rho, shoot_twisted_arc, transversal_index

SERIES_COLUMNS = ("s_re", "s_im", "value_re", "value_im", "cutoff", "terms", "tail_bound")
TWISTED_COLUMNS = ("theta", "ell", "t_found", "rho_formula", "abs_diff", "index")
ARC_COLUMNS = ("tau", "word", "image_x", "image_y")
BUILTIN_GROUPS = {"bolza": bolza_presentation}


class Refusal(Exception):
    def __init__(self, kind, message, **extra):
        self.kind = kind
        self.extra = extra
        super().__init__(message)


def _num(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".15g")


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else _num(v) for v in r])
    return buf.getvalue()


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _records(header, rows):
    return [dict(zip(header, r)) for r in rows]


def _emit(args, header, rows):
    if args.format == "json":
        return _json(_records(header, rows))
    return _csv(header, rows)


def _presentation(name):
    if name in BUILTIN_GROUPS:
        return BUILTIN_GROUPS[name]()
    if os.path.exists(name):
        return load_presentation(name)
    raise Refusal("UnknownGroup", f"no builtin group or generator file named {name!r}")


def _table(args):
    return cached_spectrum(_presentation(args.group), args.max_length, args.strategy, args.workers)


def _point(text):
    try:
        x, y = (float(v) for v in text.split(","))
        return HPoint(x, y)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'x,y' with y > 0, got {text!r}") from exc


def _grid(text):
    try:
        n, m = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}") from exc
    return n, m


# ------------------------------------------------------------------ commands


def cmd_spectrum(args):
    table = _table(args)
    if args.format == "json":
        rows = [(c.length, c.primitive_length, c.power, c.trace, c.word, c.multiplicity)
                for c in table.classes]
        return _json({"cutoff": table.cutoff, "strategy": args.strategy,
                      "classes": _records(CSV_HEADER, rows)})
    return table_to_csv(table)


def _series_rows(evals):
    return [(e.s.real, e.s.imag, e.value.real, e.value.imag, e.cutoff, e.term_count, e.tail_bound)
            for e in evals]


def cmd_series(args):
    if args.kind == "poincare":
        arcs = connecting_arcs(args.x, args.y, _presentation(args.group), args.max_length,
                               args.strategy, args.workers)
        evals = [poincare_two_point(arcs, s, args.max_length) for s in args.s]
    else:
        table = _table(args)
        if args.kind == "eta":
            evals = [eta_theta(table, args.theta, s) for s in args.s]
        else:
            evals = [ruelle_logderiv(table, args.eps, s) for s in args.s]
    if args.gnuplot:
        with open(args.gnuplot, "w", newline="\n") as fh:
            for e in evals:
                fh.write(f"{_num(e.s.real)} {_num(e.value.real)}\n")
    return _emit(args, SERIES_COLUMNS, _series_rows(evals))


def _random_isometry(rng):
    a = rng.normal(size=(2, 2))
    if np.linalg.det(a) < 0:
        a[0] *= -1.0
    return MobiusTransform.from_array(a)


def cmd_twisted(args):
    rng = np.random.default_rng(args.seed)
    if args.random:
        pairs = [(rng.uniform(-2.5, 2.5), rng.uniform(0.5, 6.0)) for _ in range(args.random)]
    else:
        pairs = [(th, ell) for th in args.theta for ell in args.ell]
    rows = []
    for th, ell in pairs:
        h = _random_isometry(rng)
        g = h @ MobiusTransform.translation(ell) @ h.inverse()
        orbit = shoot_twisted_arc(g, th)
        r = rho(th, ell)
        rows.append((th, ell, orbit.t, r, abs(orbit.t - r), transversal_index(orbit)))
    return _emit(args, TWISTED_COLUMNS, rows)


def cmd_transversality(args):
    profile = TwistProfile(args.ell)
    report = scan(profile, args.grid)
    out = report.as_dict()
    if args.theta is not None:
        rot = rotation_near_identity_check(args.theta, profile, args.grid)
        out["rotation"] = {"theta": rot.theta, "min_displacement": rot.min_displacement,
                           "min_margin": rot.min_margin, "fixed_point_free": rot.fixed_point_free}
    return _json(out)


def cmd_lefschetz(args):
    action = MappingClass.parse(args.twists).action(args.genus)
    if args.hyperelliptic:
        action = H1Action.hyperelliptic(args.genus) @ action
    return _json({"trace": action.trace, "lefschetz": lefschetz_number(action),
                  "residue_prediction": residue_prediction(action, args.theta, seed=args.seed)})


def cmd_arcs(args):
    arcs = connecting_arcs(args.x, args.y, _presentation(args.group), args.max_length,
                           args.strategy, args.workers)
    rows = [(a.length, a.word, a.endpoints[1].x, a.endpoints[1].y) for a in arcs]
    return _emit(args, ARC_COLUMNS, rows)


def cmd_residue_probe(args):
    table = _table(args)
    rows = [(r.s, r.s_eta, r.eta, r.cutoff, r.terms, r.tail_bound)
            for r in residue_probe(table, args.theta, args.s)]
    return _emit(args, PROBE_COLUMNS, rows)


def cmd_selftest(args):
    from .selftest import run

    results = run(seed=args.seed)
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    failed = sum(not ok for _, ok, _ in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    text = "\n".join(lines) + "\n"
    if failed:
        raise Refusal("SelftestFailed", f"{failed} selftest checks failed", report=text)
    return text


# -------------------------------------------------------------------- parser


def _add_common(p, spectrum=True):
    p.add_argument("--group", default="bolza", help="builtin group name or generator file")
    p.add_argument("--strategy", choices=STRATEGIES, default="word-bfs")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    if spectrum:
        p.add_argument("--max-length", type=float, required=True)


def build_parser():
    parser = argparse.ArgumentParser(prog="twistlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="closed geodesic length spectrum")
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("series", help="evaluate a dynamical series")
    p.add_argument("kind", choices=("eta", "ruelle", "poincare"))
    _add_common(p)
    p.add_argument("--s", type=complex, action="append", required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--x", type=_point, default=HPoint(0.1, 1.05))
    p.add_argument("--y", type=_point, default=HPoint(-0.15, 0.9))
    p.add_argument("--gnuplot", help="also write 's value' columns here")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("twisted", help="Newton-found twisted orbits vs the closed form")
    _add_common(p, spectrum=False)
    p.add_argument("--theta", type=float, action="append", default=[])
    p.add_argument("--ell", type=float, action="append", default=[])
    p.add_argument("--random", type=int, default=0, help="number of seeded random pairs")
    p.set_defaults(func=cmd_twisted)

    p = sub.add_parser("transversality", help="collar Dehn-twist condition scan")
    _add_common(p, spectrum=False)
    p.add_argument("--ell", type=float, required=True)
    p.add_argument("--grid", type=_grid, default=(64, 64))
    p.add_argument("--theta", type=float, default=None)
    p.set_defaults(func=cmd_transversality)

    p = sub.add_parser("lefschetz", help="Lefschetz number and residue prediction")
    _add_common(p, spectrum=False)
    p.add_argument("--twists", default="")
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--hyperelliptic", action="store_true", help="compose with -I")
    p.set_defaults(func=cmd_lefschetz)

    p = sub.add_parser("arcs", help="geodesic arcs between two points")
    _add_common(p)
    p.add_argument("--x", type=_point, default=HPoint(0.1, 1.05))
    p.add_argument("--y", type=_point, default=HPoint(-0.15, 0.9))
    p.set_defaults(func=cmd_arcs)

    p = sub.add_parser("residue-probe", help="s * eta_theta(s) approaching the abscissa")
    _add_common(p)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--s", type=float, action="append", required=True)
    p.set_defaults(func=cmd_residue_probe)

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_selftest)
    return parser


def _fail(code, kind, message, **extra):
    payload = {"error": kind, "message": message}
    payload.update(extra)
    sys.stderr.write(json.dumps(payload, sort_keys=True, default=str) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except CacheCorruptError as exc:
        return _fail(3, "CacheCorrupt", str(exc), path=str(exc.path))
    except Refusal as exc:
        return _fail(1, exc.kind, str(exc), **exc.extra)
    except (SeriesRefusal, SpectrumError, GeometryError, ShootingError, ResidueRefusal,
            TransversalityError, ValueError) as exc:
        return _fail(1, type(exc).__name__, str(exc))
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
