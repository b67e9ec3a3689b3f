"""Closed geodesics of a cocompact Fuchsian group, enumerated up to a length cutoff.

Two enumeration strategies are available and are meant to cross-check each
other:

``word-bfs``
    breadth-first search over words in the generators, pruned geometrically,
    conjugacy classes merged by union-find over short conjugators.
``matrix-ball``
    best-first search ordered by Frobenius norm (``|g|^2 = 2 cosh d(i, g.i)``),
    conjugacy classes found by trace bucketing and an explicit conjugator search.
"""
import csv
import hashlib
import heapq
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .hyperbolic import (
    PARABOLIC_BAND,
    MobiusTransform,
    compose,
    distance,
    GeometryError,
    HPoint,
    NumericallyParabolicError,
    translation_length,
)

STRATEGIES = ("word-bfs", "matrix-ball")
DEFAULT_CAP = 14.0
DEFAULT_MARGIN = 4.0
MAX_ELEMENTS = 2e7
KEY_GRID = 1e-6
SAME_TOL = 1e-8
AMBIGUOUS_TOL = 1e-6
CSV_HEADER = ("ell", "ell_primitive", "power", "trace", "word", "multiplicity")


class SpectrumError(RuntimeError):
    """Base class for refusals raised by the enumeration."""


class CapExceededError(SpectrumError):
    def __init__(self, requested, cap, estimate):
        self.requested, self.cap, self.estimate = requested, cap, estimate
        super().__init__(
            f"cutoff {requested:g} exceeds cap {cap:g} (estimated {estimate:.3g} group elements)")


class ConjugacyAmbiguityError(SpectrumError):
    def __init__(self, gap):
        self.gap = gap
        super().__init__(
            f"two elements at entrywise distance {gap:.3g}, inside [{SAME_TOL:g}, {AMBIGUOUS_TOL:g}];"
            " use a smaller cutoff")


class CacheCorruptError(SpectrumError):
    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"corrupt cache file {path}: {reason}")


# ------------------------------------------------------------ presentations


@dataclass(frozen=True)
class SurfaceGroupPresentation:
    """Generators (lowercase symbols; uppercase are inverses) and one relator.

    ``margin`` must bound the circumradius of the Dirichlet domain centred at
    ``i``; it controls pruning and conjugator search.
    """

    genus: int
    generators: tuple
    relator: str
    symbols: str = ""
    margin: float = DEFAULT_MARGIN
    name: str = ""

    def __post_init__(self):
        if self.genus < 1:
            raise ValueError("genus must be positive")
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if not self.symbols:
            object.__setattr__(self, "symbols", "abcdefghijklmnopqrstuvwxyz"[: len(gens)])
        if len(self.symbols) != len(gens):
            raise ValueError("one symbol per generator is required")
        for s, g in zip(self.symbols, gens):
            try:
                translation_length(g)
            except GeometryError as exc:
                raise ValueError(f"generator {s} is not hyperbolic") from exc
        m = self.evaluate(self.relator).as_array()
        err = min(np.abs(m - [1, 0, 0, 1]).max(), np.abs(m + [1, 0, 0, 1]).max())
        if err > 1e-9:
            raise ValueError(f"relator {self.relator!r} evaluates {err:.3g} away from +-identity")

    @property
    def letters(self):
        return self.symbols + self.symbols.upper()

    def letter_matrices(self):
        gens = list(self.generators) + [g.inverse() for g in self.generators]
        return np.array([g.entries() for g in gens])

    def evaluate(self, word):
        table = dict(zip(self.letters, [*self.generators, *(g.inverse() for g in self.generators)]))
        out = MobiusTransform.identity()
        for ch in word:
            out = compose(out, table[ch])
        return out

    def digest(self):
        h = hashlib.sha256()
        for g in self.generators:
            h.update(" ".join(f"{v:.17g}" for v in g.entries()).encode())
            h.update(b"\n")
        h.update(f"relator:{self.relator};symbols:{self.symbols};margin:{self.margin:.17g}".encode())
        return h.hexdigest()[:16]

    def conjugated(self, h, margin=None):
        gens = tuple(compose(compose(h, g), h.inverse()) for g in self.generators)
        return SurfaceGroupPresentation(
            self.genus, gens, self.relator, self.symbols,
            self.margin if margin is None else margin, self.name)


def bolza_presentation():
    """Side pairings of the regular octagon with vertex angle pi/4, centred at ``i``."""
    ell0 = 2.0 * math.acosh(1.0 + math.sqrt(2.0))
    d = MobiusTransform.translation(ell0)
    gens = []
    for k in range(4):
        r = MobiusTransform.rotation(k * math.pi / 4)
        gens.append(compose(compose(r, d), r.inverse()))
    # circumradius: cosh r = cot^2(pi/8) = 3 + 2 sqrt 2
    circumradius = math.acosh(3.0 + 2.0 * math.sqrt(2.0))
    return SurfaceGroupPresentation(
        genus=2, generators=tuple(gens), relator="aBcDAbCd", symbols="abcd",
        margin=circumradius + 1e-9, name="bolza")


def load_presentation(path):
    """Read a generator file: one ``a b c d`` matrix per line, ``relator:`` line,
    optional ``genus:``/``margin:``/``symbols:`` lines, ``#`` comments."""
    gens, meta = [], {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line:
            k, v = line.split(":", 1)
            meta[k.strip().lower()] = v.strip()
            continue
        vals = [float(x) for x in line.split()]
        if len(vals) != 4:
            raise ValueError(f"expected four numbers per matrix line, got {line!r}")
        gens.append(MobiusTransform.from_entries(*vals))
    if "relator" not in meta:
        raise ValueError("generator file has no 'relator:' line")
    genus = int(meta.get("genus", len(gens) // 2))
    return SurfaceGroupPresentation(
        genus=genus, generators=tuple(gens), relator=meta["relator"],
        symbols=meta.get("symbols", ""), margin=float(meta.get("margin", DEFAULT_MARGIN)),
        name=Path(path).stem)


def dump_presentation(p):
    lines = [f"# {p.name or 'presentation'}", f"genus: {p.genus}", f"symbols: {p.symbols}",
             f"margin: {p.margin:.17g}"]
    lines += [" ".join(f"{v:.17g}" for v in g.entries()) for g in p.generators]
    lines.append(f"relator: {p.relator}")
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------------- balls


@dataclass(frozen=True)
class Ball:
    """Group elements ``g`` with ``distance(i, g.i) <= radius``, canonically ordered."""

    radius: float
    mats: np.ndarray
    words: tuple
    strategy: str

    def __len__(self):
        return len(self.words)

    @property
    def displacement(self):
        n2 = np.einsum("ij,ij->i", self.mats, self.mats)
        return np.arccosh(np.maximum(1.0, 0.5 * n2))

    def keys(self):
        return {tuple(k) for k in kernels.matrix_keys(self.mats, KEY_GRID).tolist()}

    def elements(self):
        return [MobiusTransform(*row) for row in self.mats.tolist()]


def estimated_count(radius, genus=2):
    """Area of the disc over area of the surface."""
    return (math.cosh(radius) - 1.0) / (2.0 * max(genus - 1, 1))


def _check_cap(p, requested, explore_radius, cap):
    estimate = estimated_count(explore_radius, p.genus)
    if requested > cap or estimate > MAX_ELEMENTS:
        raise CapExceededError(requested, cap, estimate)


def _sign_normalize(mats):
    keys = kernels.matrix_keys(mats, KEY_GRID)
    first = np.argmax(keys != 0, axis=1)
    raw = mats[np.arange(len(mats)), first]
    sign = np.where(raw < 0.0, -1.0, 1.0)
    return mats * sign[:, None]


def _word_of(idx, parent, gen, letters):
    out = []
    while parent[idx] >= 0:
        out.append(letters[gen[idx]])
        idx = parent[idx]
    return "".join(reversed(out))


def _bfs(p, prune_norm2, workers):
    gens = p.letter_matrices()
    mats = [np.array([[1.0, 0.0, 0.0, 1.0]])]
    parents = [np.array([-1], np.int64)]
    gen_ids = [np.array([-1], np.int64)]
    seen = kernels.KeySet()
    seen.add_new(kernels.matrix_keys(mats[0], KEY_GRID))
    frontier = mats[0]
    last = gen_ids[0]
    offset, total = 0, 1
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while len(frontier):
            chunks = np.array_split(np.arange(len(frontier)), max(1, min(workers, len(frontier))))
            if pool is None:
                parts = [kernels.expand(frontier[c], last[c], gens, prune_norm2) for c in chunks]
            else:
                parts = list(pool.map(
                    lambda c: kernels.expand(frontier[c], last[c], gens, prune_norm2), chunks))
            prods = np.concatenate([q[0] for q in parts])
            par = np.concatenate([q[1] + c[0] for q, c in zip(parts, chunks) if len(c)])
            gid = np.concatenate([q[2] for q in parts])
            new = seen.add_new(kernels.matrix_keys(prods, KEY_GRID))
            frontier = prods[new]
            last = gid[new]
            mats.append(frontier)
            parents.append(par[new] + offset)
            gen_ids.append(gid[new])
            offset = total
            total += len(frontier)
    finally:
        if pool is not None:
            pool.shutdown()
    return np.concatenate(mats), np.concatenate(parents), np.concatenate(gen_ids)


def _norm_ordered(p, prune_norm2):
    letters = p.letters
    gens = [tuple(row) for row in p.letter_matrices().tolist()]
    start = (1.0, 0.0, 0.0, 1.0)
    counter = 0
    heap = [(2.0, counter, start, "")]
    seen = {(1000000, 0, 0, 1000000)}
    out_m, out_w = [], []
    inv_grid = 1.0 / KEY_GRID
    while heap:
        _, _, m, w = heapq.heappop(heap)
        out_m.append(m)
        out_w.append(w)
        a0, b0, c0, d0 = m
        back = w[-1].swapcase() if w else ""
        for sym, (ga, gb, gc, gd) in zip(letters, gens):
            if sym == back:
                continue
            a = a0 * ga + b0 * gc
            b = a0 * gb + b0 * gd
            c = c0 * ga + d0 * gc
            d = c0 * gb + d0 * gd
            r = 1.0 / math.sqrt(a * d - b * c)
            a, b, c, d = a * r, b * r, c * r, d * r
            n2 = a * a + b * b + c * c + d * d
            if n2 > prune_norm2:
                continue
            key = [round(a * inv_grid), round(b * inv_grid), round(c * inv_grid), round(d * inv_grid)]
            lead = next((k for k in key if k != 0), 0)
            if lead < 0:
                key = [-k for k in key]
            key = tuple(key)
            if key in seen:
                continue
            seen.add(key)
            counter += 1
            heapq.heappush(heap, (n2, counter, (a, b, c, d), w + sym))
    return np.array(out_m), out_w


def _scale(mats):
    """Tolerance scale: entrywise float error grows with the entries."""
    return np.maximum(1.0, np.abs(mats).max(axis=-1))


def _merge_near_duplicates(mats, words):
    """Collapse rows closer than SAME_TOL (key-grid straddlers); refuse ambiguous pairs."""
    if len(mats) < 2:
        return mats, words
    tree = cKDTree(mats)
    pairs = tree.query_pairs(AMBIGUOUS_TOL * float(_scale(mats).max()), p=np.inf,
                             output_type="ndarray")
    if len(pairs) == 0:
        return mats, words
    gaps = np.abs(mats[pairs[:, 0]] - mats[pairs[:, 1]]).max(axis=1)
    gaps = gaps / _scale(mats[pairs[:, 0]])
    keep_pair = gaps < AMBIGUOUS_TOL
    pairs, gaps = pairs[keep_pair], gaps[keep_pair]
    bad = gaps >= SAME_TOL
    if bad.any():
        raise ConjugacyAmbiguityError(float(gaps[bad].min()))
    drop = set()
    for i, j in pairs.tolist():
        # keep the shorter word (then lexicographically smaller)
        wi, wj = words[i], words[j]
        drop.add(j if (len(wi), wi) <= (len(wj), wj) else i)
    keep = np.array([k for k in range(len(mats)) if k not in drop])
    return mats[keep], [words[k] for k in keep]


def enumerate_ball(p, radius, strategy="word-bfs", workers=1, cap=DEFAULT_CAP):
    """All group elements moving ``i`` by at most ``radius``."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    explore = radius + p.margin
    _check_cap(p, radius, explore, cap)
    prune_norm2 = 2.0 * math.cosh(explore) + 1e-9
    keep_norm2 = 2.0 * math.cosh(radius) * (1.0 + 1e-12) + 1e-12
    if strategy == "word-bfs":
        mats, parent, gen = _bfs(p, prune_norm2, max(1, int(workers)))
        n2 = np.einsum("ij,ij->i", mats, mats)
        idx = np.nonzero(n2 <= keep_norm2)[0]
        words = [_word_of(i, parent, gen, p.letters) for i in idx]
        mats = mats[idx]
    else:
        mats, words = _norm_ordered(p, prune_norm2)
        n2 = np.einsum("ij,ij->i", mats, mats)
        idx = np.nonzero(n2 <= keep_norm2)[0]
        mats, words = mats[idx], [words[i] for i in idx]
    mats = _sign_normalize(mats)
    mats, words = _merge_near_duplicates(mats, words)
    keys = kernels.matrix_keys(mats, KEY_GRID)
    order = np.lexsort(keys.T[::-1])
    return Ball(radius, mats[order], tuple(words[i] for i in order), strategy)


# ---------------------------------------------------------------- spectrum


@dataclass(frozen=True)
class ClosedGeodesicClass:
    length: float
    primitive_length: float
    power: int
    trace: float
    word: str
    multiplicity: int = 1

    def __post_init__(self):
        if not abs(self.trace) > 2.0:
            raise ValueError("closed geodesic classes need |trace| > 2")
        if self.power < 1 or abs(self.power * self.primitive_length - self.length) > 1e-9:
            raise ValueError("length must equal power * primitive_length")


@dataclass(frozen=True)
class SpectrumTable:
    cutoff: float
    classes: tuple
    provenance: str
    presentation: str = ""
    genus: int = 2

    @property
    def lengths(self):
        return np.array([c.length for c in self.classes])

    @property
    def primitive_lengths(self):
        return np.array([c.primitive_length for c in self.classes])

    def __len__(self):
        return len(self.classes)


def search_radius(p, cutoff):
    """Displacement bound for an element of length <= cutoff whose axis passes
    within ``p.margin`` of ``i``: ``sinh(d/2) = cosh(dist) sinh(ell/2)``."""
    return 2.0 * math.asinh(math.cosh(p.margin) * math.sinh(0.5 * cutoff)) + 1e-9


def _candidates(ball, p, cutoff):
    mats = ball.mats
    tr = np.abs(mats[:, 0] + mats[:, 3])
    near2 = np.abs(tr - 2.0) <= PARABOLIC_BAND
    ident = near2 & (np.abs(mats[:, 1]) <= PARABOLIC_BAND) & (np.abs(mats[:, 2]) <= PARABOLIC_BAND)
    if (near2 & ~ident).any():
        raise NumericallyParabolicError("ball contains an element with |trace| within 1e-9 of 2")
    hyp = tr > 2.0 + PARABOLIC_BAND
    ell = np.zeros(len(mats))
    ell[hyp] = 2.0 * np.arccosh(0.5 * tr[hyp])
    disp = ball.displacement
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.sinh(0.5 * disp) / np.sinh(0.5 * ell)
    to_axis = np.arccosh(np.maximum(1.0, np.where(hyp, ratio, 1.0)))
    sel = hyp & (ell <= cutoff + 1e-9) & (to_axis <= p.margin + 1e-9)
    return np.nonzero(sel)[0], ell, tr


class _Lookup:
    """Projective nearest-neighbour lookup among a fixed set of matrices."""

    def __init__(self, mats):
        self.tree = cKDTree(mats) if len(mats) else None

    def find(self, queries):
        out = np.full(len(queries), -1, np.int64)
        if self.tree is None or not len(queries):
            return out
        scale = _scale(queries)
        for sgn in (1.0, -1.0):
            dist, idx = self.tree.query(sgn * queries, k=1, p=np.inf,
                                        distance_upper_bound=AMBIGUOUS_TOL * float(scale.max()))
            rel = dist / scale
            hit = rel < AMBIGUOUS_TOL
            amb = hit & (rel >= SAME_TOL)
            if amb.any():
                raise ConjugacyAmbiguityError(float(rel[amb].min()))
            out[hit] = idx[hit]
        return out


def _classes_union_find(smats, conjugators):
    n = len(smats)
    parent = np.arange(n)

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    look = _Lookup(smats)
    for i in range(n):
        hits = look.find(kernels.conjugate(conjugators, smats[i]))
        for j in hits[hits >= 0].tolist():
            ri, rj = root(i), root(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    return np.array([root(i) for i in range(n)])


def _classes_conjugator_search(smats, ell, ball_mats, ball_disp, margin):
    n = len(smats)
    label = np.full(n, -1, np.int64)
    tr = np.abs(smats[:, 0] + smats[:, 3])
    order = np.argsort(tr, kind="stable")
    # trace buckets: runs of traces agreeing to SAME_TOL relative
    breaks = np.nonzero(np.diff(tr[order]) > SAME_TOL * np.maximum(1.0, tr[order][1:]))[0] + 1
    for bucket in np.split(order, breaks):
        bucket = np.sort(bucket)
        look = _Lookup(smats[bucket])
        reach = 0.5 * ell[bucket].max() + 2.0 * margin + 1e-6
        conj = ball_mats[ball_disp <= reach]
        for pos, i in enumerate(bucket.tolist()):
            if label[i] >= 0:
                continue
            hits = look.find(kernels.conjugate(conj, smats[i]))
            members = bucket[hits[hits >= 0]]
            if (label[members] >= 0).any():
                raise SpectrumError("conjugator search produced overlapping classes")
            label[members] = i
            label[i] = i
    return label


def spectrum(p, cutoff, strategy="word-bfs", workers=1, cap=DEFAULT_CAP):
    """Conjugacy classes of hyperbolic elements with translation length <= cutoff."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    radius = search_radius(p, cutoff)
    _check_cap(p, cutoff, radius + p.margin, cap)
    ball = enumerate_ball(p, radius, strategy, workers, cap=math.inf)
    sel, ell_all, tr_all = _candidates(ball, p, cutoff)
    smats = ball.mats[sel]
    sell = ell_all[sel]
    swords = [ball.words[i] for i in sel]
    if strategy == "word-bfs":
        conj = ball.mats[ball.displacement <= 2.0 * p.margin + 1e-6]
        label = _classes_union_find(smats, conj)
    else:
        label = _classes_conjugator_search(smats, sell, ball.mats, ball.displacement, p.margin)

    groups = {}
    for i, lab in enumerate(label.tolist()):
        groups.setdefault(lab, []).append(i)
    reps = []
    for members in groups.values():
        rep = min(members, key=lambda i: (len(swords[i]), swords[i]))
        reps.append(rep)
    # lengths that agree to 1e-8 form one level; inside a level order by word, so the
    # order does not depend on last-digit noise that differs between strategies
    reps.sort(key=lambda i: sell[i])
    level, prev, lev = {}, -math.inf, -1
    for i in reps:
        if sell[i] - prev > 1e-8:
            lev += 1
        level[i] = lev
        prev = sell[i]
    reps.sort(key=lambda i: (level[i], swords[i]))
    cls_of = {}
    for c, rep in enumerate(reps):
        for i in groups[label[rep]]:
            cls_of[i] = c

    power = [1] * len(reps)
    prim = [float(sell[r]) for r in reps]
    look = _Lookup(smats)
    for c, rep in enumerate(reps):
        if power[c] != 1:
            continue
        g = MobiusTransform(*smats[rep])
        gk = g
        k = 1
        while (k + 1) * sell[rep] <= cutoff + 1e-9:
            k += 1
            gk = compose(gk, g)
            hit = look.find(gk.as_array()[None, :])[0]
            if hit < 0:
                raise SpectrumError(f"power {k} of class {swords[rep]!r} missing from enumeration")
            target = cls_of[int(hit)]
            if power[target] != 1:
                raise SpectrumError("class marked as a power twice")
            power[target] = k
            prim[target] = float(sell[rep])

    lengths = np.array([sell[r] for r in reps])
    classes = []
    for c, rep in enumerate(reps):
        mult = int(np.count_nonzero(np.abs(lengths - lengths[c]) <= 1e-8))
        classes.append(ClosedGeodesicClass(
            length=float(sell[rep]), primitive_length=prim[c], power=power[c],
            trace=float(abs(smats[rep, 0] + smats[rep, 3])), word=swords[rep], multiplicity=mult))
    return SpectrumTable(cutoff, tuple(classes), strategy, p.digest(), p.genus)


# ------------------------------------------------------- counting / entropy


def counting(table, L):
    if L > table.cutoff + 1e-12:
        raise ValueError(f"L={L} exceeds the table cutoff {table.cutoff}")
    return int(np.count_nonzero(table.lengths <= L))


def entropy_estimate(table, samples=64):
    """Least-squares slope of log N(L) over the upper half of [0, cutoff]."""
    if len(table) < 10:
        raise ValueError("entropy estimate needs at least 10 classes")
    grid = np.linspace(0.5 * table.cutoff, table.cutoff, samples)
    counts = np.array([counting(table, x) for x in grid])
    if (counts == 0).any():
        raise ValueError("counting function vanishes on the upper half of the range")
    slope, _ = np.polyfit(grid, np.log(counts), 1)
    return float(slope)


def fit_growth(lengths, cutoff):
    """Fit ``N(L) ~ a exp(b L)`` to sorted-or-not ``lengths`` on [cutoff/2, cutoff]."""
    lengths = np.sort(np.asarray(lengths, dtype=float))
    grid = np.linspace(0.5 * cutoff, cutoff, 64)
    counts = np.searchsorted(lengths, grid, side="right")
    ok = counts > 0
    if ok.sum() < 2 or counts[ok][0] == counts[ok][-1]:
        return 0.0, 1.0
    b, loga = np.polyfit(grid[ok], np.log(counts[ok]), 1)
    return float(math.exp(loga)), float(b)


def growth_fit(table):
    return fit_growth(table.lengths, table.cutoff)


# ---------------------------------------------------------------- CSV/cache


def _fmt(x):
    return format(float(x), ".15g")


def table_to_csv(table):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in table.classes:
        w.writerow([_fmt(c.length), _fmt(c.primitive_length), c.power, _fmt(c.trace), c.word,
                    c.multiplicity])
    return buf.getvalue()


def table_from_csv(text, cutoff, provenance="", presentation="", genus=2, path="<string>"):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise CacheCorruptError(path, "missing or wrong header")
    classes = []
    try:
        for r in rows[1:]:
            classes.append(ClosedGeodesicClass(
                length=float(r[0]), primitive_length=float(r[1]), power=int(r[2]),
                trace=float(r[3]), word=r[4], multiplicity=int(r[5])))
    except (ValueError, IndexError) as exc:
        raise CacheCorruptError(path, str(exc)) from exc
    return SpectrumTable(cutoff, tuple(classes), provenance, presentation, genus)


def cache_root():
    return Path(os.environ.get("TWISTLAB_CACHE", "cache"))


def cache_path(p, cutoff, strategy, root=None):
    root = cache_root() if root is None else Path(root)
    return root / p.digest() / strategy / f"{_fmt(cutoff)}.csv"


def cached_spectrum(p, cutoff, strategy="word-bfs", workers=1, root=None, cap=DEFAULT_CAP):
    """Spectrum through the on-disk cache; the returned table is always the parsed CSV."""
    path = cache_path(p, cutoff, strategy, root)
    if path.exists():
        text = path.read_text()
    else:
        text = table_to_csv(spectrum(p, cutoff, strategy, workers, cap))
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    return table_from_csv(text, cutoff, strategy, p.digest(), p.genus, path)


def connecting_ball_radius(x, y, L):
    o = HPoint(0.0, 1.0)
    return L + distance(o, x) + distance(o, y) + 1e-9
