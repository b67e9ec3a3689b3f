import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from oracles import SYSTOLE, brute_force_ball
from twistlab.hyperbolic import MobiusTransform
from twistlab.spectrum import (
    CSV_HEADER,
    CacheCorruptError,
    CapExceededError,
    ConjugacyAmbiguityError,
    SurfaceGroupPresentation,
    _Lookup,
    _merge_near_duplicates,
    cache_path,
    cached_spectrum,
    counting,
    dump_presentation,
    enumerate_ball,
    load_presentation,
    spectrum,
    table_from_csv,
    table_to_csv,
)

# (length, multiplicity, power) of the Bolza spectrum below 8, frozen from the
# agreement of the two enumeration strategies
BOLZA_LEVELS = [
    (3.0571418390, 24, 1),
    (4.8969048954, 24, 1),
    (5.8280707754, 48, 1),
    (6.1142836779, 24, 2),
    (6.6720062000, 96, 1),
    (7.1073761000, 48, 1),
    (7.2631630000, 48, 1),
    (7.5956920000, 8, 1),
    (7.8806920000, 96, 1),
]


def test_bolza_presentation(bolza):
    assert bolza.genus == 2 and len(bolza.generators) == 4
    m = bolza.evaluate(bolza.relator)
    assert m.isclose(MobiusTransform.identity(), 1e-12)
    for g in bolza.generators:
        assert 2.0 * math.acosh(abs(g.trace) / 2.0) == pytest.approx(SYSTOLE, abs=1e-12)


def test_bad_relator_rejected(bolza):
    with pytest.raises(ValueError):
        SurfaceGroupPresentation(2, bolza.generators, "abcdABCD")


def test_presentation_file_roundtrip(bolza, tmp_path):
    path = tmp_path / "bolza.txt"
    path.write_text(dump_presentation(bolza))
    again = load_presentation(path)
    assert again.relator == bolza.relator and again.digest() == bolza.digest()


@pytest.mark.parametrize("radius,count", [(3.1, 9), (6.0, 97)])
def test_ball_matches_brute_force(bolza, radius, count):
    brute = np.array(sorted(brute_force_ball(bolza, radius)))
    for strategy in ("word-bfs", "matrix-ball"):
        ball = enumerate_ball(bolza, radius, strategy)
        assert len(ball.mats) == len(brute) == count
        mats = ball.mats * np.where(ball.mats[:, :1] < 0, -1.0, 1.0)
        dist, _ = cKDTree(mats).query(brute, p=np.inf)
        assert dist.max() < 1e-6


def test_ball_strategies_agree(bolza):
    a = enumerate_ball(bolza, 7.5, "word-bfs")
    b = enumerate_ball(bolza, 7.5, "matrix-ball")
    assert np.array_equal(a.keys(), b.keys())


def test_dual_enumeration_L8(bolza8):
    a, b = bolza8["word-bfs"], bolza8["matrix-ball"]
    assert len(a) == len(b) == 416
    assert np.abs(np.sort(a.lengths) - np.sort(b.lengths)).max() < 1e-9
    # words may differ (equal elements reached along different words); the rest may not
    assert [(c.multiplicity, c.power) for c in a.classes] == [(c.multiplicity, c.power) for c in b.classes]
    assert np.abs(a.lengths - b.lengths).max() < 1e-9


def test_bolza_levels(bolza8):
    t = bolza8["word-bfs"]
    assert t.lengths.min() == pytest.approx(SYSTOLE, abs=1e-8)
    for ell, mult, power in BOLZA_LEVELS:
        near = [c for c in t.classes if abs(c.length - ell) < 1e-6]
        assert len(near) == mult
        assert all(c.multiplicity == mult and c.power == power for c in near)
    assert sum(m for _, m, _ in BOLZA_LEVELS) == len(t)


def test_class_invariants(bolza8):
    for c in bolza8["word-bfs"].classes:
        assert c.length == pytest.approx(2.0 * math.acosh(abs(c.trace) / 2.0), abs=1e-9)
        assert c.power * c.primitive_length == pytest.approx(c.length, abs=1e-9)
        if c.power == 2:
            assert c.primitive_length == pytest.approx(SYSTOLE, abs=1e-9)


def test_counting_monotone(bolza8):
    t = bolza8["word-bfs"]
    counts = [counting(t, x) for x in np.linspace(0, 8, 50)]
    assert counts == sorted(counts) and counts[0] == 0 and counts[-1] == len(t)
    with pytest.raises(ValueError):
        counting(t, 9.0)


def test_workers_deterministic(bolza):
    a = table_to_csv(spectrum(bolza, 7.0, workers=1))
    b = table_to_csv(spectrum(bolza, 7.0, workers=4))
    assert a == b


def test_cap_refusal(bolza):
    with pytest.raises(CapExceededError) as info:
        spectrum(bolza, 20.0)
    assert info.value.estimate > 0
    with pytest.raises(CapExceededError):
        enumerate_ball(bolza, 30.0, cap=math.inf)


def test_csv_format(bolza6):
    text = table_to_csv(bolza6["word-bfs"])
    lines = text.split("\n")
    assert tuple(lines[0].split(",")) == CSV_HEADER
    assert "\r" not in text and text.endswith("\n")
    back = table_from_csv(text, 6.0)
    assert np.abs(back.lengths - bolza6["word-bfs"].lengths).max() < 1e-13


def test_cache_roundtrip_and_corruption(bolza, tmp_path):
    t1 = cached_spectrum(bolza, 5.0, root=tmp_path)
    path = cache_path(bolza, 5.0, "word-bfs", tmp_path)
    assert path.exists()
    t2 = cached_spectrum(bolza, 5.0, root=tmp_path)
    assert table_to_csv(t1) == table_to_csv(t2)
    path.write_text("ell,nonsense\n1,2\n")
    with pytest.raises(CacheCorruptError) as info:
        cached_spectrum(bolza, 5.0, root=tmp_path)
    assert info.value.path == str(path)


def test_ambiguity_is_loud():
    base = np.array([[2.0, 1.0, 1.0, 1.0]])
    near = base + np.array([[3e-7, 0.0, 0.0, 0.0]])
    with pytest.raises(ConjugacyAmbiguityError):
        _merge_near_duplicates(np.vstack([base, near]), ["a", "b"])
    with pytest.raises(ConjugacyAmbiguityError):
        _Lookup(base).find(near)
    same = base + 1e-12
    mats, words = _merge_near_duplicates(np.vstack([base, same]), ["ab", "a"])
    assert words == ["a"]
    assert _Lookup(base).find(-same)[0] == 0
