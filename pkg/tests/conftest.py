import os

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(autouse=True, scope="session")
def _isolated_cache(tmp_path_factory):
    root = tmp_path_factory.mktemp("cache")
    old = os.environ.get("TWISTLAB_CACHE")
    os.environ["TWISTLAB_CACHE"] = str(root)
    yield root
    if old is None:
        os.environ.pop("TWISTLAB_CACHE", None)
    else:
        os.environ["TWISTLAB_CACHE"] = old


@pytest.fixture(scope="session")
def bolza():
    from twistlab.spectrum import bolza_presentation

    return bolza_presentation()


@pytest.fixture(scope="session")
def bolza8(bolza):
    from twistlab.spectrum import spectrum

    return {s: spectrum(bolza, 8.0, s) for s in ("word-bfs", "matrix-ball")}


@pytest.fixture(scope="session")
def bolza6(bolza):
    from twistlab.spectrum import spectrum

    return {s: spectrum(bolza, 6.0, s) for s in ("word-bfs", "matrix-ball")}
