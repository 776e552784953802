import pytest

from zml.zeros import build_cache


@pytest.fixture(scope="session")
def cache_1k():
    """Certified bottom-anchored cache of every zero up to t ~ 1000."""
    cache, report = build_cache(1000.0)
    assert report.certified
    return cache, report
