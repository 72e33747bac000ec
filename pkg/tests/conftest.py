import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from amsplace.model import DistanceSpec, Instance, Net, Rect, Variant

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def rects(*dims):
    """Rects from ``(w, h)`` tuples or lists of them (one variant list each)."""
    out = []
    for k, d in enumerate(dims):
        vs = d if isinstance(d, list) else [d]
        out.append(Rect(k, tuple(Variant(w, h) for w, h in vs), f"r{k}"))
    return tuple(out)


def make(dims, overrides=None, default=0, nets=(), **kw):
    return Instance(
        rects(*dims),
        DistanceSpec(default, dict(overrides or {})),
        tuple(Net(frozenset(m), c) for m, c in nets),
        **kw,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
