import cmath
import os
import random

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=50, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("MARKOFF_CACHE_DIR", str(tmp_path / "cache"))


def random_complex(rng: random.Random, re=(-6, 6), im=(-3, 3)) -> complex:
    return complex(rng.uniform(*re), rng.uniform(*im))


def random_admissible_triple(rng: random.Random):
    """Random complex triple with mu away from 0 and 4 and x^2, y^2, z^2 away from mu."""
    while True:
        x, y, z = (random_complex(rng) for _ in range(3))
        mu = x * x + y * y + z * z - x * y * z
        if abs(mu) < 0.05 or abs(mu - 4) < 0.05:
            continue
        if min(abs(v * v - mu) for v in (x, y, z)) < 0.05:
            continue
        return x, y, z


def close_mod(a: complex, b: complex, period: complex = 2j * cmath.pi) -> float:
    """Distance from a - b to the nearest multiple of ``period``."""
    k = round(((a - b) / period).real)
    return abs(a - b - k * period)


def random_bq_maps(rng: random.Random, count: int, budget: int = 20_000):
    """``count`` random maps that check_bq certifies, with their verdicts."""
    from markoff.bq_analyzer import check_bq
    from markoff.markoff_engine import from_triple

    out = []
    while len(out) < count:
        m = from_triple(*random_admissible_triple(rng))
        v = check_bq(m, budget=budget)
        if v.status == "Satisfied":
            out.append((m, v))
    return out


# One line per acceptance criterion, repeated at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
