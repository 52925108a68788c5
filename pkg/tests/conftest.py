import functools

import pytest

from wave_sharp.propagator import RadialProfile, WaveData, halfwaves_from_data, st_l4

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def star_l4(d: int):
    """Converged space-time grid for e^{-r}/r in dimension d (shared across tests)."""
    return st_l4([(RadialProfile.extremal(), +1)], d, 1e-5)


@functools.lru_cache(maxsize=None)
def corollary_pair():
    u1 = RadialProfile.single(4 * 3.141592653589793 ** 2 / 3, 0.0, 1.0)
    data = WaveData(RadialProfile(()), u1, 4)
    pair = halfwaves_from_data(data)
    return data, pair, st_l4(pair.waves(), 4, 1e-5)


@pytest.fixture
def record_acceptance():
    def record(number: int, title: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"AC{number:02d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
