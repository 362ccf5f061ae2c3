import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "repo", derandomize=True, deadline=None, print_blob=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

from epitrack.development import DevConfig  # noqa: E402
from epitrack.genome import GenomeConfig  # noqa: E402


@pytest.fixture
def busy_config():
    """Small genomes whose genes mostly hit the zygote or its first children."""
    return GenomeConfig(n_dev=12, n_met=10, substances=4, num_stages=4, max_axis=6,
                        max_code_depth=1, max_event_ordinal=2, max_child_index=8,
                        initial_active_dev=12)


@pytest.fixture
def small_grid():
    return DevConfig(dims=(32, 32, 32), driver_spacing=3)


_VERDICTS: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record one acceptance line: ``verdict(n, ok, detail)``."""
    def record(n: int, ok: bool, detail: str, enforced: bool = True) -> None:
        status = "PASS" if ok else ("FAIL" if enforced else "NOT MET (reported)")
        line = f"criterion {n}: {status}  {detail}"
        _VERDICTS[n] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance")
        for n in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[n])
