import pytest
from hypothesis import HealthCheck, settings

from typesemi.action import builtin_systems

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def systems():
    return builtin_systems()


@pytest.fixture(params=["z4", "odometer2", "shift2", "f2"])
def system(request):
    return builtin_systems()[request.param]


_ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record one line per acceptance criterion; printed in the terminal summary."""

    def record(n: int, ok: bool, detail: str) -> bool:
        _ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_ACCEPTANCE[n])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
