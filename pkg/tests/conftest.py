from fractions import Fraction

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def unit():
    from leibniz import build_dyadic_scheme
    return build_dyadic_scheme(0, 1)


@pytest.fixture
def half():
    return Fraction(1, 2)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, after the usual report."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call" or "test_acceptance" not in rep.nodeid:
                continue
            mine = [v for k, v in rep.user_properties if k == "acceptance"]
            lines += mine or [f"FAIL {rep.nodeid.split('::')[-1]}: raised before reporting"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].strip("C:")) if s.split()[1][1:-1].isdigit() else 99):
            terminalreporter.write_line(line)
