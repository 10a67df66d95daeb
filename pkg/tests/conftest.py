import pytest

from bccs.generate import enumerate_closed


@pytest.fixture(scope="session")
def small_terms():
    """AC-distinct closed tau-free terms: depth <= 2, <= 2 summands, over {a, b}."""
    return enumerate_closed("ab", 2)


@pytest.fixture(scope="session")
def tau_led_terms():
    """Depth <= 2 closed terms whose outermost prefixes may also be tau."""
    return enumerate_closed("ab", 2, top_actions=["a", "b", "tau"])


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the acceptance summary."""
    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
        _VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
