import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion_report():
    """Record a one-line PASS/FAIL verdict, printed again in the terminal summary."""

    def report(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} | {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
