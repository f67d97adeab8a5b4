import _support


def pytest_terminal_summary(terminalreporter):
    rows = sorted(_support.ACCEPTANCE_RESULTS)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in rows:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number} [{status}] {title}: {detail}")
