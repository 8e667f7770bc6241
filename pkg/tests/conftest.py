def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(REPORT):
        terminalreporter.write_line(REPORT[n])
