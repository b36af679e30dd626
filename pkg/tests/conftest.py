"""Echo the acceptance-criterion verdicts after the run, outside capture."""

import sys


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None) if module else None
    if not verdicts:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="-")
    for number in sorted(verdicts):
        terminalreporter.line(verdicts[number])
