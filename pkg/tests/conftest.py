import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance scoreboard after capture has been released."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "SCOREBOARD", None)
    if lines:
        terminalreporter.section("acceptance scoreboard")
        for line in lines:
            terminalreporter.write_line(line)
