import sys


def pytest_terminal_summary(terminalreporter):
    for name, module in sys.modules.items():
        if name.endswith("test_acceptance"):
            results = getattr(module, "RESULTS", None)
            if results:
                terminalreporter.section("acceptance criteria")
                for line in results:
                    terminalreporter.write_line(line)
            break
