import sys
from pathlib import Path

# allow running the suite straight from a checkout
_SRC = Path(__file__).resolve().parents[1] / "src"
try:
    import heomfigures  # noqa: F401
except ModuleNotFoundError:
    sys.path.insert(0, str(_SRC))

sys.path.insert(0, str(Path(__file__).resolve().parent))

import figtestlib


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if figtestlib._ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in figtestlib._ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
