import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

LABELS = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion, after the regular report."""
    lines = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            name = rep.nodeid.rsplit("::", 1)[-1]
            if "test_acceptance.py" not in rep.nodeid or not name.startswith("test_criterion_"):
                continue
            if outcome != "skipped" and rep.when != "call":
                continue
            number = int(name.split("_")[2])
            detail = dict(rep.user_properties).get("detail", "")
            if outcome == "skipped" and not detail and isinstance(rep.longrepr, tuple):
                detail = rep.longrepr[2]
            lines.append((number, f"criterion {number}: {LABELS[outcome]}  {detail}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
