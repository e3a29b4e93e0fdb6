import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" not in props or rep.when != "call" and outcome != "error":
                continue
            status = "PASS" if outcome == "passed" else "FAIL"
            lines.append((props["criterion"], status, props.get("elapsed_s"), props.get("limit_s")))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, elapsed, limit in sorted(lines):
        timing = "" if elapsed is None else f"  ({elapsed:.2f} s, limit {limit} s)"
        terminalreporter.write_line(f"{status}  {name}{timing}")
