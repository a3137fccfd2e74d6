"""Prints one PASS/FAIL line per acceptance criterion at the end of a run."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for status, tag in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            if getattr(rep, "when", "call") != "call":
                continue
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            rows.append((name, tag, getattr(rep, "duration", 0.0)))
    if rows:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, tag, duration in sorted(rows):
            terminalreporter.write_line(f"[{tag}] {name} ({duration:.1f}s)")
