import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    results = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_ac" not in nodeid:
                continue
            name = nodeid.split("::")[1].split("[")[0]
            key = name[len("test_"):].split("_")[0].upper()
            ok = results.get(key, (name, True))[1] and outcome == "passed"
            results[key] = (name, ok)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=lambda k: int(k[2:])):
        name, ok = results[key]
        terminalreporter.write_line(f"{key:<4} {'PASS' if ok else 'FAIL'}  {name}")
