import os

# keep worker pools small and deterministic under the test runner
os.environ.setdefault("BOGOMOLOV_WORKERS", str(min(4, os.cpu_count() or 1)))

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
