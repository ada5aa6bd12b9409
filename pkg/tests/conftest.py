import pytest

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _ACCEPTANCE_RESULTS.append((name, report.outcome))
    elif report.when == "setup" and report.outcome == "skipped":
        _ACCEPTANCE_RESULTS.append((name, "skipped"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{label}  {name}")


@pytest.fixture
def tmp_jsonl(tmp_path):
    """Write JSON-serializable records to a temp JSONL file."""
    import json

    def write(name, records):
        path = tmp_path / name
        with path.open("w", encoding="utf-8") as handle:
            for record in records:
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        return path

    return write
