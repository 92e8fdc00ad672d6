"""Collects acceptance outcomes and prints one line per criterion."""

_outcomes: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            entry = _outcomes.setdefault(number, {"title": title, "failed": [], "passed": 0, "ran": 0})
            entry["ran"] += 1


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    entry = _outcomes[mark.args[0]]
    if call.excinfo is None:
        entry["passed"] += 1
    else:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        e = _outcomes[number]
        if e["failed"]:
            status = "FAIL"
        elif e["passed"] == e["ran"]:
            status = "PASS"
        else:
            status = "SKIP"
        line = f"criterion {number:2d} {status}  {e['title']}"
        if e["failed"]:
            line += f"  (failed: {', '.join(e['failed'])})"
        terminalreporter.write_line(line)
