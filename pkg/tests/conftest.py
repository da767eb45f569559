import pytest

_acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if "test_acceptance" not in item.nodeid:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        detail = dict(item.user_properties).get("measured", "")
        _acceptance.append((rep.outcome, doc, detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, doc, detail in _acceptance:
        mark = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{mark}] {doc}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
