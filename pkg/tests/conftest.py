from pathlib import Path

import pytest

from matchkit import parse, serialize

DATA = Path(__file__).parent / "data"

# Hand-annotated Bach BWV858 fugue excerpt.  Deliberately kept with its
# real-world dialect quirks (missing dots, unbracketed ptime, extra and
# run-on note fields) so the lenient repairs stay exercised end to end.
BWV858_PATH = DATA / "bwv858_excerpt.match"


@pytest.fixture(scope="session")
def bwv858_text() -> str:
    return BWV858_PATH.read_text()


@pytest.fixture(scope="session")
def bwv858(bwv858_text):
    """Leniently parsed excerpt: (document, diagnostics)."""
    return parse(bwv858_text)


@pytest.fixture(scope="session")
def bwv858_doc(bwv858):
    return bwv858[0]


@pytest.fixture(scope="session")
def bwv858_canonical(bwv858_doc) -> str:
    """The excerpt after repairs, serialized canonically."""
    return serialize(bwv858_doc)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    reports = []
    for key in ("passed", "failed"):
        reports += [r for r in terminalreporter.stats.get(key, []) if r.when == "call"]
    acceptance = sorted(
        (r for r in reports if "test_acceptance.py" in r.nodeid),
        key=lambda r: r.nodeid,
    )
    if not acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for report in acceptance:
        word = "PASS" if report.passed else "FAIL"
        terminalreporter.write_line(f"{word} {report.nodeid.split('::')[-1]}")
