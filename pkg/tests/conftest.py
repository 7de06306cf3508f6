import pytest

from sheetkg.fixtures import (
    build_example_session, example_csv_bytes, example_workbook_bytes,
)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """One visible pass/fail line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and report.when == "call":
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {verdict}: {marker.args[0]}")


@pytest.fixture(scope="session")
def example_bytes() -> bytes:
    return example_workbook_bytes()


@pytest.fixture(scope="session")
def example_csv() -> bytes:
    return example_csv_bytes()


@pytest.fixture(scope="session")
def example_session():
    """Fully annotated example session, shared across read-only tests."""
    session, wb, out = build_example_session()
    return session, wb, out


@pytest.fixture()
def fresh_session():
    """A mutable copy of the annotated example session."""
    session, wb, out = build_example_session()
    return session, wb, out
