import pytest

from xfer.harness import demo_model, demo_pipeline, demo_sources

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def pipeline():
    return demo_pipeline()


@pytest.fixture(scope="session")
def seed_model():
    return demo_model()


@pytest.fixture(scope="session")
def sources():
    return demo_sources()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
