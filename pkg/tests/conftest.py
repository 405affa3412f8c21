from __future__ import annotations

import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def oracle() -> dict:
    return json.loads((DATA / "oracle.json").read_text())


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects (criterion, passed, detail) for the terminal summary."""

    def record(name: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE.append((name, bool(passed), detail))

    return record


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path_factory, monkeypatch):
    monkeypatch.setenv("LAB_CACHE_DIR", str(tmp_path_factory.getbasetemp() / "zeta-cache"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
