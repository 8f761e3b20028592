import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

# compiled kernels make first calls slow; timing is not what these tests check
settings.register_profile("default", deadline=None)
settings.load_profile("default")

# criterion number -> (title, [(part, ok, detail)])
_ACCEPTANCE: dict[int, tuple[str, list]] = {}


@pytest.fixture
def acceptance():
    """Record the outcome of one part of a numbered acceptance criterion."""

    def record(number: int, title: str, part: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.setdefault(number, (title, []))[1].append((part, bool(ok), detail))
        print(f"criterion {number} [{part}]: {'PASS' if ok else 'FAIL'} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, parts = _ACCEPTANCE[number]
        ok = all(p[1] for p in parts)
        failed = [f"{p[0]}: {p[2]}" for p in parts if not p[1]]
        line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'}"
        if failed:
            line += " (" + "; ".join(failed) + ")"
        tr.write_line(line)
        for part, pok, detail in parts:
            tr.write_line(f"    {'pass' if pok else 'FAIL'}  {part}  {detail}")
