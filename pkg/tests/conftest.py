import pytest

from bibranch.graph import Instance

# vertex ids of the canonical fixture
S1, S2, T1, T2 = 0, 1, 2, 3
# arc indices a1..a4
A1, A2, A3, A4 = 0, 1, 2, 3


def make_e1():
    return Instance(4, {S1, S2}, {T1, T2},
                    [(S1, S2, 1), (S2, T1, 2), (S1, T2, 4), (T1, T2, 1)])


@pytest.fixture
def e1():
    return make_e1()


@pytest.fixture
def single():
    return Instance(2, {0}, {1}, [(0, 1, 3)])


@pytest.fixture
def isolated_s():
    """Vertex 1 in S has no way to reach T."""
    return Instance(3, {0, 1}, {2}, [(0, 2, 1)])


E1_TEXT = """\
# canonical fixture
p bibranch 4 4
s 0 1
t 2 3
a 0 1 1
a 1 2 2
a 0 3 4
a 2 3 1
"""


# acceptance results, filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


def record(number, title, ok, detail=""):
    ACCEPTANCE[number] = (bool(ok), title, detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[number]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
