import numpy as np
import pytest

from caloric.caloricpoly import CaloricPolynomial, heat_polynomial


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def h1():
    return heat_polynomial(1, n=1)


@pytest.fixture
def xy():
    return CaloricPolynomial.from_spec({"n": 2, "terms": [{"alpha": [1, 1], "coef": "1"}]})


# ---------------------------------------------------------------------------
# acceptance summary: one pass/fail line per criterion after the run
# ---------------------------------------------------------------------------

ACCEPTANCE: dict = {}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.passed, self.detail = False, "did not complete"

    def __call__(self, passed: bool, detail: str) -> bool:
        self.passed, self.detail = bool(passed), detail
        return self.passed

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d}. {self.title}: {self.detail}"


@pytest.fixture
def criterion(request):
    made = []

    def make(number: int, title: str) -> Criterion:
        c = Criterion(number, title)
        made.append(c)
        return c

    yield make
    for c in made:
        ACCEPTANCE[(c.number, c.title)] = c
        print(c.line())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n].line())
