from fractions import Fraction

import pytest

from polyhf import hf2model as hm
from polyhf import reproduce as rp


@pytest.fixture(scope="session")
def config():
    return hm.HF2Config()


@pytest.fixture(scope="session")
def ctx(config):
    return rp.Context(config)


@pytest.fixture(scope="session")
def golden():
    return rp.load_golden()


@pytest.fixture(scope="session")
def functional(config):
    return hm.build_energy_functional(config)


@pytest.fixture(scope="session")
def fixed_r(ctx):
    sols, T = rp.solve_fixed_r(ctx)
    return sols, T, rp.fixed_r_generators(ctx)


@pytest.fixture(scope="session")
def rhf_opt(ctx):
    return rp.rhf_optimization(ctx)


@pytest.fixture(scope="session")
def ground_state(ctx):
    return rp.ground_state_solutions(ctx)


@pytest.fixture(scope="session")
def inverse(ctx):
    return rp.inverse_solutions(ctx, Fraction(9, 10))


CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    def record(number: int, ok: bool, text: str) -> bool:
        CRITERIA[number] = (ok, text)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {text}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, text = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
