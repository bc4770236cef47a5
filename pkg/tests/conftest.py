import sys
import functools

import numpy as np
import pytest

from mixbath import (BathIntegralTable, QuadratureSpec, evolve_closed_form, evolve_diffusion,
                     reference_scenario, solve_roots, time_grid)

SYSTEMS = {
    "ff1f2": ("fermi", ("fermi", "fermi")),
    "bb1b2": ("bose", ("bose", "bose")),
    "fb1f2": ("fermi", ("bose", "fermi")),
    "bf1b2": ("bose", ("fermi", "bose")),
}


@functools.lru_cache(maxsize=None)
def reference(name: str, temperatures=(1.0, 0.1)):
    system, baths = SYSTEMS[name]
    return reference_scenario(system, baths, temperatures=temperatures)


@functools.lru_cache(maxsize=None)
def reference_roots(name: str):
    return solve_roots(reference(name))


@functools.lru_cache(maxsize=None)
def reference_table(name: str, t_max: float = 50.0):
    return BathIntegralTable(reference_roots(name), reference(name), t_max, QuadratureSpec())


@functools.lru_cache(maxsize=None)
def default_grid():
    return time_grid(50.0, 0.005)


@functools.lru_cache(maxsize=None)
def closed_form(name: str):
    return evolve_closed_form(reference(name), default_grid(), reference_roots(name),
                              reference_table(name))


@functools.lru_cache(maxsize=None)
def diffusion(name: str):
    return evolve_diffusion(reference(name), default_grid(), reference_roots(name),
                            reference_table(name))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.OUTCOMES):
        terminalreporter.write_line(module.OUTCOMES[number])
