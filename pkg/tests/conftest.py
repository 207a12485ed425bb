import importlib.resources

import pytest

from ocprelax import compactify, load_problem


def problem_path(name):
    return importlib.resources.files("ocprelax") / "problems" / f"{name}.ocp"


@pytest.fixture(scope="session")
def jump_problem():
    return load_problem(problem_path("jump"))


@pytest.fixture(scope="session")
def jump_compactified(jump_problem):
    return compactify(jump_problem)


@pytest.fixture(scope="session")
def osc_problem():
    return load_problem(problem_path("osc"))


@pytest.fixture(scope="session")
def conc_problem():
    return load_problem(problem_path("conc"))
