"""Shared fixtures: the two reference models and their solved states.

Session scope keeps kernel quadrature and descent runs to one evaluation
each; every test that needs a solved ground state reuses the same report.
"""

import pytest

from lattice_choquard import (
    ConstantPotential,
    LatticeSpec,
    ModelSpec,
    SumOfPowers,
    make_context,
    minimize_ground_state,
)


def make_model(dim, radius, p, alpha, q, a=1.0, potential=None):
    return ModelSpec(
        lattice=LatticeSpec(dim, radius),
        p=p,
        alpha=alpha,
        potential=potential if potential is not None else ConstantPotential(1.0),
        nonlinearity=SumOfPowers(((a, q),)),
    )


@pytest.fixture(scope="session")
def model_a():
    # 1d reference model: p=2, alpha=0.5, single quartic power, h constant
    return make_model(1, 8, 2.0, 0.5, 4.0)


@pytest.fixture(scope="session")
def model_b():
    # 2d reference model: p=3, alpha=1, single quartic power, h constant
    return make_model(2, 6, 3.0, 1.0, 4.0)


@pytest.fixture(scope="session")
def ctx_a(model_a):
    return make_context(model_a)


@pytest.fixture(scope="session")
def ctx_b(model_b):
    return make_context(model_b)


@pytest.fixture(scope="session")
def ctx_tiny():
    # 7 sites: small enough for the dense oracle, rich enough to carry
    # several distinct critical levels
    return make_context(make_model(1, 3, 2.0, 0.5, 4.0))


@pytest.fixture(scope="session")
def report_a(ctx_a):
    return minimize_ground_state(ctx_a)


@pytest.fixture(scope="session")
def report_b(ctx_b):
    return minimize_ground_state(ctx_b)
