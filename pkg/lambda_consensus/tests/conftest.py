"""
Shared fixtures for the lambda_consensus test suite
"""

import pytest

from lambda_consensus.engine.runtime import RunConfig
from lambda_consensus.objects.shared_memory import new_register_file


@pytest.fixture
def make_cfg():
    """Build a RunConfig from keyword fields, inputs given as a list."""

    def build(n, k, f, inputs, **fields):
        return RunConfig(n=n, k=k, f=f, inputs=tuple(inputs), **fields)

    return build


@pytest.fixture
def solo_cfg(make_cfg):
    return make_cfg(1, 0, 0, [7])


@pytest.fixture
def pair_cfg(make_cfg):
    """Two processes, one lambda-constrained crash (lambda = 1)."""
    return make_cfg(2, 1, 1, [0, 1])


@pytest.fixture
def pair_file():
    return new_register_file(2, 1)
