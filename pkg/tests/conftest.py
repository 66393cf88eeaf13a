"""Shared agents for the test suite; building the Weyl groups once is enough."""

import pytest

from agents.grid_agent import GridAgent
from agents.lie_core_agent import LieCoreAgent
from agents.model_agent import ModelAgent
from agents.orbit_evaluation_agent import OrbitEvaluationAgent
from agents.transform_agent import TransformAgent
from agents.verification_agent import VerificationAgent


@pytest.fixture(scope="session")
def lie_core():
    return LieCoreAgent()


@pytest.fixture(scope="session")
def grid_agent(lie_core):
    return GridAgent(lie_core)


@pytest.fixture(scope="session")
def evaluator(lie_core, grid_agent):
    return OrbitEvaluationAgent(lie_core, grid_agent)


@pytest.fixture(scope="session")
def transform_agent(lie_core, grid_agent, evaluator):
    return TransformAgent(lie_core, grid_agent, evaluator, threads=2)


@pytest.fixture(scope="session")
def model_agent(transform_agent):
    return ModelAgent(transform_agent)


@pytest.fixture(scope="session")
def verification_agent(transform_agent):
    return VerificationAgent(transform_agent)
