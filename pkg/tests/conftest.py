"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import numpy as np
import pytest

from gumbel_phcs import AdaptiveCensoredSample, CensoringPlan, Params, generate, load_covid

TRUTH = Params(1.5, 0.75)


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption("--runslow", action="store_true", default=False, help="run the slow Monte Carlo checks")


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20231019)


@pytest.fixture(scope="session")
def covid() -> np.ndarray:
    return load_covid()


@pytest.fixture
def censored() -> AdaptiveCensoredSample:
    return generate(TRUTH, CensoringPlan.from_scheme(1, 30, 15, 1.5), 7)


@pytest.fixture
def adapted() -> AdaptiveCensoredSample:
    """A sample whose threshold falls at the third failure so the removals are altered."""
    progressive = generate(TRUTH, CensoringPlan.from_scheme(2, 30, 15), 11)
    plan = CensoringPlan(30, 15, float(progressive.times[2]), progressive.plan.removals)
    return AdaptiveCensoredSample.from_times(progressive.times, plan)
