import pytest

from manipkit.derive import derive_all
from manipkit.robots import parse_robot_description
from manipkit.synth import ARM6_XML, PLANAR2_XML, make_episode


@pytest.fixture(scope="session")
def arm6():
    return parse_robot_description(ARM6_XML)


@pytest.fixture(scope="session")
def planar2():
    return parse_robot_description(PLANAR2_XML)


@pytest.fixture(scope="session")
def derived_episode(arm6):
    """One fully annotated and derived episode, shared read-only."""
    return derive_all(make_episode("ep_fixture", seed=3), arm6)
