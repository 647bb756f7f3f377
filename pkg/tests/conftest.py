import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from desguard.attacks import build_ae_model, build_se_model, build_si_model
from desguard.systems import (
    actuator_demo_system,
    erasure_blocking_system,
    erasure_demo_system,
    insertion_demo_system,
    traffic_system,
)


@pytest.fixture(scope="session")
def actuator_demo():
    return actuator_demo_system()


@pytest.fixture(scope="session")
def actuator_model(actuator_demo):
    return build_ae_model(actuator_demo.plant, actuator_demo.supervisor, actuator_demo.vuln)


@pytest.fixture(scope="session")
def erasure_demo():
    return erasure_demo_system()


@pytest.fixture(scope="session")
def erasure_model(erasure_demo):
    return build_se_model(erasure_demo.plant, erasure_demo.supervisor, erasure_demo.vuln)


@pytest.fixture(scope="session")
def blocking_demo():
    return erasure_blocking_system()


@pytest.fixture(scope="session")
def blocking_model(blocking_demo):
    return build_se_model(blocking_demo.plant, blocking_demo.supervisor, blocking_demo.vuln)


@pytest.fixture(scope="session")
def insertion_demo():
    return insertion_demo_system()


@pytest.fixture(scope="session")
def insertion_model(insertion_demo):
    return build_si_model(insertion_demo.plant, insertion_demo.supervisor, insertion_demo.vuln)


@pytest.fixture(scope="session")
def traffic_ae():
    return traffic_system(vulnerable_actuators={"a2", "b2"})


@pytest.fixture(scope="session")
def traffic_ae_model(traffic_ae):
    return build_ae_model(traffic_ae.plant, traffic_ae.supervisor, traffic_ae.vuln)


@pytest.fixture(scope="session")
def traffic_se():
    return traffic_system(vulnerable_sensors={"a3", "b3"})


@pytest.fixture(scope="session")
def traffic_se_model(traffic_se):
    return build_se_model(traffic_se.plant, traffic_se.supervisor, traffic_se.vuln)


@pytest.fixture(scope="session")
def traffic_si():
    return traffic_system(vulnerable_sensors={"a4", "b4"})


@pytest.fixture(scope="session")
def traffic_si_model(traffic_si):
    return build_si_model(traffic_si.plant, traffic_si.supervisor, traffic_si.vuln)
