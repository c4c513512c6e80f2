import pytest
from hypothesis import settings

from byzfuse.model import HumanThresholdDist, OperatingPoint, SignalModel

settings.register_profile("default", max_examples=1000, deadline=None)
settings.load_profile("default")


@pytest.fixture
def model():
    return SignalModel(mu0=0.0, mu1=4.0, var0=2.0, var1=2.0)


@pytest.fixture
def dist():
    return HumanThresholdDist(mu_tau=2.0, sigma_tau=2.0)


@pytest.fixture
def sensor_op():
    from oracles import DEFAULT_SENSOR_OP

    return OperatingPoint(*DEFAULT_SENSOR_OP)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
