import pytest

from bbupool.cost_models import CostModelParams

EXAMPLE_ALPHA = {25: 700.0, 50: 1200.0, 100: 2000.0}
EXAMPLE_BETA = {m: 30.0 + 2.0 * m for m in range(28)}
EXAMPLE_BETA.update({10: 50.0, 27: 100.0})


def service_params(service_us, f=3.5, prb=100, mcs=27):
    """Single-cell params whose subframe time at ``f`` equals ``service_us``."""
    alpha = 700.0
    return CostModelParams(alpha_prb={prb: alpha}, beta_mcs={mcs: service_us - alpha / f - 2.508})


@pytest.fixture
def example_params():
    return CostModelParams(alpha_prb=EXAMPLE_ALPHA, beta_mcs=EXAMPLE_BETA)


_criteria = []


def record_criterion(line):
    _criteria.append(line)


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in _criteria:
            terminalreporter.write_line(line)
