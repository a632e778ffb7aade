import numpy as np
import pytest

from fpqaoa import _kernels


@pytest.fixture(params=sorted(_kernels.BACKENDS))
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20251016)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE_KEY, {})


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(ACCEPTANCE_KEY, None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(log):
        ok, text = log[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {text}")
