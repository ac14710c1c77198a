import numpy as np
import pytest

from lpn_sparsity import GammaSpec, make_field


@pytest.fixture
def f2():
    return make_field(2)


@pytest.fixture
def f3():
    return make_field(3)


@pytest.fixture
def f5():
    return make_field(5)


@pytest.fixture
def gamma2():
    return GammaSpec("affine", 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = {}


@pytest.fixture
def acceptance(request):
    """Record one criterion's verdict: ``acceptance(cid, ok, detail)``."""
    results = request.config.stash[ACCEPTANCE_KEY]

    def record(cid: str, ok: bool, detail: str):
        results[cid] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} {cid}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(results, key=lambda c: int(c[1:])):
        ok, detail = results[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {cid}: {detail}")
