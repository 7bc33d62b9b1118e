import numpy as np
import pytest

from cesysid.dynsys import simulate


@pytest.fixture(scope="session")
def lorenz_traj():
    traj, _ = simulate("lorenz", seed=7)
    return traj


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for name, (ok, detail) in sorted(results.items()):
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
