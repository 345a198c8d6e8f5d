import numpy as np
import pytest
from hypothesis import settings

from spherical_pi.integral_transforms import TransformConfig
from spherical_pi.special_functions import KernelConfig
from spherical_pi.sphere_geometry import build_cap

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

CAP = np.pi / 3


@pytest.fixture(scope="session")
def tcfg():
    return TransformConfig(kernel=KernelConfig(alpha=0.5))


@pytest.fixture(scope="session")
def cap16():
    return build_cap(CAP, 16, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE: dict = {}


class _Recorder:
    """Collects one verdict line per acceptance criterion."""

    def __call__(self, number: int, title: str, passed: bool, detail: str = "", info: str = ""):
        line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        _ACCEPTANCE[number] = (line, info)
        print(line)
        if info:
            print(f"    info: {info}")
        return passed


@pytest.fixture(scope="session")
def acceptance():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        line, info = _ACCEPTANCE[k]
        terminalreporter.write_line(line)
        if info:
            terminalreporter.write_line(f"    info: {info}")
