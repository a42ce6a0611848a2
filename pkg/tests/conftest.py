import numpy as np
import pytest

from reflector_sim import ParabolaCoeffs, build_rotation, fit_parabola, generate_synthetic_mesh
from reflector_sim.geometry import RotationFrame

REF_DIRECTION = (36.795, 78.169)
REF_A = 0.0017809
REF_C = -300.79084

_ACCEPTANCE = {}


def record_criterion(number, title, ok, detail=""):
    _ACCEPTANCE[number] = (title, bool(ok), detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)


@pytest.fixture(scope="session")
def ref_frame():
    return build_rotation(REF_DIRECTION)


@pytest.fixture(scope="session")
def identity_frame():
    return RotationFrame.identity()


@pytest.fixture(scope="session")
def ref_coeffs():
    return ParabolaCoeffs(REF_A, REF_C)


@pytest.fixture(scope="session")
def fitted_coeffs():
    return fit_parabola()


@pytest.fixture(scope="session")
def synthetic_meshes():
    return {k: generate_synthetic_mesh(subdivisions=k) for k in range(0, 6)}


@pytest.fixture
def rng():
    return np.random.default_rng(20211)
