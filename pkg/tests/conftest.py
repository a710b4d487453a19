import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ottotur import BathKind, CycleParams  # noqa: E402

Q, C = BathKind.QUANTUM, BathKind.CLASSICAL


def reference_engine(scale=1.0):
    """ω_h=1.2, ω_c=1, T_h=2, T_c=0.3, γ=1, adiabat/isochore time ratio 0.2."""
    return CycleParams(1.2, 1.0, 2.0, 0.3, 1.0, 0.2, 1.0, 0.2, 1.0).scaled(scale)


def tur_violation_point():
    return CycleParams(0.724, 0.620, 0.356, 0.286, 0.25, 1.25, 1.25, 1.25, 1.25)


def phase_scan_base(tau=1.0):
    return CycleParams(0.750, 0.633, 0.698, 0.622, 1.0, tau, tau, tau, tau)


def crossover_base(gamma=1.0):
    return CycleParams(3.0, 1.0, 1.0, 0.5, gamma, 0.5, 1.0, 0.5, 1.0)


def degenerate(omega=1.0, temp=0.5, gamma=1.0):
    return CycleParams(omega, omega, temp, temp, gamma, 0.3, 0.7, 0.3, 0.9)


@pytest.fixture
def engine_params():
    return reference_engine()


@pytest.fixture
def violation_params():
    return tur_violation_point()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
