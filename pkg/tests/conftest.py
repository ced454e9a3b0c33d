import numpy as np
import pytest

from qrisk.sim import Circuit, GateOp


def random_circuit(rng: np.random.Generator, n: int, n_gates: int) -> Circuit:
    circuit = Circuit(n)
    for _ in range(n_gates):
        kind = ("H", "X", "RY")[rng.integers(3)]
        qubits = rng.permutation(n)
        n_ctl = int(rng.integers(0, min(3, n - 1) + 1))
        controls = tuple((int(q), int(rng.integers(2))) for q in qubits[1:1 + n_ctl])
        angle = float(rng.uniform(-2 * np.pi, 2 * np.pi)) if kind == "RY" else 0.0
        circuit.append(GateOp(kind, int(qubits[0]), angle, controls))
    return circuit


@pytest.fixture
def rng():
    return np.random.default_rng(20251014)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then assert it."""

    def check(label: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
