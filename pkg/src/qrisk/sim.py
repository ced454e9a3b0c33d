"""Dense statevector engine.

Conventions:

- qubit ``q`` is bit ``q`` of the basis-state index (qubit 0 is the LSB);
- ``RY(phi) = [[cos(phi/2), -sin(phi/2)], [sin(phi/2), cos(phi/2)]]``, so
  ``RY(2y)|0>`` has ``P(1) = sin(y)**2``;
- controlled gates are applied directly by index masking, and a control may
  require either value (``(q, 0)`` is a negative control).

Shot sampling draws from ``numpy.random.Generator(PCG64)`` by inverse CDF
over the cumulative basis probabilities.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, sin, sqrt
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, QubitIndexError, SizeError

MAX_QUBITS = 14
GATE_KINDS = ("H", "X", "RY")

_SQRT2_INV = 1 / sqrt(2)
_H = np.array([[_SQRT2_INV, _SQRT2_INV], [_SQRT2_INV, -_SQRT2_INV]], dtype=complex)

Histogram = dict  # basis index (or any outcome key) -> count


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if len(self.amplitudes) != 1 << self.n_qubits:
            raise SizeError(
                f"{len(self.amplitudes)} amplitudes for {self.n_qubits} qubits"
            )

    def copy(self) -> StateVector:
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class GateOp:
    """One gate: ``kind`` on ``target``, conditioned on ``controls``.

    ``controls`` is a tuple of ``(qubit, required_value)`` pairs.
    """

    kind: str
    target: int
    angle: float = 0.0
    controls: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ArgumentError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(
            self, "controls", tuple((int(q), int(v)) for q, v in self.controls)
        )
        qubits = [q for q, _ in self.controls]
        if self.target in qubits:
            raise ArgumentError(f"target {self.target} is also a control")
        if len(set(qubits)) != len(qubits):
            raise ArgumentError("duplicate control qubit")
        if any(v not in (0, 1) for _, v in self.controls):
            raise ArgumentError("control values must be 0 or 1")

    def qubits(self) -> list[int]:
        return [self.target, *(q for q, _ in self.controls)]

    def inverse(self) -> GateOp:
        if self.kind == "RY":
            return GateOp("RY", self.target, -self.angle, self.controls)
        return self

    def matrix(self) -> np.ndarray:
        if self.kind == "H":
            return _H
        if self.kind == "X":
            return np.array([[0, 1], [1, 0]], dtype=complex)
        c, s = cos(self.angle / 2), sin(self.angle / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass
class Circuit:
    """Ordered list of gates over ``n_qubits`` qubits."""

    n_qubits: int
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self) -> None:
        _check_width(self.n_qubits)
        for op in self.ops:
            self._check(op)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def _check(self, op: GateOp) -> None:
        for q in op.qubits():
            if not 0 <= q < self.n_qubits:
                raise QubitIndexError(f"qubit {q} outside {self.n_qubits}-qubit circuit")

    def append(self, op: GateOp) -> Circuit:
        self._check(op)
        self.ops.append(op)
        return self

    def h(self, target: int, controls: Iterable[tuple[int, int]] = ()) -> Circuit:
        return self.append(GateOp("H", target, 0.0, tuple(controls)))

    def x(self, target: int, controls: Iterable[tuple[int, int]] = ()) -> Circuit:
        return self.append(GateOp("X", target, 0.0, tuple(controls)))

    def ry(
        self, angle: float, target: int, controls: Iterable[tuple[int, int]] = ()
    ) -> Circuit:
        return self.append(GateOp("RY", target, float(angle), tuple(controls)))

    def extend(self, other: Circuit) -> Circuit:
        if other.n_qubits != self.n_qubits:
            raise SizeError(f"cannot append {other.n_qubits}-qubit circuit to {self.n_qubits}")
        self.ops.extend(other.ops)
        return self

    def inverse(self) -> Circuit:
        return Circuit(self.n_qubits, [op.inverse() for op in reversed(self.ops)])

    def to_text(self) -> str:
        """Serialize one gate per line: ``KIND ANGLE TARGET CONTROLS``.

        ``ANGLE`` is ``-`` for H/X; ``CONTROLS`` is ``-`` or comma-separated
        ``qubit:value`` pairs. The first line is ``qubits N``.
        """
        lines = [f"qubits {self.n_qubits}"]
        for op in self.ops:
            angle = repr(op.angle) if op.kind == "RY" else "-"
            ctl = ",".join(f"{q}:{v}" for q, v in op.controls) or "-"
            lines.append(f"{op.kind} {angle} {op.target} {ctl}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Circuit:
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or rows[0][0] != "qubits" or len(rows[0]) != 2:
            raise ArgumentError("circuit text must start with 'qubits N'")
        circuit = cls(int(rows[0][1]))
        for row in rows[1:]:
            if len(row) != 4:
                raise ArgumentError(f"malformed gate line {' '.join(row)!r}")
            kind, angle, target, ctl = row
            controls = () if ctl == "-" else tuple(
                tuple(int(t) for t in pair.split(":")) for pair in ctl.split(",")
            )
            circuit.append(
                GateOp(kind, int(target), 0.0 if angle == "-" else float(angle), controls)
            )
        return circuit


def _check_width(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise SizeError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")


def new_state(n_qubits: int) -> StateVector:
    """Return ``|0...0>`` on ``n_qubits`` qubits."""
    _check_width(n_qubits)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def _apply_inplace(amps: np.ndarray, n: int, op: GateOp) -> None:
    for q in op.qubits():
        if not 0 <= q < n:
            raise QubitIndexError(f"qubit {q} outside {n}-qubit state")
    # C-order reshape: axis n-1-q holds bit q
    view = amps.reshape((2,) * n)
    index: list = [slice(None)] * n
    for q, v in op.controls:
        index[n - 1 - q] = v
    lo, hi = list(index), list(index)
    lo[n - 1 - op.target] = 0
    hi[n - 1 - op.target] = 1
    lo, hi = tuple(lo), tuple(hi)
    a0 = view[lo].copy()
    a1 = view[hi]
    if op.kind == "X":
        view[lo] = a1
        view[hi] = a0
        return
    m = op.matrix()
    new1 = m[1, 0] * a0 + m[1, 1] * a1
    view[lo] = m[0, 0] * a0 + m[0, 1] * a1
    view[hi] = new1


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    """Return a new state with ``op`` applied."""
    out = state.copy()
    _apply_inplace(out.amplitudes, out.n_qubits, op)
    return out


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    """Apply every gate of ``circuit`` in order; the input is not modified."""
    if circuit.n_qubits != state.n_qubits:
        raise SizeError(
            f"circuit has {circuit.n_qubits} qubits, state has {state.n_qubits}"
        )
    out = state.copy()
    for op in circuit.ops:
        _apply_inplace(out.amplitudes, out.n_qubits, op)
    return out


def run(circuit: Circuit) -> StateVector:
    """Apply ``circuit`` to ``|0...0>``."""
    return apply_circuit(new_state(circuit.n_qubits), circuit)


def basis_probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def marginal_probability(state: StateVector, qubit: int, value: int = 1) -> float:
    """Probability that ``qubit`` measures ``value``."""
    if not 0 <= qubit < state.n_qubits:
        raise QubitIndexError(f"qubit {qubit} outside {state.n_qubits}-qubit state")
    probs = basis_probabilities(state)
    bits = (np.arange(probs.size) >> qubit) & 1
    return float(probs[bits == value].sum())


def derive_rng(*key: int) -> np.random.Generator:
    """Independent PCG64 stream for an integer key such as ``(seed, trial)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in key])))


def sample_indices(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``shots`` outcome indices from ``probs`` by inverse CDF."""
    if shots < 1:
        raise ArgumentError(f"shots must be >= 1, got {shots}")
    cdf = np.cumsum(probs)
    u = rng.random(shots) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


def sample_shots(state: StateVector, shots: int, seed: int | Sequence[int]) -> Histogram:
    """Seeded multinomial draw of ``shots`` basis outcomes.

    Returns a histogram ``{basis_index: count}`` holding only nonzero buckets,
    in increasing index order.
    """
    key = (seed,) if isinstance(seed, (int, np.integer)) else tuple(seed)
    idx = sample_indices(basis_probabilities(state), shots, derive_rng(*key))
    values, counts = np.unique(idx, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}
