"""Circuit builders: thread superposition, random injection, price loading,
the LM rotation ladder, the AB=11 payoff switch and the Grover operator."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import asin, isclose, pi, sqrt
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DistributionError, LayoutError, RangeError
from .sim import Circuit

N_PRICES = 32
STRIKE = 24


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit roles.

    ``price_bits`` is ordered A, B, C, D, E (A most significant, price
    ``16A + 8B + 4C + 2D + E``); ``rand_bits`` is ``(r1, r0)`` with
    ``r = 2*r1 + r0``; ``thread_bits`` is ordered most significant first.
    """

    n_qubits: int
    price_bits: tuple[int, ...] = ()
    rand_bits: tuple[int, ...] = ()
    lm_qubit: int | None = None
    pf_qubit: int | None = None
    thread_bits: tuple[int, ...] = ()
    output_qubit: int | None = None

    def __post_init__(self) -> None:
        if self.price_bits and len(self.price_bits) != 5:
            raise LayoutError("price register needs exactly 5 bits (A..E)")
        if self.rand_bits and len(self.rand_bits) != 2:
            raise LayoutError("random register needs exactly 2 bits (r1, r0)")
        used = [*self.price_bits, *self.rand_bits, *self.thread_bits]
        used += [q for q in (self.lm_qubit, self.pf_qubit, self.output_qubit) if q is not None]
        if len(set(used)) != len(used):
            raise LayoutError(f"qubit roles overlap: {used}")
        if any(not 0 <= q < self.n_qubits for q in used):
            raise LayoutError(f"qubit index outside width {self.n_qubits}: {used}")

    def require(self, *roles: str) -> None:
        for role in roles:
            value = getattr(self, role)
            if value is None or value == ():
                raise LayoutError(f"layout does not assign {role}")


def payoff_layout() -> RegisterLayout:
    """Width-7 payoff register: E..A on qubits 0..4, LM on 5, PF on 6.

    With this layout the low five bits of a basis index are the price.
    """
    return RegisterLayout(7, price_bits=(4, 3, 2, 1, 0), lm_qubit=5, pf_qubit=6)


def injection_layout(t: int = 3) -> RegisterLayout:
    """Threads on qubits ``0..t-1``, output bit on ``t``, then r0 and r1."""
    return RegisterLayout(
        t + 3,
        rand_bits=(t + 2, t + 1),
        thread_bits=tuple(range(t - 1, -1, -1)),
        output_qubit=t,
    )


@dataclass(frozen=True)
class PriceDistribution:
    """Probability mass over the 32 price levels."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) != N_PRICES:
            raise DistributionError(f"need {N_PRICES} probabilities, got {len(probs)}")
        if any(p < 0 or not np.isfinite(p) for p in probs):
            raise DistributionError("probabilities must be finite and nonnegative")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise DistributionError(f"probabilities sum to {sum(probs)!r}, not 1")

    def __getitem__(self, v: int) -> float:
        return self.probs[v]

    def array(self) -> np.ndarray:
        return np.asarray(self.probs)

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> PriceDistribution:
        w = np.asarray(weights, dtype=float)
        if w.shape != (N_PRICES,) or np.any(w < 0) or w.sum() <= 0:
            raise DistributionError("weights must be 32 nonnegative values, not all zero")
        return cls(tuple(w / w.sum()))

    @classmethod
    def uniform(cls, prices: Sequence[int]) -> PriceDistribution:
        w = np.zeros(N_PRICES)
        w[list(prices)] = 1.0
        return cls.from_weights(w)

    @classmethod
    def point(cls, v: int) -> PriceDistribution:
        if not 0 <= v < N_PRICES:
            raise DistributionError(f"price {v} outside 0..31")
        return cls.uniform([v])


def even16() -> PriceDistribution:
    """Default input: uniform over the 16 even prices."""
    return PriceDistribution.uniform(range(0, N_PRICES, 2))


@dataclass(frozen=True)
class BooleanThreadFunction:
    """Truth table ``f(v)`` over ``2**t`` thread values."""

    truth_table: tuple[int, ...]
    t: int = field(init=False)

    def __post_init__(self) -> None:
        table = tuple(int(b) for b in self.truth_table)
        n = len(table)
        if n < 1 or n & (n - 1) or any(b not in (0, 1) for b in table):
            raise ArgumentError("truth table must be 2**t bits")
        object.__setattr__(self, "truth_table", table)
        object.__setattr__(self, "t", n.bit_length() - 1)

    def __call__(self, v: int) -> int:
        return self.truth_table[v]

    def mean(self) -> float:
        return sum(self.truth_table) / len(self.truth_table)

    @classmethod
    def from_index(cls, index: int, t: int = 3) -> BooleanThreadFunction:
        """The function whose truth table is the binary expansion of ``index``."""
        return cls(tuple((index >> v) & 1 for v in range(1 << t)))


def _bit_controls(bits: Sequence[int], value: int) -> tuple[tuple[int, int], ...]:
    # bits ordered most significant first
    width = len(bits)
    return tuple((q, (value >> (width - 1 - j)) & 1) for j, q in enumerate(bits))


def build_thread_superposition(layout: RegisterLayout, t: int) -> Circuit:
    if t != len(layout.thread_bits):
        raise LayoutError(f"t={t} but layout has {len(layout.thread_bits)} thread bits")
    circuit = Circuit(layout.n_qubits)
    for q in layout.thread_bits:
        circuit.h(q)
    return circuit


def build_thread_function(
    layout: RegisterLayout, f: BooleanThreadFunction, out: int
) -> Circuit:
    """Write ``f(thread)`` into ``out`` with one multi-controlled X per true entry."""
    if f.t != len(layout.thread_bits):
        raise ArgumentError(
            f"truth table covers {f.t} bits, layout has {len(layout.thread_bits)}"
        )
    if out in layout.thread_bits:
        raise LayoutError("output qubit is a thread bit")
    circuit = Circuit(layout.n_qubits)
    if all(f.truth_table):
        return circuit.x(out)
    for v, bit in enumerate(f.truth_table):
        if bit:
            circuit.x(out, _bit_controls(layout.thread_bits, v))
    return circuit


def build_random_injection(layout: RegisterLayout, target: int) -> Circuit:
    """Flip ``target`` when the uniform 2-bit register reads r = 3."""
    layout.require("rand_bits")
    r1, r0 = layout.rand_bits
    if target in layout.rand_bits:
        raise LayoutError("injection target overlaps the random register")
    circuit = Circuit(layout.n_qubits)
    circuit.h(r1).h(r0)
    circuit.x(target, ((r1, 1), (r0, 1)))
    return circuit


def _split_angle(mass1: float, total: float) -> float:
    if total <= 0.0:
        return 0.0
    p1 = min(max(mass1 / total, 0.0), 1.0)
    return 2.0 * asin(sqrt(p1))


def load_distribution(layout: RegisterLayout, dist: PriceDistribution) -> Circuit:
    """Binary-tree state preparation of the price register.

    Bit A gets ``RY`` with angle from ``P(A=1)``; each following bit gets one
    rotation per prefix value, controlled on that prefix. A level where every
    prefix needs the same angle collapses to a single uncontrolled rotation;
    zero angles are dropped.
    """
    layout.require("price_bits")
    bits = layout.price_bits
    p = dist.array()
    circuit = Circuit(layout.n_qubits)
    for level in range(5):
        # mass of each (level+1)-bit prefix
        blocks = p.reshape(1 << (level + 1), -1).sum(axis=1)
        angles = [
            _split_angle(blocks[2 * pre + 1], blocks[2 * pre] + blocks[2 * pre + 1])
            for pre in range(1 << level)
        ]
        if all(isclose(a, angles[0], rel_tol=0, abs_tol=1e-15) for a in angles):
            if angles[0] != 0.0:
                circuit.ry(angles[0], bits[level])
            continue
        for pre, angle in enumerate(angles):
            if angle != 0.0:
                circuit.ry(angle, bits[level], _bit_controls(bits[:level], pre))
    return circuit


def shift_distribution(dist: PriceDistribution, delta: int) -> PriceDistribution:
    """Re-index prices by ``-delta``: mass at ``v`` moves to ``v - delta``.

    Strike K is realized on the fixed strike-24 circuit with ``delta = K - 24``.
    """
    p = dist.array()
    moved = np.zeros(N_PRICES)
    for v in np.flatnonzero(p):
        w = v - delta
        if not 0 <= w < N_PRICES:
            raise RangeError(f"shift by {delta} moves mass at price {v} outside 0..31")
        moved[w] = p[v]
    return PriceDistribution(tuple(moved))


def _ladder(
    circuit: Circuit,
    layout: RegisterLayout,
    target: int,
    theta: float,
    base: float,
    extra: tuple[tuple[int, int], ...] = (),
) -> Circuit:
    _, _, c, d, e = layout.price_bits
    circuit.ry(2 * base, target, extra)
    for bit, weight in ((c, 4), (d, 2), (e, 1)):
        if theta != 0.0:
            circuit.ry(2 * theta * weight, target, ((bit, 1), *extra))
    return circuit


def build_lm_rotations(layout: RegisterLayout, theta: float, base: float) -> Circuit:
    """``P(lm=1) = sin^2(base + i*theta)`` on the branch with low bits ``i = 4C+2D+E``."""
    layout.require("lm_qubit", "price_bits")
    if theta < 0:
        raise ArgumentError("theta must be >= 0")
    return _ladder(Circuit(layout.n_qubits), layout, layout.lm_qubit, theta, base)


def build_pf_switch(layout: RegisterLayout, theta: float, base: float) -> Circuit:
    """The LM ladder on the PF qubit, every rotation gated on A=1, B=1.

    ``P(pf=1 | v) = sin^2(base + (v-24)*theta)`` for ``v >= 24`` and 0 below.
    """
    layout.require("pf_qubit", "price_bits")
    if theta < 0:
        raise ArgumentError("theta must be >= 0")
    a, b = layout.price_bits[:2]
    return _ladder(
        Circuit(layout.n_qubits), layout, layout.pf_qubit, theta, base, ((a, 1), (b, 1))
    )


def build_payoff_circuit(
    layout: RegisterLayout, dist: PriceDistribution, theta: float, base: float
) -> Circuit:
    layout.require("price_bits", "lm_qubit", "pf_qubit")
    circuit = load_distribution(layout, dist)
    circuit.extend(build_lm_rotations(layout, theta, base))
    circuit.extend(build_pf_switch(layout, theta, base))
    return circuit


def _phase_flip(circuit: Circuit, qubit: int, controls=()) -> None:
    # Z = H X H
    circuit.h(qubit, controls).x(qubit, controls).h(qubit, controls)


def build_grover_operator(prep: Circuit, good_qubit: int) -> Circuit:
    """``Q = prep . S0 . prep^-1 . S_good`` up to global phase.

    Applying ``Q**k`` after ``prep`` gives ``P(good) = sin^2((2k+1) theta_a)``
    where ``sin^2(theta_a)`` is the good-state probability after ``prep``.
    """
    if not isinstance(prep, Circuit):
        raise ArgumentError("prep must be a Circuit")
    n = prep.n_qubits
    if not 0 <= good_qubit < n:
        raise ArgumentError(f"good qubit {good_qubit} outside {n}-qubit circuit")
    q = Circuit(n)
    _phase_flip(q, good_qubit)
    q.extend(prep.inverse())
    # S0: phase flip on |0...0>, as a negative-controlled flip of qubit 0
    others = tuple((j, 0) for j in range(1, n))
    q.x(0)
    _phase_flip(q, 0, others)
    q.x(0)
    q.extend(prep)
    return q
