"""Classical payoff references, calibration modes and error metrics.

The quantum PF and LM marginals are compared against the Taylor-frame value
map ``0.5 + theta*i`` (the 0.785 + 1.57*theta*i baseline divided by 1.57).
"""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from enum import Enum
from math import pi
from typing import Mapping

import numpy as np

from .circuits import (
    STRIKE,
    BooleanThreadFunction,
    PriceDistribution,
    RegisterLayout,
    build_payoff_circuit,
    payoff_layout,
    shift_distribution,
)
from .estimators import MLAEConfig, mlae_estimate
from .errors import ArgumentError
from .sim import derive_rng, marginal_probability, run, sample_indices

SCALE = 1.57
TAYLOR_OFFSET = 0.5
FLIP_PROBABILITY = 0.25


class CalibrationMode(str, Enum):
    BASELINE = "baseline"
    UNCALIBRATED = "uncalibrated"
    ANALOG_CALIBRATED = "analog-calibrated"
    TAYLOR_FRAME = "taylor-frame"


QUANTUM_MODES = (
    CalibrationMode.UNCALIBRATED,
    CalibrationMode.ANALOG_CALIBRATED,
    CalibrationMode.TAYLOR_FRAME,
)
METHODS = ("exact", "shots", "qae")


@dataclass(frozen=True)
class PayoffParams:
    """Rotation and value-map constants.

    ``base`` is the rotation offset in radians. ``value_step`` / ``value_offset``
    are the constants ``m``, ``k`` of the weighted-average reference value
    ``i*m + k``; left unset they take the Taylor frame ``m = theta, k = 0.5``.
    """

    theta: float = 0.01
    base: float = pi / 4
    scale: float = SCALE
    value_step: float | None = None
    value_offset: float | None = None

    def __post_init__(self) -> None:
        if self.theta < 0:
            raise ArgumentError("theta must be >= 0")
        if not 0 < self.base < pi / 2:
            raise ArgumentError("base must lie in (0, pi/2)")

    @property
    def step(self) -> float:
        return self.theta if self.value_step is None else self.value_step

    @property
    def offset(self) -> float:
        return TAYLOR_OFFSET if self.value_offset is None else self.value_offset


def value_map(i: int, mode: CalibrationMode, params: PayoffParams) -> float:
    """Per-index value: a payoff value for Baseline/TaylorFrame, and the
    quantum rotation angle ``y_i`` for the two quantum calibration modes."""
    mode = CalibrationMode(mode)
    if mode is CalibrationMode.TAYLOR_FRAME:
        return params.offset + params.step * i
    if mode is CalibrationMode.ANALOG_CALIBRATED:
        return params.base + params.theta * i
    # Baseline and Uncalibrated share x = y = base + scale*theta*i
    return params.base + params.scale * params.theta * i


def rotation_step(mode: CalibrationMode, params: PayoffParams) -> float:
    """Ladder angle per low-bit index used by the payoff circuit in ``mode``."""
    mode = CalibrationMode(mode)
    if mode is CalibrationMode.BASELINE:
        raise ArgumentError("baseline mode is classical and has no rotation")
    if mode is CalibrationMode.UNCALIBRATED:
        return params.scale * params.theta
    return params.theta


def _values(mode: CalibrationMode, params: PayoffParams) -> np.ndarray:
    return np.array([value_map(i, mode, params) for i in range(8)])


def compute_pf_reference(
    dist: PriceDistribution,
    params: PayoffParams,
    mode: CalibrationMode = CalibrationMode.TAYLOR_FRAME,
) -> float:
    """``sum_i P[i+24] * value(i)``."""
    p = dist.array()
    return float(np.dot(p[STRIKE:STRIKE + 8], _values(mode, params)))


def compute_lm_reference(
    dist: PriceDistribution,
    params: PayoffParams,
    mode: CalibrationMode = CalibrationMode.TAYLOR_FRAME,
) -> float:
    """``sum_i (P_i + P_{i+8} + P_{i+16} + P_{i+24}) * value(i)``."""
    low_mass = dist.array().reshape(4, 8).sum(axis=0)
    return float(np.dot(low_mass, _values(mode, params)))


@dataclass(frozen=True)
class EstimateReport:
    mode: str
    method: str
    strike: int
    pf_quantum: float | None
    lm_quantum: float | None
    pf_reference: float
    lm_reference: float
    pf_rel_error_pct: float | None
    lm_rel_error_pct: float | None
    undefined_rel_error: bool = False

    CSV_HEADER = (
        "mode,method,strike,pf_quantum,lm_quantum,pf_reference,lm_reference,"
        "pf_rel_error_pct,lm_rel_error_pct,undefined_rel_error"
    )

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv_row(self) -> str:
        cells = []
        for value in self.to_dict().values():
            if value is None:
                cells.append("")
            elif isinstance(value, bool):
                cells.append(str(value).lower())
            else:
                cells.append(repr(value) if isinstance(value, float) else str(value))
        return ",".join(cells)

    def numeric(self) -> tuple[float | None, ...]:
        return (
            self.pf_quantum,
            self.lm_quantum,
            self.pf_reference,
            self.lm_reference,
            self.pf_rel_error_pct,
            self.lm_rel_error_pct,
        )


def reports_close(a: EstimateReport, b: EstimateReport, tol: float = 1e-12) -> bool:
    """Numeric fields agree within ``tol`` (modes may differ)."""
    for x, y in zip(a.numeric(), b.numeric()):
        if (x is None) != (y is None):
            return False
        if x is not None and abs(x - y) > tol:
            return False
    return a.undefined_rel_error == b.undefined_rel_error


def relative_error_pct(quantum: float, reference: float) -> float | None:
    if reference == 0:
        return None
    return 100.0 * abs(quantum - reference) / abs(reference)


def payoff_report(
    dist: PriceDistribution,
    params: PayoffParams = PayoffParams(),
    mode: CalibrationMode = CalibrationMode.ANALOG_CALIBRATED,
    method: str = "exact",
    seed: int = 0,
    strike: int = STRIKE,
    shots: int = 1600,
    mlae: MLAEConfig = MLAEConfig(),
    layout: RegisterLayout | None = None,
) -> EstimateReport:
    """PF/LM from the payoff circuit against Taylor-frame references.

    ``strike`` other than 24 is realized by shifting ``dist`` down by
    ``strike - 24`` before loading. Baseline mode is purely classical: the
    report carries the baseline-frame averages and no quantum values.
    """
    mode = CalibrationMode(mode)
    if method not in METHODS:
        raise ArgumentError(f"method must be one of {METHODS}")
    shifted = shift_distribution(dist, strike - STRIKE)
    if mode is CalibrationMode.BASELINE:
        return EstimateReport(
            mode.value, "classical", strike, None, None,
            compute_pf_reference(shifted, params, mode),
            compute_lm_reference(shifted, params, mode),
            None, None,
        )
    layout = layout or payoff_layout()
    circuit = build_payoff_circuit(layout, shifted, rotation_step(mode, params), params.base)
    if method == "exact":
        state = run(circuit)
        pf = marginal_probability(state, layout.pf_qubit, 1)
        lm = marginal_probability(state, layout.lm_qubit, 1)
    elif method == "shots":
        probs = np.abs(run(circuit).amplitudes) ** 2
        idx = sample_indices(probs, shots, derive_rng(seed))
        pf = float(np.count_nonzero((idx >> layout.pf_qubit) & 1)) / shots
        lm = float(np.count_nonzero((idx >> layout.lm_qubit) & 1)) / shots
    else:
        pf = mlae_estimate(circuit, layout.pf_qubit, mlae, seed)
        lm = mlae_estimate(circuit, layout.lm_qubit, mlae, seed + 1)
    pf_ref = compute_pf_reference(shifted, params)
    lm_ref = compute_lm_reference(shifted, params)
    pf_err = relative_error_pct(pf, pf_ref)
    lm_err = relative_error_pct(lm, lm_ref)
    return EstimateReport(
        mode.value, method, strike, pf, lm, pf_ref, lm_ref, pf_err, lm_err,
        undefined_rel_error=pf_err is None or lm_err is None,
    )


def thread_output_histogram(
    hist: Mapping[int, float], layout: RegisterLayout, output: int | None = None
) -> dict[tuple[int, int], float]:
    """Marginalize a basis-index histogram onto (thread value, output bit)."""
    output = layout.output_qubit if output is None else output
    if output is None:
        raise ArgumentError("no output qubit given")
    bits = layout.thread_bits
    joint: dict[tuple[int, int], float] = {}
    for index, count in hist.items():
        thread = 0
        for q in bits:
            thread = (thread << 1) | ((index >> q) & 1)
        key = (thread, (index >> output) & 1)
        joint[key] = joint.get(key, 0) + count
    return dict(sorted(joint.items()))


def flip_error_statistic(
    hist: Mapping[tuple[int, int], float], f: BooleanThreadFunction | None = None
) -> float:
    """Thread-averaged relative deviation (percent) of the flip rate from 1/4.

    ``hist`` maps ``(thread, output_bit)`` to counts; a shot is a flip when the
    output differs from ``f(thread)`` (``f`` defaults to all zeros). Threads
    without counts are skipped with a warning.
    """
    totals: dict[int, float] = {}
    flips: dict[int, float] = {}
    for (thread, bit), count in hist.items():
        totals[thread] = totals.get(thread, 0) + count
        expected = f(thread) if f is not None else 0
        if bit != expected:
            flips[thread] = flips.get(thread, 0) + count
    n_threads = len(f.truth_table) if f is not None else max(totals, default=-1) + 1
    errors = []
    for thread in range(n_threads):
        total = totals.get(thread, 0)
        if total <= 0:
            warnings.warn(f"thread {thread} has no counts; excluded", RuntimeWarning, stacklevel=2)
            continue
        rate = flips.get(thread, 0) / total
        errors.append(100.0 * abs(rate - FLIP_PROBABILITY) / FLIP_PROBABILITY)
    if not errors:
        raise ArgumentError("histogram has no counts")
    return float(np.mean(errors))
