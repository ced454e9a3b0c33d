"""``qrisk`` command line: one subcommand per experiment.

Exit status: 0 on success, 2 for usage errors (bad flags or parameter
values), 3 when a strike shift would move mass outside 0..31.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from math import pi
from typing import Sequence

import numpy as np

from . import __version__
from .circuits import (
    N_PRICES,
    STRIKE,
    BooleanThreadFunction,
    PriceDistribution,
    build_payoff_circuit,
    build_random_injection,
    build_thread_function,
    build_thread_superposition,
    even16,
    injection_layout,
    payoff_layout,
    shift_distribution,
)
from .errors import QRiskError, RangeError
from .estimators import (
    convergence_experiment,
    default_cost_grid,
    exact_amplitude,
    loglog_slope,
)
from .payoff import (
    CalibrationMode,
    EstimateReport,
    PayoffParams,
    flip_error_statistic,
    payoff_report,
    rotation_step,
    thread_output_histogram,
)
from .sim import basis_probabilities, run, sample_shots

EXIT_USAGE = 2
EXIT_RANGE = 3
MAX_THREAD_BITS = 6


class UsageError(Exception):
    pass


def parse_distribution(spec: str) -> PriceDistribution:
    """``uniform32``, ``even16``, ``point:V``, ``range:LO-HI`` or 32 comma-separated weights."""
    spec = spec.strip()
    if spec == "uniform32":
        return PriceDistribution.uniform(range(N_PRICES))
    if spec == "even16":
        return even16()
    try:
        if spec.startswith("point:"):
            return PriceDistribution.point(int(spec[6:]))
        if spec.startswith("range:"):
            lo, hi = (int(s) for s in spec[6:].split("-"))
            if not 0 <= lo <= hi < N_PRICES:
                raise UsageError(f"range {lo}-{hi} outside 0..31")
            return PriceDistribution.uniform(range(lo, hi + 1))
        weights = [float(s) for s in spec.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad distribution spec {spec!r}: {exc}") from None
    if len(weights) != N_PRICES or abs(sum(weights) - 1.0) > 1e-6:
        raise UsageError("inline distribution needs 32 probabilities summing to 1")
    return PriceDistribution.from_weights(weights)


def parse_function(spec: str, t: int) -> BooleanThreadFunction:
    """Thread function as a bit string (thread 0 first) or a truth-table index."""
    if spec in ("0", "zero"):
        return BooleanThreadFunction((0,) * (1 << t))
    if len(spec) == 1 << t and set(spec) <= {"0", "1"}:
        return BooleanThreadFunction(tuple(int(c) for c in spec))
    try:
        index = int(spec)
    except ValueError:
        raise UsageError(f"bad thread function {spec!r}") from None
    if not 0 <= index < 1 << (1 << t):
        raise UsageError(f"function index {index} out of range for t={t}")
    return BooleanThreadFunction.from_index(index, t)


def _metadata(command: str, config: dict) -> dict:
    return {"tool": "qrisk", "version": __version__, "command": command, "config": config}


def _params(args) -> PayoffParams:
    return PayoffParams(theta=args.theta, base=args.base)


def cmd_random_injection(args) -> tuple[dict, list[str], list[list]]:
    t = args.threads
    if not 0 < t <= MAX_THREAD_BITS:
        raise UsageError(f"--threads must be in 1..{MAX_THREAD_BITS}")
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    layout = injection_layout(t)
    f = parse_function(args.function, t)
    circuit = build_thread_superposition(layout, t)
    circuit.extend(build_thread_function(layout, f, layout.output_qubit))
    circuit.extend(build_random_injection(layout, layout.output_qubit))
    state = run(circuit)
    joint = thread_output_histogram(sample_shots(state, args.shots, args.seed), layout)
    exact = thread_output_histogram(dict(enumerate(basis_probabilities(state))), layout)
    rows = [[thread, bit, count] for (thread, bit), count in joint.items()]
    doc = {
        "metadata": _metadata("random-injection", {
            "threads": t, "function": list(f.truth_table),
            "shots": args.shots, "seed": args.seed,
        }),
        "histogram": [{"thread": a, "output": b, "count": c} for a, b, c in rows],
        "nonzero_outcomes": sum(1 for p in exact.values() if p > 1e-12),
        "flip_error_pct": flip_error_statistic(joint, f),
        "exact_flip_probability": 0.25,
    }
    return doc, ["thread", "output", "count"], rows


def cmd_payoff(args) -> tuple[dict, list[str], list[list]]:
    dist = parse_distribution(args.dist)
    if not STRIKE <= args.strike <= 31:
        raise UsageError("--strike must be in 24..31")
    params = _params(args)
    report = payoff_report(
        dist, params, CalibrationMode(args.mode), args.method, args.seed,
        strike=args.strike, shots=args.shots,
    )
    shifted = shift_distribution(dist, args.strike - STRIKE)
    doc = {
        "metadata": _metadata("payoff", {
            "dist": args.dist, "strike": args.strike, "mode": args.mode,
            "method": args.method, "theta": args.theta, "base": args.base,
            "shots": args.shots, "seed": args.seed,
        }),
        "report": report.to_dict(),
    }
    if report.pf_quantum is not None:
        layout = payoff_layout()
        circuit = build_payoff_circuit(
            layout, shifted, rotation_step(CalibrationMode(args.mode), params), params.base
        )
        probs = basis_probabilities(run(circuit)).reshape(-1, N_PRICES)
        pf_rows = (np.arange(probs.shape[0]) >> (layout.pf_qubit - 5)) & 1
        doc["price_distribution"] = [float(x) for x in probs.sum(axis=0)]
        doc["pf_distribution"] = [float(x) for x in probs[pf_rows == 1].sum(axis=0)]
    header = EstimateReport.CSV_HEADER.split(",")
    return doc, header, [report.to_csv_row().split(",")]


def cmd_calibrate_compare(args) -> tuple[dict, list[str], list[list]]:
    dist = parse_distribution(args.dist)
    params = _params(args)
    reports = [
        payoff_report(dist, params, mode, args.method, args.seed, strike=args.strike,
                      shots=args.shots)
        for mode in CalibrationMode
    ]
    errs = {r.mode: r.pf_rel_error_pct for r in reports}
    unc, cal = errs["uncalibrated"], errs["analog-calibrated"]
    doc = {
        "metadata": _metadata("calibrate-compare", {
            "dist": args.dist, "strike": args.strike, "method": args.method,
            "theta": args.theta, "base": args.base, "shots": args.shots, "seed": args.seed,
        }),
        "rows": [r.to_dict() for r in reports],
        "pf_improvement_ratio": unc / cal if unc is not None and cal else None,
    }
    header = EstimateReport.CSV_HEADER.split(",")
    return doc, header, [r.to_csv_row().split(",") for r in reports]


def cmd_qae_convergence(args) -> tuple[dict, list[str], list[list]]:
    if args.trials < 10:
        raise UsageError("--trials must be >= 10")
    dist = parse_distribution(args.dist)
    params = _params(args)
    layout = payoff_layout()
    circuit = build_payoff_circuit(
        layout, dist, rotation_step(CalibrationMode(args.mode), params), params.base
    )
    good = layout.pf_qubit
    grid = (
        [int(c) for c in args.costs.split(",")] if args.costs
        else default_cost_grid(args.shots_per_power)
    )
    curves = convergence_experiment(
        circuit, good, grid, args.trials, args.seed, args.shots_per_power
    )
    check = convergence_experiment(
        circuit, good, [32, 1024], args.trials, args.seed, args.shots_per_power
    )
    mlae32, classical1024 = check["mlae"][0], check["classical"][1]
    rows = [
        [method, p.cost, p.rmse, p.stderr]
        for method, points in curves.items() for p in points
    ]
    doc = {
        "metadata": _metadata("qae-convergence", {
            "dist": args.dist, "mode": args.mode, "theta": args.theta, "base": args.base,
            "trials": args.trials, "costs": grid,
            "shots_per_power": args.shots_per_power, "seed": args.seed,
        }),
        "amplitude": exact_amplitude(circuit, good),
        "points": [dict(zip(("method", "cost", "rmse", "stderr"), r)) for r in rows],
        "slopes": {m: loglog_slope(points) for m, points in curves.items()},
        "speedup_check": {
            "mlae_cost": mlae32.cost,
            "mlae_rmse": mlae32.rmse,
            "classical_cost": classical1024.cost,
            "classical_rmse": classical1024.rmse,
            "ratio": mlae32.rmse / classical1024.rmse,
            "within_factor_2": mlae32.rmse <= 2 * classical1024.rmse,
        },
    }
    return doc, ["method", "cost", "rmse", "stderr"], rows


COMMANDS = {
    "random-injection": cmd_random_injection,
    "payoff": cmd_payoff,
    "calibrate-compare": cmd_calibrate_compare,
    "qae-convergence": cmd_qae_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrisk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qrisk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, shots=1600):
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--shots", type=int, default=shots)

    def payoff_flags(p):
        p.add_argument("--dist", default="even16",
                       help="uniform32 | even16 | point:V | range:LO-HI | 32 comma-separated probabilities")
        p.add_argument("--theta", type=float, default=0.01)
        p.add_argument("--base", type=float, default=pi / 4, help="rotation offset in radians")
        p.add_argument("--strike", type=int, default=STRIKE)

    p = sub.add_parser("random-injection", help="thread superposition + random injection histogram")
    common(p)
    p.add_argument("--threads", type=int, default=3)
    p.add_argument("--function", default="0",
                   help="thread function: bit string (thread 0 first) or truth-table index")

    p = sub.add_parser("payoff", help="strike-gated payoff report")
    common(p)
    payoff_flags(p)
    p.add_argument("--mode", choices=[m.value for m in CalibrationMode],
                   default=CalibrationMode.ANALOG_CALIBRATED.value)
    p.add_argument("--method", choices=("exact", "shots", "qae"), default="exact")

    p = sub.add_parser("calibrate-compare", help="four calibration modes side by side")
    common(p)
    payoff_flags(p)
    p.add_argument("--method", choices=("exact", "shots", "qae"), default="exact")

    p = sub.add_parser("qae-convergence", help="RMSE vs oracle cost, sampling vs MLAE")
    common(p)
    payoff_flags(p)
    p.add_argument("--mode", choices=[m.value for m in CalibrationMode if m.value != "baseline"],
                   default=CalibrationMode.ANALOG_CALIBRATED.value)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--costs", help="comma-separated oracle-cost grid")
    p.add_argument("--shots-per-power", type=int, default=100)
    return parser


def render(doc: dict, header: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc, header, rows = COMMANDS[args.command](args)
    except RangeError as exc:
        print(f"qrisk: range error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (UsageError, QRiskError) as exc:
        parser.print_usage(sys.stderr)
        print(f"qrisk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(doc, header, rows, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
