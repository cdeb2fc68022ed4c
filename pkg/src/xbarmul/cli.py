"""Command line front end: demo walkthrough, Monte Carlo sweeps, margin
arithmetic, and device hysteresis traces.

Exit codes: 0 on success, 1 on configuration/usage errors, 2 when
``--strict`` is set and the requested noise margin is infeasible.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from fractions import Fraction

from .device import Memristor, simulate_iv
from .harness import (
    SimulationConfig,
    load_config,
    noise_margin,
    parse_magnitude,
    run_demo,
    run_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; remap through CliError so
    # main() can report status 1 per the interface contract.
    def error(self, message):
        raise CliError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="xbarmul", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("demo", help="run the built-in 8-bit worked example")

    sweep = sub.add_parser("sweep", help="Monte Carlo sweep over random operand pairs")
    sweep.add_argument("--config", help="flat key=value config file")
    sweep.add_argument("--n", type=int, help="operand bits (defaults to m*k)")
    sweep.add_argument("--m", type=int, help="bits per digit")
    sweep.add_argument("--k", type=int, help="digits per operand")
    sweep.add_argument("--dw", help="write noise magnitude, e.g. 2^-8")
    sweep.add_argument("--dx", help="input noise magnitude")
    sweep.add_argument("--dc", help="chain noise magnitude")
    sweep.add_argument("--kind", choices=("uniform", "gaussian"), help="noise law")
    sweep.add_argument("--trials", type=int, help="number of trials")
    sweep.add_argument("--seed", type=int, help="master seed (required)")
    sweep.add_argument("--adc-bits", type=int, help="converter width override")
    sweep.add_argument("--out", help="CSV output path")
    sweep.add_argument(
        "--strict",
        action="store_true",
        help="refuse to run when the worst-case margin is infeasible",
    )

    bound = sub.add_parser("bound", help="worst-case noise margin arithmetic")
    bound.add_argument("--k", type=int, required=True, help="digits per operand")
    bound.add_argument("--m", type=int, required=True, help="bits per digit")
    bound.add_argument("--dw", required=True, help="write noise magnitude")
    bound.add_argument("--dx", default="0", help="input noise magnitude")
    bound.add_argument("--strict", action="store_true", help="exit 2 when infeasible")

    iv = sub.add_parser("iv", help="sine-driven device trace as CSV (t,v,i,w)")
    iv.add_argument("--amplitude", type=float, default=1.0, help="drive amplitude (V)")
    iv.add_argument("--period", type=float, default=40.0, help="drive period (s)")
    iv.add_argument("--cycles", type=int, default=2, help="full periods to simulate")
    iv.add_argument("--dt", type=float, default=0.01, help="integration step (s)")
    iv.add_argument("--w0", type=float, default=0.5, help="initial doped length")
    iv.add_argument("--d", type=float, default=1.0, help="device length")
    iv.add_argument("--r-on", type=float, default=1.0, help="fully doped resistance")
    iv.add_argument("--r-off", type=float, default=160.0, help="undoped resistance")
    iv.add_argument("--mu-v", type=float, default=1.6, help="ion mobility")
    iv.add_argument("--out", help="CSV output path (default: stdout)")

    return parser


def _fmt_fraction(value: Fraction) -> str:
    return f"{float(value)!r} ({value.numerator}/{value.denominator})"


def _run_demo(args) -> int:
    result = run_demo()
    report, product = result.report, result.product
    m = result.x_digits.digit_bits
    print(f"x = {float(report.x)!r} = {report.x.bit_string()}")
    print(f"y = {float(report.y)!r} = {report.y.bit_string()}")
    print(f"x digits ({m} bits each): {result.x_digits.digits}"
          f" -> amplitudes {result.x_digits.normalized()}")
    print(f"y digits ({m} bits each): {result.y_digits.digits}"
          f" -> amplitudes {result.y_digits.normalized()}")
    print(f"driven inputs (perturbed):    {result.x_inputs}")
    print(f"programmed cells (perturbed): {result.y_programmed}")
    print()
    print("slot  ideal      column sum  carry_in  code  digit  carry_out")
    steps = {s.slot: s for s in product.steps}
    scale = 1 << (2 * m)
    for slot, ideal in enumerate(result.ideal_sums):
        s = steps[slot]
        print(
            f"{slot:4d}  {ideal / scale:<9.6g}  {s.analog_in:<10.6f}"
            f"  {s.carry_in:<8d}  {s.code:<4d}  {s.digit:<5d}  {s.carry_out}"
        )
    print()
    print(f"recovered digits (msb first): {product.digits}")
    print(f"recovered product: {product.bit_string()}")
    print(f"                 = {_fmt_fraction(report.z_hat.as_fraction())}")
    print(f"exact product:     {_fmt_fraction(report.z_exact.as_fraction())}")
    print(f"abs error: {_fmt_fraction(report.abs_error)}"
          f" -> {'success' if report.success else 'FAILURE'}")
    return EXIT_OK if report.success else EXIT_CONFIG


def _sweep_config(args) -> SimulationConfig:
    if args.config:
        config = load_config(args.config)
    else:
        if args.m is None or args.k is None:
            raise CliError("sweep needs --m and --k (or --config)")
        config = SimulationConfig(
            operand_bits=(args.m * args.k), digit_bits=args.m, digit_count=args.k
        )
    noise = config.noise
    updates = {}
    if args.n is not None:
        updates["operand_bits"] = args.n
    if args.m is not None:
        updates["digit_bits"] = args.m
    if args.k is not None:
        updates["digit_count"] = args.k
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.adc_bits is not None:
        updates["adc_bits"] = args.adc_bits
    noise_updates = {}
    if args.dw is not None:
        noise_updates["write_noise"] = parse_magnitude(args.dw)
    if args.dx is not None:
        noise_updates["input_noise"] = parse_magnitude(args.dx)
    if args.dc is not None:
        noise_updates["chain_noise"] = parse_magnitude(args.dc)
    if args.kind is not None:
        noise_updates["kind"] = args.kind
    if noise_updates:
        noise = replace(noise, **noise_updates)
    return replace(config, noise=noise, **updates)


def _run_sweep(args) -> int:
    config = _sweep_config(args)
    if config.seed is None:
        raise CliError("sweep requires --seed (no wall-clock seeding)")
    margin = noise_margin(
        config.digit_count,
        config.digit_bits,
        Fraction(config.noise.write_noise),
        Fraction(config.noise.input_noise),
    )
    if args.strict and not margin.feasible:
        print(
            f"infeasible: accumulated bound {float(margin.accumulated_bound)!r} "
            f">= half grid {float(margin.half_grid)!r}",
            file=sys.stderr,
        )
        return EXIT_INFEASIBLE
    report = run_sweep(config, args.out)
    print(f"trials: {report.trials}")
    print(f"successes: {report.successes} (rate {report.success_rate:.6f})")
    print(f"max abs error: {_fmt_fraction(report.max_error)}")
    if report.faults:
        print(f"faults: {report.faults}")
    if args.out:
        print(f"csv written to {args.out}")
    return EXIT_OK


def _run_bound(args) -> int:
    report = noise_margin(
        args.k, args.m, parse_magnitude(args.dw), parse_magnitude(args.dx)
    )
    print(f"digits: {report.digit_count} x {report.digit_bits} bits")
    print(f"per-term error: {_fmt_fraction(report.delta_total)}")
    print(f"accumulated bound: {_fmt_fraction(report.accumulated_bound)}")
    print(f"half grid: {_fmt_fraction(report.half_grid)}")
    if report.effective_bits is not None:
        print(f"effective bits per column: {report.effective_bits}"
              f" (carry field: {report.extractable_carry_bits})")
    print("feasible" if report.feasible else "infeasible")
    if args.strict and not report.feasible:
        return EXIT_INFEASIBLE
    return EXIT_OK


def _run_iv(args) -> int:
    device = Memristor(
        w=args.w0, d=args.d, r_on=args.r_on, r_off=args.r_off, mu_v=args.mu_v
    )
    steps = max(1, round(args.cycles * args.period / args.dt))
    omega = 2.0 * math.pi / args.period

    def drive(t: float) -> float:
        return args.amplitude * math.sin(omega * t)

    trace = simulate_iv(device, drive, args.dt, steps)
    if args.out:
        trace.write_csv(args.out)
        print(f"csv written to {args.out} ({len(trace)} samples)")
    else:
        trace.write_csv(sys.stdout)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "demo":
            return _run_demo(args)
        if args.command == "sweep":
            return _run_sweep(args)
        if args.command == "bound":
            return _run_bound(args)
        if args.command == "iv":
            return _run_iv(args)
        raise CliError(f"unknown command {args.command!r}")
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
