#!/usr/bin/env python3
"""How many periods must a stress test repeat before aperiodicity shows?

For each campaign config given (default: the drone and DC-servo examples),
runs the maximally stressful test — full amplitude at the top frequency —
for up to --max-periods repetitions and scores the dnl of every whole-period
prefix.  One period of a nonlinear response can still look periodic (there is
nothing to compare it against); the dnl climbs as repetitions accumulate
evidence, then plateaus.  The campaign repetition count is the first

    dnl(k periods) > threshold

crossing plus one period of margin, so every later test repeats just enough
to expose the nonlinearity without paying for the plateau.
"""
from __future__ import annotations

import argparse
import sys

from loopstress.campaign import calibration_curve, pick_num_periods
from loopstress.config import load_config

DEFAULT_CONFIGS = ("configs/drone_full.json", "configs/dc_servo_full.json")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "configs", nargs="*", default=list(DEFAULT_CONFIGS), help="campaign config files"
    )
    parser.add_argument("--max-periods", type=int, default=10)
    args = parser.parse_args(argv)

    for path in args.configs:
        cfg = load_config(path)
        curve = calibration_curve(
            cfg.plant, cfg.inputs, max_periods=args.max_periods, shape=cfg.calibration_shape
        )
        periods, exceeded = pick_num_periods(
            curve, cfg.inputs.dnl_threshold, args.max_periods
        )

        print(f"{path}: {cfg.plant.model}, harshest test = "
              f"{cfg.inputs.a_max:g} x {cfg.calibration_shape.value} at {cfg.inputs.f_max:g} Hz")
        print(f"  {'periods':>8}  dnl")
        for k, value in enumerate(curve, start=1):
            marker = "  <- first crossing" if (
                value > cfg.inputs.dnl_threshold
                and all(v <= cfg.inputs.dnl_threshold for v in curve[: k - 1])
            ) else ""
            print(f"  {k:>8}  {value:.4f}{marker}")
        if exceeded:
            print(f"  -> repeat campaign tests for {periods} periods "
                  f"(crossing + 1 margin)\n")
        else:
            print(f"  -> threshold {cfg.inputs.dnl_threshold} never exceeded; "
                  f"falling back to the cap of {periods} periods — treat the "
                  f"repetition count as unconfirmed\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
