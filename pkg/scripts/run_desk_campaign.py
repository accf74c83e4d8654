#!/usr/bin/env python3
"""Run a full stress-testing campaign through the library API, stage by stage.

Loads a campaign config (default: configs/drone_desk.json), then walks the
same pipeline the ``loopstress campaign`` subcommand drives — amplitude-bound
search, seeded test generation, batched execution, metamorphic analysis —
printing what each stage found and writing the standard artifacts
(bounds.jsonl, tests.jsonl, results.jsonl, scatter.csv, dof.csv) to --out.

Useful as a template for campaigns that need programmatic access to the
intermediate objects (the bound map, the generated cases, per-test results)
rather than just the files.
"""
from __future__ import annotations

import argparse
import sys
import time
from collections import Counter
from pathlib import Path

from loopstress.analysis import (
    DOF_HEADER,
    SCATTER_HEADER,
    check_mr1,
    check_mr2,
    check_mr3,
    classify_scope,
    estimate_bandwidth,
    export_plot_data,
)
from loopstress.campaign import execute_campaign, generate_test_set, optimistic_amplitude_bound
from loopstress.config import load_config
from loopstress.persist import save_bounds, save_csv, save_results, save_test_set


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--config", default="configs/drone_desk.json", help="campaign config file"
    )
    parser.add_argument("--out", default="out/desk_campaign", help="artifact directory")
    args = parser.parse_args(argv)

    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # Stage 1: per-frequency amplitude bounds (optimistic bisection).
    t0 = time.perf_counter()
    bound_map = optimistic_amplitude_bound(cfg.plant, cfg.inputs)
    print(
        f"bounds: {len(bound_map.frequencies)} frequencies in "
        f"[{bound_map.frequencies[0]:g}, {bound_map.frequencies[-1]:g}] Hz, "
        f"linear envelope {min(bound_map.bounds):.2f}..{max(bound_map.bounds):.2f}, "
        f"{bound_map.probes} probe simulations ({time.perf_counter() - t0:.2f} s)"
    )
    if bound_map.unresolved:
        print(f"  unresolved jumps at: {bound_map.unresolved}")
    save_bounds(out / "bounds.jsonl", bound_map)

    # Stage 2: seeded test generation across shapes, frequencies, amplitudes.
    test_set = generate_test_set(
        bound_map, cfg.shapes, cfg.inputs, seed=cfg.seed, beta_params=cfg.beta_params
    )
    per_shape = Counter(t.case.shape.value for t in test_set.tests)
    print(f"generated {len(test_set.tests)} tests (seed {cfg.seed}): {dict(per_shape)}")
    save_test_set(out / "tests.jsonl", test_set)

    # Stage 3: batched execution.
    t0 = time.perf_counter()
    results = execute_campaign(cfg.plant, test_set.tests, cfg.inputs, workers=cfg.workers)
    diverged = sum(r.diverged for r in results)
    print(
        f"ran {len(results)} tests with {cfg.workers} worker(s) "
        f"({time.perf_counter() - t0:.2f} s), {diverged} diverged"
    )
    save_results(out / "results.jsonl", results)

    # Stage 4: scope classification and metamorphic checks.
    scopes = Counter(
        classify_scope(r, cfg.inputs.dnl_threshold, cfg.boundary_factor).value
        for r in results
    )
    print(f"scope: {dict(scopes)}")

    mr1 = check_mr1(results)
    mr2, mr2_skipped = check_mr2(
        results,
        cfg.inputs.dnl_threshold,
        bin_tolerance=cfg.mr2_bin_tolerance,
        equality_tolerance=cfg.mr2_equality_tolerance,
    )
    bandwidths = {
        shape: estimate_bandwidth(
            [r for r in results if r.case.shape is shape], cfg.inputs.dnl_threshold
        )
        for shape in cfg.shapes
    }
    mr3, undefined = check_mr3(bandwidths, epsilon=cfg.mr3_epsilon)
    print(
        f"metamorphic checks: {len(mr1)} amplitude-monotonicity, "
        f"{len(mr2)} frequency-scaling ({mr2_skipped} unmatched bins), "
        f"{len(mr3)} bandwidth-agreement violation(s)"
    )
    for shape, est in bandwidths.items():
        label = f"{est.value:.3f} Hz" if est.defined else est.status.value
        print(f"  bandwidth[{shape.value}] = {label} ({est.n_points} points)")

    scatter, dof_rows = export_plot_data(results, cfg.inputs.dnl_threshold, cfg.boundary_factor)
    save_csv(out / "scatter.csv", SCATTER_HEADER, scatter)
    save_csv(out / "dof.csv", DOF_HEADER, dof_rows)
    print(f"artifacts written to {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
