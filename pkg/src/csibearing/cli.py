"""Batch command-line front end: simulate, estimate, localize, bench.

Output lines use a fixed field order and dot-decimal formatting so they are
safe to parse. Exit codes: 0 success, 2 when every computed bearing was
rejected by the variance threshold, 1 on any error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import dataset
from .errors import CsiBearingError
from .pairing import pair_exchange
from .pipeline import estimate_from_record, simulate_record
from .profile import EstimateOptions, compute_profile, summarize_profile
from .simulate import arc_trajectory, simulate_channel
from .localize import localize
from .steering import build_grid, precompute_steering
from .types import GridConfig, PhaseFactor

THREADS_ENV = "CSIBEARING_THREADS"

TRAJ_CHOICES = ("groundtruth", "camera", "odometry")

BENCH_CONFIGS = {
    "default": (360, 180, 1),
    "lowres": (180, 90, 1),
    "subsample": (360, 180, 2),
    "lowsub": (180, 90, 2),
}


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def _cmd_estimate(args) -> int:
    record = dataset.load_record(args.record)
    profile, estimate, runtime = estimate_from_record(
        record,
        resolution=args.resolution,
        subsample=args.subsample,
        threads=args.threads,
        skew=args.skew,
        trajectory=args.traj,
        options=EstimateOptions(n=args.topn, k_percent=args.k, alpha_deg=args.alpha, tau=args.tau),
    )

    if args.out is not None:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = Path(args.record).stem
        dataset.export_profile(profile, estimate, out_dir / f"{stem}_profile.csv")

    d = estimate.aoa_max.direction
    print(
        f"aoa_az_deg={d.azimuth_deg:.2f} aoa_el_deg={d.elevation_deg:.2f} "
        f"variance={estimate.variance:.6f} accepted={_fmt_bool(estimate.accepted)} "
        f"runtime_s={runtime:.3f} packets={profile.n_packets_used}"
    )
    return 0 if estimate.accepted else 2


def _cmd_simulate(args) -> int:
    scene = dataset.load_scene(args.scene)
    if args.seed is not None:
        scene = type(scene)(
            tx_position=scene.tx_position,
            reflectors=scene.reflectors,
            noise_std=scene.noise_std,
            cfo_enabled=scene.cfo_enabled,
            loss_rate=scene.loss_rate,
            rng_seed=args.seed,
        )
    traj = dataset.load_trajectory(args.trajectory)
    record = simulate_record(scene, traj, args.rate, wavelength_m=args.wavelength)
    dataset.save_record(record, args.out)
    print(
        f"record={args.out} forward={len(record.log.forward)} "
        f"reverse={len(record.log.reverse)} seed={scene.rng_seed}"
    )
    return 0


def _cmd_localize(args) -> int:
    observations = dataset.load_observations(args.bearings)
    result = localize(observations, tau=args.tau)
    if args.out is not None:
        import json

        Path(args.out).write_text(
            json.dumps(
                {
                    "position": [float(v) for v in result.position],
                    "residual": result.residual,
                    "used": result.used,
                    "behind": list(result.behind),
                }
            )
            + "\n"
        )
    print(
        f"position={result.position[0]:.4f},{result.position[1]:.4f} "
        f"residual={result.residual:.6e} used={result.used}"
    )
    return 0


def _standard_fixture(seed: int):
    """The 880-packet benchmark fixture: 4.4 s arc at 200 packets/sec."""
    from .simulate import Scene

    traj = arc_trajectory(duration_s=4.4)
    scene = Scene(tx_position=np.array([5.0, 3.0, 0.5]), cfo_enabled=True, rng_seed=seed)
    log = simulate_channel(scene, traj, packet_rate_hz=200.0)
    return log, traj


def _cmd_bench(args) -> int:
    configs = list(BENCH_CONFIGS) if args.config == "all" else [args.config]
    thread_counts = [int(v) for v in args.threads.split(",")]
    log, traj = _standard_fixture(args.seed)
    paired_full = pair_exchange(log, traj)

    rows = []
    for name in configs:
        az_bins, el_bins, step = BENCH_CONFIGS[name]
        paired = paired_full.subsample(step)
        config = GridConfig(az_bins, el_bins, phase_factor=PhaseFactor.ROUND_TRIP)
        for threads in thread_counts:
            started = time.perf_counter()
            table = precompute_steering(build_grid(config), paired.positions, threads=threads)
            profile = compute_profile(paired, table, threads=threads)
            estimate = summarize_profile(profile)
            elapsed = time.perf_counter() - started
            del table
            rows.append(
                (
                    name,
                    threads,
                    profile.n_packets_used,
                    f"{az_bins}x{el_bins}",
                    elapsed,
                    estimate.aoa_max.direction.azimuth_deg,
                )
            )

    if args.csv:
        print("config,threads,packets,resolution,runtime_s,aoa_az_deg")
        for name, threads, packets, res, elapsed, az in rows:
            print(f"{name},{threads},{packets},{res},{elapsed:.3f},{az:.2f}")
    else:
        print(f"{'config':<10} {'threads':>7} {'packets':>7} {'resolution':>10} "
              f"{'runtime_s':>9} {'aoa_az_deg':>10}")
        for name, threads, packets, res, elapsed, az in rows:
            print(f"{name:<10} {threads:>7} {packets:>7} {res:>10} {elapsed:>9.3f} {az:>10.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csibearing",
        description="Relative bearing estimation from paired channel measurements",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="compute a bearing estimate from a record")
    est.add_argument("record")
    est.add_argument("--resolution", default="360x180", help="grid as AZxEL, e.g. 360x180")
    est.add_argument("--subsample", type=int, default=1, help="use every Nth packet")
    est.add_argument("--threads", type=int, default=_default_threads())
    est.add_argument("--tau", type=float, default=0.9, help="variance rejection threshold")
    est.add_argument("--k", type=float, default=40.0, help="peak floor as %% of the maximum")
    est.add_argument("--alpha", type=float, default=10.0, help="peak separation in degrees")
    est.add_argument("--topn", type=int, default=4, help="number of multipath peaks")
    est.add_argument("--skew", type=int, default=0, help="max counter skew when pairing")
    est.add_argument("--traj", choices=TRAJ_CHOICES, default="groundtruth")
    est.add_argument("--out", default=None, help="directory for profile CSV + metrics")
    est.set_defaults(func=_cmd_estimate)

    sim = sub.add_parser("simulate", help="generate a synthetic record from a scene")
    sim.add_argument("scene")
    sim.add_argument("trajectory")
    sim.add_argument("--rate", type=float, default=200.0, help="packets per second")
    sim.add_argument("--seed", type=int, default=None, help="override the scene's rng seed")
    sim.add_argument("--wavelength", type=float, default=0.06)
    sim.add_argument("--out", required=True, help="output record path")
    sim.set_defaults(func=_cmd_simulate)

    loc = sub.add_parser("localize", help="least-squares position from a bearing file")
    loc.add_argument("bearings")
    loc.add_argument("--tau", type=float, default=0.9)
    loc.add_argument("--out", default=None, help="optional JSON result path")
    loc.set_defaults(func=_cmd_localize)

    bench = sub.add_parser("bench", help="runtime comparison on the standard fixture")
    bench.add_argument(
        "--config", choices=[*BENCH_CONFIGS, "all"], default="all"
    )
    bench.add_argument("--threads", default=str(_default_threads()), help="comma list, e.g. 1,4")
    bench.add_argument("--seed", type=int, default=7)
    bench.add_argument("--csv", action="store_true", help="machine-readable output")
    bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CsiBearingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
