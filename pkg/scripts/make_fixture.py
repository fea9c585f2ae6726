#!/usr/bin/env python3
"""Write the standard simulation fixtures (scene, trajectory, record).

Produces the 880-packet benchmark record (4.4 s arc at 200 packets/sec) plus
the scene and trajectory files the CLI consumes, so the whole pipeline can be
driven by hand:

    python scripts/make_fixture.py --out fixtures/
    csibearing estimate fixtures/record.json --out fixtures/
"""

import argparse
from pathlib import Path

import numpy as np

from csibearing import (
    DatasetRecord,
    Scene,
    arc_trajectory,
    save_record,
    save_scene,
    save_trajectory,
    simulate_channel,
)
from csibearing.dataset import RecordMeta


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fixtures", help="output directory")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--duration", type=float, default=4.4, help="arc seconds")
    parser.add_argument("--rate", type=float, default=200.0, help="packets per second")
    parser.add_argument("--tx", type=float, nargs=3, default=[5.0, 3.0, 0.5])
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    traj = arc_trajectory(duration_s=args.duration)
    scene = Scene(np.array(args.tx), cfo_enabled=True, rng_seed=args.seed)
    log = simulate_channel(scene, traj, args.rate)
    record = DatasetRecord(
        log=log,
        trajectories={"groundtruth": traj},
        meta=RecordMeta(tx_positions={1: tuple(args.tx)}),
    )

    save_scene(scene, out / "scene.json")
    save_trajectory(traj, out / "trajectory.json")
    save_record(record, out / "record.json")
    print(
        f"wrote {out}/scene.json, trajectory.json, record.json "
        f"({len(log.forward)} forward / {len(log.reverse)} reverse packets)"
    )


if __name__ == "__main__":
    main()
