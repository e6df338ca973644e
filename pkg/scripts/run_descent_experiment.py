#!/usr/bin/env python3
"""Run the shipped consistency-descent configuration and save its outputs.

Loads configs/paper_like.json (or any simulation-config document), runs it,
prints the per-round group consistency trajectory and writes the CSV plus a
JSON summary next to it. Deterministic: same config, same files.
"""

from __future__ import annotations

import argparse
import os

from stepwise_ahp.persistence import (
    canonical_json,
    read_document,
    simulation_csv,
    simulation_summary,
    write_text_atomic,
)
from stepwise_ahp.simulate import SimulationConfig, run_simulation

DEFAULT_CONFIG = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "configs",
    "paper_like.json",
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=DEFAULT_CONFIG)
    parser.add_argument("--out-dir", default="descent-out")
    args = parser.parse_args()

    config = read_document(args.config)
    if not isinstance(config, SimulationConfig):
        parser.error(f"{args.config} is not a simulation-config document")

    result = run_simulation(config)
    for rep in result.replications:
        print(f"replication {rep.replication}: initial CR {rep.initial_cr:.4f}")
        for rnd, cr, target in rep.rounds:
            print(f"  round {rnd}: {target} re-judged, group CR {cr:.4f}")
        print(f"  ended {rep.phase}")
    print(
        f"mean initial CR {result.mean_initial_cr:.4f}, "
        f"mean final CR {result.mean_final_cr:.4f}"
    )

    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "trajectories.csv")
    summary_path = os.path.join(args.out_dir, "summary.json")
    write_text_atomic(csv_path, simulation_csv(result))
    write_text_atomic(summary_path, canonical_json(simulation_summary(result)))
    print(f"wrote {csv_path} and {summary_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
