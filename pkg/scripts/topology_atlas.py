#!/usr/bin/env python3
"""Census of the 13 canonical flow patterns, with a sampled equilibrium count.

For each pattern: its arcs, connectivity, admitted equilibrium labels, and —
over a few random parameter draws — how many of those labels actually show up
feasible.  A quick orientation table for picking a topology to study.
"""

from __future__ import annotations

import argparse

import numpy as np

from tripatch import (
    ADMITTED_LABELS,
    ModelParams,
    TOPOLOGIES,
    apply_topology,
    arc_labels,
    arcs_of_topology,
    find_all_equilibria,
    is_strongly_connected,
)


def draw(rng) -> ModelParams:
    m = rng.uniform(0.0, 2.0, (3, 3))
    np.fill_diagonal(m, 0.0)
    return ModelParams(rng.uniform(0.1, 5.0, 3), rng.uniform(0.1, 5.0, 3), m)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--draws", type=int, default=25,
                    help="random parameter draws per pattern (default 25)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'pattern':9s} {'arcs':28s} {'strong':6s} "
          f"{'admitted':32s} feasible (mean over {args.draws} draws)")
    for topo in TOPOLOGIES:
        arcs = arcs_of_topology(topo)
        counts = []
        for i in range(args.draws):
            p = apply_topology(draw(rng), topo)
            counts.append(sum(r.feasible
                              for r in find_all_equilibria(topo, p, seed=i)))
        print(f"{topo:9s} {' '.join(arc_labels(arcs)):28s} "
              f"{'yes' if is_strongly_connected(arcs) else 'no':6s} "
              f"{' '.join(ADMITTED_LABELS[topo]):32s} "
              f"{np.mean(counts):.2f}")


if __name__ == "__main__":
    main()
