#!/usr/bin/env python3
"""Sweep the indistinguishability parameter and tabulate fusion fidelities.

Emits plot-ready columns: the closed-form law (3+p)/(9-5p), its simulated
counterpart, the per-basis mean fidelities, and the 16-input
coincidence-weighted mean (63+p)/(144-80p).
"""

import argparse

import numpy as np

from fockfuse.distinguishability import (
    BASIS_KEYS,
    average_fidelity,
    coincidence_weighted_fidelity,
    simulated_average_fidelity,
    simulated_basis_mean_fidelity,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=21)
    parser.add_argument("--out", help="write CSV here instead of stdout")
    args = parser.parse_args()

    header = ["p", "law", "simulated", "all16_weighted"] + [f"basis_{k}" for k in BASIS_KEYS]
    lines = [",".join(header)]
    for p in np.linspace(0.0, 1.0, args.steps):
        p = float(p)
        row = [p, average_fidelity(p), simulated_average_fidelity(p),
               coincidence_weighted_fidelity(p)]
        row += [simulated_basis_mean_fidelity(k, p) for k in BASIS_KEYS]
        lines.append(",".join(f"{x:.12g}" for x in row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")


if __name__ == "__main__":
    main()
