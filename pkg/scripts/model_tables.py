#!/usr/bin/env python3
"""Print the four model input/output matrices at a given indistinguishability.

Reproduces the model-prediction tables (simulated and closed form agree to
1e-10; the script asserts it) for the four tested bases.
"""

import argparse

import numpy as np

from fockfuse.distinguishability import (
    BASIS_KEYS,
    closed_form_matrix,
    simulate_basis_matrix,
    simulated_basis_mean_fidelity,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--p", type=float, default=0.77)
    parser.add_argument("--csv", help="also write all four matrices to this CSV file")
    args = parser.parse_args()

    chunks = []
    for key in BASIS_KEYS:
        simulated = simulate_basis_matrix(key, args.p)
        closed = closed_form_matrix(key, args.p)
        gap = np.abs(simulated.as_array() - closed.as_array()).max()
        assert gap < 1e-10, f"basis {key}: simulation/closed-form gap {gap}"
        print(f"basis {key} (p={args.p}), mean fidelity "
              f"{simulated_basis_mean_fidelity(key, args.p):.6f}")
        width = max(len(x) for x in simulated.row_labels + simulated.col_labels) + 2
        print(" " * width + "".join(f"{c:>{width}}" for c in simulated.col_labels))
        for label, row in zip(simulated.row_labels, simulated.entries):
            print(f"{label:>{width}}" + "".join(f"{x:>{width}.6f}" for x in row))
        print()
        chunks.append(f"# basis {key} p={args.p:.12g}\n" + simulated.to_csv())
    if args.csv:
        with open(args.csv, "w") as handle:
            handle.write("".join(chunks))
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
