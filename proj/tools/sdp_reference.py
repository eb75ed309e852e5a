"""Solve the scaled lifted relaxation of one scenario with cvxpy.

Run once to produce tests/fixtures/sdp_reference_k2.txt; the test suite
compares the in-house interior-point result against the stored value.

    python tools/sdp_reference.py --devices 2 --seed 7 > tests/fixtures/sdp_reference_k2.txt
"""

import argparse

import cvxpy as cp
import numpy as np

import mecoff


def solve(devices, seed, solver):
    data = mecoff.lifted_sdp(num_devices=devices, seed=seed)
    w0 = np.asarray(data["objective"])
    n = w0.shape[0]
    g = cp.Variable((n, n), symmetric=True)
    cons = [g >> 0]
    cons += [cp.trace(np.asarray(a) @ g) == b for a, b in data["equalities"]]
    cons += [cp.trace(np.asarray(c) @ g) <= d for c, d in data["inequalities"]]
    prob = cp.Problem(cp.Minimize(cp.trace(w0 @ g)), cons)
    prob.solve(solver=solver)
    return prob.value, prob.status


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--devices", type=int, default=2)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    clarabel, status = solve(args.devices, args.seed, cp.CLARABEL)
    print(f"# lifted relaxation, num_devices={args.devices} seed={args.seed}")
    print(f"# solver CLARABEL ({status})")
    print(f"num_devices={args.devices}")
    print(f"seed={args.seed}")
    print(f"objective={clarabel:.12g}")


if __name__ == "__main__":
    main()
