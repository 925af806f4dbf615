#!/usr/bin/env python3
"""WNG of the Erlang-weighted quadratic-fit smoother as a function of evaluation delay.

The gain is a quartic in the delay with two local minima of almost equal
depth; this prints the curve and both minima.

Usage: python3 scripts/lsq_delay_sweep.py [--kappa 2] [--terms 3] [--match 25]
"""

import argparse

import numpy as np

from ifreq.analysis import group_delay_dc, wng, wng_bpf
from ifreq.weights import ErlangParams, design_lsq, lsq_min_wng_delay, lsq_solution, solve_erlang_p


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappa", type=int, default=2)
    ap.add_argument("--terms", type=int, default=3)
    ap.add_argument("--match", type=int, default=25, help="Erlang WNG is matched to 1/MATCH")
    ap.add_argument("--qmax", type=float, default=45.0)
    args = ap.parse_args()

    p = solve_erlang_p(args.kappa, 1.0 / args.match)
    prm = ErlangParams(args.kappa, p)
    print(f"p = {p:.16g}   Erlang mean {prm.mean:.4f}   centroid "
          f"{group_delay_dc(design_lsq(args.kappa, p, 1)):.4f}")
    print(f"{'delay':>7} {'wng':>12}")
    for q in np.arange(0.0, args.qmax + 1e-9, 1.0):
        print(f"{q:7.2f} {lsq_solution(args.kappa, p, args.terms, q).wng():12.8f}")

    fine = np.arange(0.0, args.qmax, 0.01)
    g = np.array([lsq_solution(args.kappa, p, args.terms, q).wng() for q in fine])
    idx = np.nonzero((g[1:-1] < g[:-2]) & (g[1:-1] < g[2:]))[0] + 1
    for i in idx:
        print(f"local minimum near delay {fine[i]:.2f}: wng {g[i]:.8f}")

    sol = lsq_solution(args.kappa, p, args.terms)
    d = design_lsq(args.kappa, p, args.terms)
    print(f"\nchosen delay {sol.delay:.6f}: wng {wng(d):.8f}, wng bpf {wng_bpf(d):.6f}, "
          f"group delay {group_delay_dc(d):.6f}")
    q_star = lsq_min_wng_delay(args.kappa, p, args.terms)
    assert abs(q_star - sol.delay) < 1e-12


if __name__ == "__main__":
    main()
