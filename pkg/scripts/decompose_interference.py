#!/usr/bin/env python3
"""Decompose the interference function (radial transform of a unit ball).

Runs the default protocol on G(x) = 3(sin u - u cos u)/u^3, u = 2 pi x,
prints the recovered terms and writes curve/coefficient files next to this
script unless --no-files is given.
"""

import argparse
from pathlib import Path

import numpy as np

from shelldec import DecomposeConfig, SampledCurve, decompose, evaluate_sum, make_grid
from shelldec.expr import parse, sample
from shelldec.fileio import CoefficientBlock, write_coefficient_file, write_curve_file

EXPR = "3*(sin(2*pi*x) - (2*pi*x)*cos(2*pi*x))/((2*pi*x)^3)"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r-max", type=float, default=8.0)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--eps-dec", type=float, default=1e-3)
    ap.add_argument("--protocol", default="iterative")
    ap.add_argument("--no-files", action="store_true")
    args = ap.parse_args()

    curve = sample(parse(EXPR), args.r_max, args.step, origin_value=1.0, label="G")
    config = DecomposeConfig(eps_dec=args.eps_dec, protocol=args.protocol)
    dec = decompose(curve, config)

    print(f"decomposed G on [0, {args.r_max}] (h = {args.step}), protocol {args.protocol}")
    print(f"  converged          : {dec.converged}")
    print(f"  terms              : {len(dec.terms)}")
    print(f"  iterations         : {dec.iterations_used}")
    print(f"  max |residual|     : {dec.residual_max_range:.3e}"
          f"   ({dec.residual_max_range / abs(curve.f[0]):.2e} of f(0))")
    print(f"  {'R':>10} {'B':>12} {'C':>14}")
    for t in dec.terms:
        print(f"  {t.R:10.4f} {t.B:12.5f} {t.C:14.6e}")

    if not args.no_files:
        out = Path(__file__).with_name("interference")
        model = evaluate_sum(dec.terms, curve.r, config.eps_term, abs(curve.f[0]))
        write_curve_file(
            out.with_suffix(".fit"),
            curve.r,
            [("G", curve.f), ("G_model", model), ("G_diff", curve.f - model)],
        )
        write_coefficient_file(
            out.with_suffix(".coef"),
            [
                CoefficientBlock("G", "initial", dec.initial_terms),
                CoefficientBlock("G", "refined", dec.terms),
            ],
        )
        print(f"wrote {out.with_suffix('.fit').name} and {out.with_suffix('.coef').name}")


if __name__ == "__main__":
    main()
