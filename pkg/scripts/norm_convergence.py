#!/usr/bin/env python3
"""Convergence of the Gram-matrix norm estimate against the closed form.

The multiplication-type model operator with symbol wbar at level p has
operator norm 1/sqrt(p pi) exactly; this sweeps the basis cutoff and
prints the estimate's error, which collapses to rounding noise as soon
as the cutoff covers the symbol's action.
"""

import argparse
import math

from fockcalc import Symbol, m_op, norm_estimate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=4.0, help="scaling level (>= 1)")
    ap.add_argument("--max-cutoff", type=int, default=12, help="largest basis cutoff")
    args = ap.parse_args()

    g = Symbol.monomial(1, 0, (0,), (1,))
    op = m_op(g, p=args.p)
    exact = 1.0 / math.sqrt(args.p * math.pi)

    print(f"exact norm 1/sqrt(p pi) = {exact:.12f}")
    print(f"{'cutoff':>6} {'estimate':>16} {'error':>12}")
    final_err = math.inf
    for cutoff in range(0, args.max_cutoff + 1, 2):
        got = norm_estimate(op, basis_cutoff=cutoff)
        final_err = abs(got - exact)
        print(f"{cutoff:>6} {got:>16.12f} {final_err:>12.3e}")

    if final_err > 1e-4:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
