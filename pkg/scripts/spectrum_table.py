"""Print thresholds, Hurwitz and Lenstra constants and Tong constants for a range of q.

    python3 scripts/spectrum_table.py [--q 4 5 6 7 8] [--k 6]
"""
import argparse

from rosenfrac import field_setup, hurwitz_const, lenstra_const, thresholds, tong_constants
from rosenfrac.harness import parse_alpha


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=int, nargs="+", default=[4, 5, 6, 7, 8])
    ap.add_argument("--k", type=int, default=6)
    args = ap.parse_args(argv)
    for q in args.q:
        F = field_setup(q)
        print(f"q={q}  lambda={float(F.lam):.12f}  H={float(hurwitz_const(F)):.12f}")
        for name, val in thresholds(F).items():
            print(f"  {name:10s} {float(val):.12f}")
        for alpha in ("1/2", "1/lambda"):
            a = parse_alpha(alpha, F)
            L = lenstra_const(F, a).value
            try:
                table = tong_constants(F, a, args.k, with_K=False)
                row = " ".join(f"{float(r.c):.8f}" for r in table.rows)
            except (ValueError, AssertionError) as exc:
                row = f"({exc})"
            print(f"  alpha={alpha:9s} L={float(L):.10f}  c_k: {row}")
        print()


if __name__ == "__main__":
    main()
