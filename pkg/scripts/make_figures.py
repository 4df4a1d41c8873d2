"""Render domain and region pictures as SVG through the command line front end.

    python3 scripts/make_figures.py [--out figures]
"""
import argparse
import pathlib

from rosenfrac.cli import main as cli

CASES = [
    (4, "1/2"), (4, "3/5"), (4, "1/lambda"),
    (5, "1/2"), (5, "rho/lambda"), (5, "1/lambda"),
    (6, "13/25"), (7, "1/2"), (8, "1/lambda"),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("figures"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for q, alpha in CASES:
        tag = alpha.replace("/", "_")
        for kind in ("domain", "regions"):
            path = args.out / f"{kind}_q{q}_{tag}.svg"
            rc = cli([kind, f"--q={q}", f"--alpha={alpha}", "--format=svg", f"--out={path}"])
            print(f"{'ok  ' if rc == 0 else f'rc={rc}'} {path}")


if __name__ == "__main__":
    main()
