"""Run every config in scripts/configs and write one JSON report per config.

    python3 scripts/run_experiments.py [--out results] [configs ...]
"""
import argparse
import dataclasses
import json
import pathlib
import sys
import time

from rosenfrac.harness import load_config, run_suite

HERE = pathlib.Path(__file__).resolve().parent


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    try:
        return float(x)
    except (TypeError, ValueError):
        return str(x)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("configs", nargs="*", type=pathlib.Path)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("results"))
    args = ap.parse_args(argv)
    paths = args.configs or sorted((HERE / "configs").glob("*.cfg"))
    args.out.mkdir(parents=True, exist_ok=True)
    bad = 0
    for path in paths:
        cfg = load_config(str(path))
        t0 = time.perf_counter()
        report = run_suite(cfg)
        dt = time.perf_counter() - t0
        data = _plain(dataclasses.asdict(report))
        bad += not report.passed
        (args.out / f"{path.stem}.json").write_text(json.dumps(data, indent=2))
        print(f"{'PASS' if report.passed else 'FAIL'} {path.name:24s} {dt:7.1f} s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
