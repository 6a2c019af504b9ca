"""Run every experiment with one config and collect the outputs in one directory.

    python scripts/reproduce.py --config configs/ci.yaml --out out/ci
"""
import argparse
import sys
import time

from stno_reservoir.cli import main

COMMANDS = ("validate", "simulate", "sinesquare", "sweep", "digits")


def run(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config")
    p.add_argument("--out", default="out")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--only", nargs="+", choices=COMMANDS, default=list(COMMANDS))
    args = p.parse_args(argv)
    status = 0
    for command in args.only:
        argv = [command, "--out", args.out, "--jobs", str(args.jobs)]
        if args.config:
            argv += ["--config", args.config]
        t0 = time.perf_counter()
        print(f"== {command}", flush=True)
        code = main(argv)
        print(f"== {command} exit {code} after {time.perf_counter() - t0:.1f}s", flush=True)
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(run())
