"""Command-line entry: read one script on stdin, print verdict and model."""

import argparse
import sys

from .engine import DEFAULT_BUDGET, solve_script


def main(argv=None):
    ap = argparse.ArgumentParser(prog="theoryforge.solver")
    ap.add_argument("--timeout-ms", type=int, default=None)
    ap.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    args = ap.parse_args(argv)
    text = sys.stdin.read()
    timeout = args.timeout_ms / 1000.0 if args.timeout_ms else None
    result = solve_script(text, budget=args.budget, timeout=timeout)
    sys.stdout.write(result.render())
    return 0


if __name__ == "__main__":
    sys.exit(main())
