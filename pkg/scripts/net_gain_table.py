"""Tabulate sum capacity and net feedback gain over a range of feedback strengths.

Defaults reproduce the (nc, ns, nr) = (6, 3, 1) showcase where every
feedback bit buys two bits of sum capacity until the region saturates.
"""

import argparse

from ldbfn.cli import main as cli_main


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nc", type=int, default=6)
    parser.add_argument("--ns", type=int, default=3)
    parser.add_argument("--nr", type=int, default=1)
    parser.add_argument("--nf-max", type=int, default=4)
    args = parser.parse_args()
    cli_main([
        "netgain",
        "--nc", str(args.nc), "--ns", str(args.ns), "--nr", str(args.nr),
        "--nf-max", str(args.nf_max),
    ])


if __name__ == "__main__":
    main()
