"""Normalized log coset counts versus k for a few base distributions.

Prints one CSV row per (distribution, k): the normalized count, the entropy
it approaches, and the remaining gap.
"""

import argparse
import csv
import sys
from fractions import Fraction

from fdbounds.entropy import Distribution, entropy_bits
from fdbounds.synth import GroupConstructionSpec, normalized_log_coset_count

BASES = {
    "fair-bit": Distribution.from_rows(["x"], [("0",), ("1",)], [Fraction(1, 2)] * 2),
    "half-quarter-quarter": Distribution.from_rows(
        ["x"], [("a",), ("b",), ("c",)], [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)]
    ),
    "biased-3-1": Distribution.from_rows(["x"], [("0",), ("1",)], [Fraction(3, 4), Fraction(1, 4)]),
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-exp", type=int, default=12, help="largest k is 2**max-exp")
    args = parser.parse_args(argv)
    out = csv.writer(sys.stdout)
    out.writerow(["base", "k", "normalized_log_count", "entropy", "gap"])
    for name, base in BASES.items():
        h = entropy_bits(base)
        k = base.common_denominator
        while k <= 2 ** args.max_exp:
            v = normalized_log_coset_count(GroupConstructionSpec(base, k), base.attributes)
            out.writerow([name, k, f"{v:.6f}", f"{h:.6f}", f"{h - v:.6f}"])
            k *= 2


if __name__ == "__main__":
    main()
