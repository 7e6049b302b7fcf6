"""Run the sandwich check on every instance file in a directory."""

import argparse
import sys
from pathlib import Path

from fdbounds.formats import parse_instance
from fdbounds.verify import verify_instance


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("directory", nargs="?", default=Path(__file__).resolve().parent.parent / "instances")
    parser.add_argument("--algo", choices=["baseline", "components"], default="components")
    args = parser.parse_args(argv)
    failed = 0
    for path in sorted(Path(args.directory).glob("*.yaml")):
        spec = parse_instance(path)
        report = verify_instance(spec.schema, spec.fds, spec.query, algo=args.algo)
        print(f"== {path.name}")
        for line in report.lines():
            print("  " + line)
        failed += not report.passed
    print(f"{failed} instance(s) failed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
