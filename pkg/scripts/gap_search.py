"""Random search for instances where the coloring bound is below the polymatroid bound.

Such gaps are allowed (the two bounds bracket the worst case from either
side); this script just looks for them and records what it finds as JSON
lines, one per gap instance.
"""

import argparse
import json
import random

from fdbounds.bounds import coloring_bound, polymatroid_bound
from fdbounds.core import Query
from fdbounds.randgen import random_fds, random_schema


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-attrs", type=int, default=5)
    args = parser.parse_args(argv)
    rng = random.Random(args.seed)
    gaps = 0
    for trial in range(args.trials):
        schema = random_schema(rng, args.max_attrs, 4)
        fds = random_fds(rng, schema, rng.randint(1, 5), cycle_chance=0.5)
        q = Query(frozenset(schema.relations))
        c = coloring_bound(schema, fds, q).value
        p = polymatroid_bound(schema, fds, q).value
        assert c <= p, (trial, c, p)
        if c < p:
            gaps += 1
            print(json.dumps({
                "trial": trial,
                "relations": {r: sorted(a) for r, a in schema.relations.items()},
                "fds": [str(f) for f in fds],
                "coloring": str(c),
                "polymatroid": str(p),
            }))
    print(json.dumps({"trials": args.trials, "gaps": gaps}))


if __name__ == "__main__":
    main()
