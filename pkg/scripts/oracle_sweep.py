"""Agreement of decide with the exact oracles on random finite and odometer queries.

    python3 scripts/oracle_sweep.py --finite 500 --odometer 300
"""

import argparse
import random
import time
from collections import Counter

from typesemi.action import builtin_systems, finite_system
from typesemi.subeq import Budget, TupleElement, decide, oracle_exhaustive, oracle_odometer_count


def random_finite(rng, max_points=6, max_order=8):
    while True:
        n = rng.randint(1, max_points)
        s = finite_system(n, [list(rng.sample(range(n), n)) for _ in range(rng.randint(0, 2))])
        if s.group_order <= max_order:
            return s


def finite_sweep(rng, count):
    tally = Counter()
    for _ in range(count):
        s = random_finite(rng)
        pick = lambda: s.space.from_atoms(0, [x for x in range(s.space.points) if rng.random() < 0.5])
        a = TupleElement.of(s, *(pick() for _ in range(rng.randint(1, 3))))
        b = TupleElement.of(s, *(pick() for _ in range(rng.randint(1, 3))))
        got = decide(a, b, Budget(depth=0, radius=s.group_order)).outcome
        tally[(oracle_exhaustive(a, b).outcome, got)] += 1
    return tally


def odometer_sweep(rng, count, max_depth):
    s = builtin_systems()["odometer2"]
    m = s.space

    def entry():
        d = rng.randint(0, max_depth)
        return m.from_atoms(d, [j for j in range(2**d) if rng.random() < 0.4])

    tally = Counter()
    for _ in range(count):
        a = TupleElement.of(s, *(entry() for _ in range(rng.randint(1, 3))))
        b = TupleElement.of(s, *(entry() for _ in range(rng.randint(1, 3))))
        got = decide(a, b, Budget(depth=max_depth, radius=2 ** (max_depth - 1))).outcome
        tally[(oracle_odometer_count(a, b).outcome, got)] += 1
    return tally


def report(label, tally, seconds):
    total = sum(tally.values())
    agree = sum(v for (o, g), v in tally.items() if o == g)
    print(f"{label}: {agree}/{total} agree in {seconds:.2f}s")
    for (o, g), v in sorted(tally.items()):
        print(f"  oracle {o:4s} decide {g:12s} {v}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--finite", type=int, default=500)
    p.add_argument("--odometer", type=int, default=300)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = random.Random(args.seed)
    t0 = time.perf_counter()
    report("finite", finite_sweep(rng, args.finite), time.perf_counter() - t0)
    t0 = time.perf_counter()
    report("odometer", odometer_sweep(rng, args.odometer, args.max_depth), time.perf_counter() - t0)


if __name__ == "__main__":
    main()
