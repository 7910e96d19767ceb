"""Seed sweep of the axiom suite over the built-in systems.

    python3 scripts/run_axioms.py --seeds 10 --samples 50 --out sweep.json
"""

import argparse
import json
import time
from dataclasses import asdict, dataclass, field

from typesemi.action import builtin_systems
from typesemi.pom import AXIOMS, SampleSpec, check_suite
from typesemi.views import semigroup_prec, semigroup_view, suite_budget


@dataclass
class SweepConfig:
    systems: list = field(default_factory=lambda: ["z4", "odometer2", "shift2", "f2"])
    seeds: int = 10
    samples: int = 50


def sweep(cfg: SweepConfig) -> dict:
    systems = builtin_systems()
    rows = []
    for name in cfg.systems:
        s = systems[name]
        budget = suite_budget(s)
        for seed in range(cfg.seeds):
            t0 = time.perf_counter()
            view, prec = semigroup_view(s, budget), semigroup_prec(budget)
            reports = check_suite(view, prec, AXIOMS, SampleSpec(samples=cfg.samples, seed=seed))
            rows.append({
                "system": name,
                "seed": seed,
                "seconds": round(time.perf_counter() - t0, 2),
                "verdicts": {r.axiom: r.verdict for r in reports},
                "coverage": {r.axiom: [r.passed, r.vacuous, r.inconclusive] for r in reports},
            })
            print(f"{name:10s} seed {seed:2d}  {rows[-1]['seconds']:6.2f}s  "
                  + " ".join(f"{ax}:{v}" for ax, v in rows[-1]["verdicts"].items()), flush=True)
    return {"config": asdict(cfg), "runs": rows}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--systems", nargs="+", default=SweepConfig().systems)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--out")
    args = p.parse_args()
    result = sweep(SweepConfig(args.systems, args.seeds, args.samples))
    fails = [r for r in result["runs"] if any(v == "fail" for v in r["verdicts"].values())]
    print(f"{len(result['runs'])} runs, {len(fails)} with a failing axiom")
    if args.out:
        with open(args.out, "w") as f:
            json.dump(result, f, indent=2)


if __name__ == "__main__":
    main()
