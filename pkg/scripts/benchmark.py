"""Time loading and validating a large generated family history.

    python scripts/benchmark.py [--people N] [--marriages M] [--seed S] [--eager]
"""
import argparse
import time

from emdm.demo.familytree import DEMO_TODAY, family_tree_scheme, instance_for, synthetic_dataset
from emdm.engine import Engine, validate_eager


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--people", type=int, default=10_000)
    ap.add_argument("--marriages", type=int, default=5_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eager", action="store_true", help="also time an eager replay; each mutation re-runs its affected checks in full, so keep sizes small")
    args = ap.parse_args()

    scheme = family_tree_scheme()
    data = synthetic_dataset(args.people, args.marriages, args.seed)
    t0 = time.perf_counter()
    inst = instance_for(scheme, data)
    t1 = time.perf_counter()
    report = Engine(scheme).validate(inst)
    t2 = time.perf_counter()
    print(f"people={args.people} marriages={args.marriages} today={DEMO_TODAY}")
    print(f"load      {t1 - t0:8.3f} s")
    print(f"validate  {t2 - t1:8.3f} s  ({len(report.violations)} violations)")
    if args.eager:
        t3 = time.perf_counter()
        eager = validate_eager(scheme, data, DEMO_TODAY)
        print(f"eager     {time.perf_counter() - t3:8.3f} s  ({len(eager.violations)} violations)")


if __name__ == "__main__":
    main()
