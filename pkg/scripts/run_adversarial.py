"""Validate every implausible family dataset in both modes and tabulate the result."""
from emdm.demo.familytree import family_tree_scheme, run_suite


def main():
    results = run_suite(family_tree_scheme())
    width = max(len(r["name"]) for r in results)
    print(f"{'case':<{width}}  {'expected':<12} {'caught':<6} {'modes':<6} found")
    for r in results:
        print(f"{r['name']:<{width}}  {','.join(r['expected']):<12} "
              f"{'yes' if r['passed'] else 'NO':<6} {'agree' if r['modes_agree'] else 'DIFF':<6} "
              f"{','.join(r['found'])}")
    caught = sum(r["passed"] for r in results)
    print(f"\n{caught}/{len(results)} cases caught")


if __name__ == "__main__":
    main()
