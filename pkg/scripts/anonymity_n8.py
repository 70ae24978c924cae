"""Statistical anonymity at n=8 for three Eves, plus the leaking control."""

import argparse

from aqcka.adversary import AdversarySpec, Behavior
from aqcka.anonymity import AnonymityExperiment, run_experiment
from aqcka.net import Eve, Partition

PARTITIONS = [
    Partition.build(8, 0, [1, 2, 3], [6]),
    Partition.build(8, 2, [1, 4, 5], [6]),
    Partition.build(8, 5, [0, 1, 3], [6]),
    Partition.build(8, 3, [1, 2, 4], [6]),
]
EVES = [Eve.parse("bob:1"), Eve.parse("honest-np:7"), Eve.parse("colluders:6")]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=88_000_001)
    ap.add_argument("--no-control", action="store_true", help="skip the leaking variant")
    args = ap.parse_args()
    spec = AdversarySpec(behavior=Behavior("skip", "random"), colluders=[6])
    for leak in (False,) if args.no_control else (False, True):
        exp = AnonymityExperiment(8, 3, 1, 2, EVES, PARTITIONS, args.runs, args.seed, spec, sanity_leak=leak)
        print(f"## {'leaking control' if leak else 'protocol as specified'}")
        for rep in run_experiment(exp):
            print("\n".join(rep.to_lines()))
            print()


if __name__ == "__main__":
    main()
