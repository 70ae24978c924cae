"""How often Alice refuses to validate under each source attack."""

import argparse
from collections import Counter

from aqcka.adversary import AdversarySpec, Behavior
from aqcka.orchestrator import AckaConfig, run_acka

ATTACKS = {
    "honest": AdversarySpec(colluders=[3]),
    "eq2-equal": AdversarySpec(source="eq2-equal", colluders=[3]),
    "eq2-orthogonal": AdversarySpec(source="eq2-orthogonal", colluders=[3]),
    "skip-random": AdversarySpec(behavior=Behavior("skip", "random"), colluders=[3]),
    "skip-zero": AdversarySpec(behavior=Behavior("skip", "zero"), colluders=[3]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--l-states", type=int, default=100)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=4242)
    args = ap.parse_args()
    print("attack\truns\tmean_ver_rounds\tmean_failures\tfailure_rate\tvalidated")
    for name, spec in ATTACKS.items():
        cfg = AckaConfig(4, 2, args.l_states, args.d, args.seed, adversary=spec)
        tally = Counter()
        for r in range(args.runs):
            out, _ = run_acka(cfg, r)
            tally["ver"] += out.verification_rounds
            tally["fail"] += out.verification_failures
            tally["valid"] += out.alice_validates
        rate = tally["fail"] / max(1, tally["ver"])
        print(
            f"{name}\t{args.runs}\t{tally['ver'] / args.runs:.1f}\t{tally['fail'] / args.runs:.1f}\t"
            f"{rate:.3f}\t{tally['valid']}/{args.runs}"
        )


if __name__ == "__main__":
    main()
