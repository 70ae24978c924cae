"""Key rate of honest runs against 1/D, with the binomial spread for reference."""

import argparse
import math

from aqcka.orchestrator import AckaConfig, key_rate, run_acka


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--l-states", type=int, default=10_000)
    ap.add_argument("--d", type=int, nargs="+", default=[1, 2, 5, 10, 20])
    ap.add_argument("--seed", type=int, default=6000)
    args = ap.parse_args()
    print("D\tL\tkeygen\trate\t1/D\trel_err\trel_sigma")
    for d in args.d:
        out, _ = run_acka(AckaConfig(args.n, args.m, args.l_states, d, args.seed + d))
        rate = key_rate(out)
        sigma = math.sqrt((1 / d) * (1 - 1 / d) / args.l_states) * d
        print(f"{d}\t{args.l_states}\t{out.keygen_rounds}\t{rate:.4f}\t{1 / d:.4f}\t{abs(rate - 1 / d) * d:.4f}\t{sigma:.4f}")


if __name__ == "__main__":
    main()
