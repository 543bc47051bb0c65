"""Run the bundled demo sources through transfer and print the packed QLF and the k best."""

import argparse

from xfer.harness import demo_model, demo_pipeline, demo_sources, generate_candidates
from xfer.preference import describe
from xfer.qlf import count_unpackings, print_qlf
from xfer.rewrite import pre_transfer
from xfer.transfer import transfer


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-k", type=int, default=3)
    args = ap.parse_args()
    pipeline, model = demo_pipeline(), demo_model()
    for src in demo_sources():
        packed = transfer(pipeline.rules, pre_transfer(src, pipeline.pre, pipeline.codes)).packed
        print("source:", print_qlf(src))
        print("packed:", print_qlf(packed), f"({count_unpackings(packed)} readings)")
        for cand in generate_candidates(src, pipeline, model, args.k):
            print("  ", describe(cand))
        print()


if __name__ == "__main__":
    main()
