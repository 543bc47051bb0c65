"""Cross-validated accuracy on synthetic corpora, one line per seed.

    python3 scripts/run_synth_experiment.py --seeds 42 1 2 3 --n 500 --noise 0.05
"""

import argparse
import time

from xfer.harness import evaluate
from xfer.synth import SynthConfig, synth_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[42])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--folds", type=int, default=5)
    ap.add_argument("-k", type=int, default=5)
    args = ap.parse_args()

    accs = []
    for seed in args.seeds:
        t0 = time.perf_counter()
        corpus, _ = synth_corpus(SynthConfig(seed=seed, n_utterances=args.n, noise_rate=args.noise, k=args.k))
        rep = evaluate(corpus, folds=args.folds, rng_seed=seed)
        first = sum(u.candidates[0].acceptable for u in corpus if u.has_acceptable())
        eligible = sum(u.has_acceptable() for u in corpus)
        accs.append(rep.accuracy)
        print(f"seed {seed}: accuracy {rep.accuracy:.4f} baseline {rep.baseline_expected:.4f} "
              f"first-candidate {first / max(eligible, 1):.4f} eligible {eligible}/{len(corpus)} "
              f"({time.perf_counter() - t0:.1f}s)")
    if len(accs) > 1:
        print(f"mean accuracy {sum(accs) / len(accs):.4f} over {len(accs)} seeds")


if __name__ == "__main__":
    main()
