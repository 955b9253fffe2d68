"""Scores of the three equal-AUC Set A models on one large simulated sample."""

import argparse
import time

from wbrier import decompose as dec
from wbrier import metrics as mt
from wbrier import rocutil as ru
from wbrier import simlab as sl
from wbrier import weightfn as wf

WEIGHTS = ((1, 1), (2, 5), (4, 8))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    start = time.perf_counter()
    sets = sl.generate_set_a(args.n, args.seed)
    names = ("model1", "model2", "model3")
    models = [sets[k] for k in names]
    rows = [("AUC", [ru.auc(m) for m in models]),
            ("NB opt-in (0.3)", [mt.net_benefit_opt_in(m, 0.3) for m in models]),
            ("IPA", [dec.ipa(m) for m in models])]
    for a, b in WEIGHTS:
        reps = [dec.decompose(m, wf.Beta(a, b)) for m in models]
        rows += [(f"BS_w({a},{b})", [r.bs_w for r in reps]),
                 ("  MCB_w", [r.mcb_w for r in reps]),
                 ("  DSC_w", [r.dsc_w for r in reps])]

    print(f"{'':18s}" + "".join(f"{n:>10s}" for n in names))
    for label, vals in rows:
        print(f"{label:18s}" + "".join(f"{v:10.4f}" for v in vals))
    print(f"\nn = {args.n}, seed = {args.seed}, {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
