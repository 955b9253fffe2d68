"""Scores of the true, OH and OL models (Set B) on one large simulated sample."""

import argparse

from wbrier import decompose as dec
from wbrier import metrics as mt
from wbrier import simlab as sl
from wbrier import weightfn as wf
from wbrier.rocutil import h_measure

WEIGHTS = ((1, 1), (2, 5), (4, 8))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    sets = sl.generate_set_b(args.n, args.seed)
    names = ("true", "oh", "ol")
    models = [sets[k] for k in names]
    rows = [("IPA", [dec.ipa(m) for m in models])]
    for a, b in WEIGHTS:
        w = wf.Beta(a, b)
        reps = [dec.decompose(m, w) for m in models]
        rows += [(f"BS_w({a},{b})", [r.bs_w for r in reps]),
                 ("  MCB_w", [r.mcb_w for r in reps]),
                 ("  DSC_w", [r.dsc_w for r in reps]),
                 ("  residual", [r.residual for r in reps]),
                 ("  weighted Z", [mt.spiegelhalter_z_weighted(m, w) for m in models]),
                 ("  H measure", [h_measure(m, w=w) for m in models])]

    print(f"{'':14s}" + "".join(f"{n:>10s}" for n in names))
    for label, vals in rows:
        print(f"{label:14s}" + "".join(f"{v:10.4f}" for v in vals))


if __name__ == "__main__":
    main()
