"""Models trained on true vs misclassified outcomes, scored against the truth.

Prints one seed's scores with cluster-bootstrap intervals, then the
win rate of the truth-trained model over many seeds.
"""

import argparse

from wbrier import inference as inf
from wbrier import metrics as mt
from wbrier import report
from wbrier import simlab as sl
from wbrier import weightfn as wf

WEIGHTS = (wf.Beta(1, 1), wf.Beta(2, 8), wf.Beta(3, 15), wf.Beta(4, 3))
CUTOFF = mt.cutoff_from_costs(1, 0, 7, 0)  # missing a case costs 7 times a false alarm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--patients", type=int, default=4000)
    ap.add_argument("--bootstrap", type=int, default=2000)
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()

    out = sl.misclassification_study(args.seed, args.patients)
    cfg = inf.BootstrapConfig(args.bootstrap, args.seed, "cluster")
    print(f"seed {args.seed}: {out['Y'].n} validation visits, event rate "
          f"{out['Y'].prevalence:.3f}, opt-out cutoff {CUTOFF:.3f}\n")
    for name, d in out.items():
        rep, _ = report.evaluate(d, WEIGHTS, [CUTOFF], boot=cfg, workers=args.workers)
        cells = [f"AUC {rep.auc:.3f}", f"IPA {rep.ipa:.3f}"]
        for w in WEIGHTS:
            ci = rep.intervals[f"bs_w[{w}]"]
            cells.append(f"BS_w({w}) {ci.estimate:.4f} ({ci.lower:.4f}, {ci.upper:.4f})")
        ci = rep.intervals[f"nb_opt_out[{CUTOFF!r}]"]
        cells.append(f"NB out {ci.estimate:.3f} ({ci.lower:.3f}, {ci.upper:.3f})")
        print(f"{name:4s} " + " | ".join(cells))

    pairs = [("Y", "S1"), ("S1", "S2"), ("Y", "S2+")]
    rows = report.compare({k: out[k] for k in ("Y", "S1", "S2", "S2+")}, [wf.Beta(2, 8)],
                          [CUTOFF], boot=cfg, workers=args.workers)
    print("\npaired differences (cluster bootstrap)")
    for r in rows:
        if (r["first"], r["second"]) in pairs and r["statistic"] in ("bs_w[beta:2,8]", "auc"):
            print(f"  {r['first']}-{r['second']:4s} {r['statistic']:16s} {r['difference']:+.4f} "
                  f"({r['lower']:+.4f}, {r['upper']:+.4f})")

    wins = 0
    for s in range(args.seeds):
        o = sl.misclassification_study(s, args.patients)
        wins += all(mt.weighted_brier(o["Y"], w) < mt.weighted_brier(o[k], w)
                    for k in ("S1", "S2") for w in (wf.Beta(2, 8), wf.Beta(3, 15)))
    print(f"\ntruth-trained model lower BS_w(2,8) and BS_w(3,15): {wins}/{args.seeds} seeds")


if __name__ == "__main__":
    main()
