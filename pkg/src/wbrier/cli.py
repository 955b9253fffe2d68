"""Command-line interface.

Subcommands: ``eval``, ``compare``, ``curves``, ``simulate``.

Input CSV: header row with columns ``risk`` and ``outcome`` plus an
optional cluster column (``--cluster-col``, default ``cluster``).

Exit codes:
    0  success
    1  I/O error
    2  usage error, malformed CSV or weight spec
    3  degenerate dataset for a scaled score (single outcome class)
    4  compare inputs not row-aligned on outcomes
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import decompose as dec
from . import inference as inf
from . import report, rocutil, simlab
from .errors import AlignmentError, DegenerateDataError, WeightSpecError
from .metrics import ValidationSet
from .weightfn import parse_weight

log = logging.getLogger("wbrier")

EXIT_OK, EXIT_IO, EXIT_INPUT, EXIT_DEGENERATE, EXIT_ALIGN = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def read_validation_csv(path: str, cluster_col: str = "cluster") -> ValidationSet:
    """Parse ``risk,outcome[,cluster]``. Errors name the offending line."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        for col in ("risk", "outcome"):
            if col not in header:
                raise InputError(f"{path}: header lacks a {col!r} column")
        ir, iy = header.index("risk"), header.index("outcome")
        ic = header.index(cluster_col) if cluster_col in header else None
        risks, ys, cl = [], [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}: line {line}: expected {len(header)} fields, got {len(row)}")
            try:
                r = float(row[ir])
            except ValueError:
                raise InputError(f"{path}: line {line}: risk {row[ir]!r} is not a number") from None
            if not (0.0 <= r <= 1.0):
                raise InputError(f"{path}: line {line}: risk {r} outside [0, 1]")
            y = row[iy].strip()
            if y not in ("0", "1"):
                raise InputError(f"{path}: line {line}: outcome {row[iy]!r} is not 0 or 1")
            risks.append(r)
            ys.append(int(y))
            if ic is not None:
                cl.append(row[ic])
    if not risks:
        raise InputError(f"{path}: no data rows")
    return ValidationSet(np.array(risks), np.array(ys, dtype=np.int8),
                         np.array(cl) if ic is not None else None)


def write_validation_csv(path: str, risks, outcomes, extra: Optional[Dict[str, np.ndarray]] = None):
    extra = extra or {}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["risk", "outcome", *extra])
        cols = [np.asarray(v) for v in extra.values()]
        for i, (r, y) in enumerate(zip(np.asarray(risks).tolist(), np.asarray(outcomes).tolist())):
            w.writerow([format(r, ".17g"), int(y), *[c[i] for c in cols]])


def _parse_bins(text: str) -> dec.BinningSpec:
    if text == "unique":
        return dec.UniqueValues()
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--bins expects an integer or 'unique', got {text!r}")
    if k < 2:
        raise argparse.ArgumentTypeError("--bins needs at least 2 bins")
    return dec.QuantileBins(k)


def _parse_cutoff(text: str) -> float:
    try:
        c = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cutoff {text!r}")
    if not (0 < c < 1):
        raise argparse.ArgumentTypeError(f"cutoff {c} outside (0, 1)")
    return c


def _parse_weight_arg(text: str):
    try:
        return parse_weight(text)
    except WeightSpecError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _parse_seed(text: str) -> int:
    s = int(text, 0)
    if not (0 <= s < 2**64):
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return s


def _parse_level(text: str) -> float:
    p = float(text)
    if not (0 < p < 1):
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return p


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _emit(text: str, out: str):
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _csv_text(rows: List[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


def _boot_cfg(args) -> Optional[inf.BootstrapConfig]:
    if not args.bootstrap:
        return None
    unit = "cluster" if args.cluster_bootstrap else "observation"
    return inf.BootstrapConfig(args.bootstrap, args.seed, unit)


def _model_names(paths: Sequence[str]) -> List[str]:
    names = [os.path.basename(p) for p in paths]
    if len(set(names)) != len(names):
        names = list(paths)
    return names


def _load_all(args):
    out = {}
    for name, path in zip(_model_names(args.inputs), args.inputs):
        out[name] = read_validation_csv(path, args.cluster_col)
    return out


def cmd_eval(args) -> int:
    datasets = _load_all(args)
    boot = _boot_cfg(args)
    models, rows = {}, []
    for name, data in datasets.items():
        rep, decomps = report.evaluate(data, args.weight, args.cutoff, args.bins, boot,
                                       args.level, args.workers)
        models[name] = report.report_dict(rep, decomps)
        rows.extend(report.report_rows(name, rep))
    if args.format == "json":
        doc = {"schema_version": report.SCHEMA_VERSION, "command": "eval", "models": models}
        _emit(json.dumps(_clean(doc), indent=2) + "\n", args.out)
    else:
        _emit(_csv_text(_clean(rows)), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    if len(args.inputs) < 2:
        raise InputError("compare needs at least two inputs")
    datasets = _load_all(args)
    n = {d.n for d in datasets.values()}
    if len(n) != 1:
        raise AlignmentError("inputs differ in number of rows")
    rows = report.compare(datasets, args.weight, args.cutoff, _boot_cfg(args), args.level,
                          args.workers)
    if args.format == "json":
        doc = {"schema_version": report.SCHEMA_VERSION, "command": "compare",
               "differences": rows}
        _emit(json.dumps(_clean(doc), indent=2) + "\n", args.out)
    else:
        _emit(_csv_text(_clean(rows)), args.out)
    return EXIT_OK


def _curve_tables(name: str, data: ValidationSet, grid, bins) -> Dict[str, List[dict]]:
    cs = rocutil.curves(data, grid, bins)
    roc_rows = [{"model": name, "fpr": f, "tpr": t, "threshold": th}
                for f, t, th in cs.roc.points]
    dca_rows = [{"model": name, "c": c, "nb_opt_in": a, "nb_opt_out": b, "loss": l}
                for c, a, b, l in zip(cs.decision.grid.tolist(), cs.decision.nb_opt_in.tolist(),
                                      cs.decision.nb_opt_out.tolist(), cs.decision.loss.tolist())]
    cal_rows = [{"model": name, "bin": k, "n": b.n, "mean_risk": b.mean_risk,
                 "event_rate": b.event_rate} for k, b in enumerate(cs.calibration)]
    return {"roc": roc_rows, "decision": dca_rows, "calibration": cal_rows}


def cmd_curves(args) -> int:
    datasets = _load_all(args)
    grid = None
    if args.grid_step:
        grid = np.arange(args.grid_step, 1.0 - 1e-12, args.grid_step)
    tables = {name: _curve_tables(name, d, grid, args.bins) for name, d in datasets.items()}
    if args.format == "json":
        doc = {"schema_version": report.SCHEMA_VERSION, "command": "curves", "models": tables}
        _emit(json.dumps(_clean(doc), indent=2) + "\n", args.out)
    else:
        if args.table is None:
            raise InputError("--format csv needs --table roc|decision|calibration")
        rows = [r for t in tables.values() for r in t[args.table]]
        _emit(_csv_text(_clean(rows)), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    written = []
    if args.design in ("set-a", "set-b"):
        gen = simlab.generate_set_a if args.design == "set-a" else simlab.generate_set_b
        for name, d in gen(args.n, args.seed).items():
            path = os.path.join(args.out, f"{args.design}_{name}.csv")
            write_validation_csv(path, d.risks, d.outcomes)
            written.append(path)
    elif args.design == "misclassified":
        c = simlab.generate_misclassified(args.patients, args.visits, args.seed,
                                          args.flip01, args.flip10)
        path = os.path.join(args.out, "misclassified.csv")
        write_validation_csv(path, c.true_risk, c.outcome,
                             {"surrogate": c.surrogate, "cluster": c.cluster_ids})
        written.append(path)
    else:  # misclassified-study
        for name, d in simlab.misclassification_study(args.seed, args.patients,
                                                      args.visits).items():
            path = os.path.join(args.out, f"study_model_{name.replace('+', 'plus')}.csv")
            write_validation_csv(path, d.risks, d.outcomes, {"cluster": d.cluster_ids})
            written.append(path)
    for p in written:
        print(p)
    return EXIT_OK


def _add_scoring_flags(p):
    p.add_argument("inputs", nargs="+", help="CSV files with risk,outcome[,cluster]")
    p.add_argument("--weight", action="append", type=_parse_weight_arg, default=[],
                   help="weight spec: uniform | beta:a,b | point:c0 | mix:w1*s1+w2*s2 (repeatable)")
    p.add_argument("--cutoff", action="append", type=_parse_cutoff, default=[],
                   help="risk cutoff for L(c) and net benefits (repeatable)")
    p.add_argument("--bins", type=_parse_bins, default=dec.DECILES,
                   help="quantile bins k, or 'unique' (default 10)")
    p.add_argument("--bootstrap", type=int, default=0, metavar="REPS",
                   help="bootstrap replicates (0 = none)")
    p.add_argument("--seed", type=_parse_seed, default=0)
    p.add_argument("--level", type=_parse_level, default=0.95)
    p.add_argument("--cluster-col", default="cluster")
    p.add_argument("--cluster-bootstrap", action="store_true",
                   help="resample clusters instead of observations")
    p.add_argument("--workers", type=int, default=1, help="threads for bootstrap replicates")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wbrier", description="Weighted Brier score toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="score one or more models")
    _add_scoring_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="paired differences between row-aligned models")
    _add_scoring_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("curves", help="ROC, decision-curve and calibration tables")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--bins", type=_parse_bins, default=dec.DECILES)
    p.add_argument("--grid-step", type=float, default=None,
                   help="decision-curve spacing (default 0.01)")
    p.add_argument("--table", choices=("roc", "decision", "calibration"))
    p.add_argument("--cluster-col", default="cluster")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("simulate", help="write simulated validation sets as CSV")
    p.add_argument("design", choices=("set-a", "set-b", "misclassified", "misclassified-study"))
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=_parse_seed, default=0)
    p.add_argument("--patients", type=int, default=4000)
    p.add_argument("--visits", type=int, default=2)
    p.add_argument("--flip01", type=float, default=0.15, help="P(S=1 | Y=0)")
    p.add_argument("--flip10", type=float, default=0.15, help="P(S=0 | Y=1)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "command", None) in ("eval", "compare") and not (args.weight or args.cutoff):
        ap.error("request at least one --weight or --cutoff")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateDataError as exc:
        print(f"error: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except AlignmentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ALIGN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
