"""Command-line entry point ``gap-kit``.

Commands::

    gap-kit run <config.json> [--out DIR] [--seed N] [--json]
    gap-kit spectrum --batch <file.json> [--out DIR] [--json]
    gap-kit sweep <config.json> [--out DIR] [--json]
    gap-kit counterexample [--iters N] [--out DIR] [--json]

Each command writes ``<name>.json`` (and ``<name>.csv`` when the experiment
produced an iteration trace) to the output directory, chosen from ``--out``,
then ``$GAPKIT_OUT``, then the config's ``out`` key, then ``gapkit-out``.
The exit code is 0 iff every verdict passes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from typing import List, Optional

from . import __version__
from .errors import GapKitError
from .experiments import ExperimentConfig, ExperimentResult, run_experiment

CSV_COLUMNS = ["k", "dist_to_solution", "dist_A", "dist_B", "face_label"]
DEFAULT_OUT = "gapkit-out"


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def result_document(result: ExperimentResult, timestamp: Optional[str] = None) -> dict:
    """Result document; the timestamp is confined to ``header.timestamp``."""
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc = {"header": {"tool": "gap-kit", "version": __version__,
                      "timestamp": timestamp}}
    doc.update(result.to_dict())
    return doc


def trace_csv(result: ExperimentResult) -> Optional[str]:
    """CSV rendering of the iteration trace, or None without a trace."""
    tr = result.trace
    if tr is None:
        return None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    dsol = tr.distances_to_solution
    for k in range(len(tr)):
        lab = tr.face_labels[k]
        w.writerow([k, "" if dsol is None else repr(float(dsol[k])),
                    repr(float(tr.dist_A[k])), repr(float(tr.dist_B[k])),
                    "" if lab is None else "|".join(lab)])
    return buf.getvalue()


def write_outputs(result: ExperimentResult, out_dir: str,
                  timestamp: Optional[str] = None) -> dict:
    name = result.config.name or result.config.kind
    doc = result_document(result, timestamp)
    _atomic_write(os.path.join(out_dir, f"{name}.json"),
                  json.dumps(doc, indent=2, sort_keys=True) + "\n")
    text = trace_csv(result)
    if text is not None:
        _atomic_write(os.path.join(out_dir, f"{name}.csv"), text)
    return doc


def _out_dir(args, cfg: Optional[dict] = None) -> str:
    if getattr(args, "out", None):
        return args.out
    env = os.environ.get("GAPKIT_OUT")
    if env:
        return env
    if cfg and cfg.get("out"):
        return cfg["out"]
    return DEFAULT_OUT


def _load(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _finish(args, result: ExperimentResult, cfg: Optional[dict] = None) -> int:
    doc = write_outputs(result, _out_dir(args, cfg))
    if args.json:
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        for c in result.checks:
            print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}")
        print(f"verdict: {'pass' if result.verdict else 'fail'}")
    return 0 if result.verdict else 1


def _config(d: dict, **overrides) -> ExperimentConfig:
    d = {k: v for k, v in d.items() if k != "out"}
    d.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(d)


def cmd_run(args) -> int:
    raw = _load(args.config)
    cfg = _config(raw, seed=args.seed)
    return _finish(args, run_experiment(cfg), raw)


def cmd_spectrum(args) -> int:
    raw = _load(args.batch)
    if "kind" not in raw:
        raw = {"kind": "spectrum_check", "problem": raw}
    cfg = _config(raw, seed=args.seed)
    if cfg.kind != "spectrum_check":
        raise GapKitError("spectrum batch must be a spectrum_check config")
    return _finish(args, run_experiment(cfg), raw)


def cmd_sweep(args) -> int:
    raw = _load(args.config)
    if "kind" not in raw:
        raw = {"kind": "param_sweep", "problem": raw}
    cfg = _config(raw)
    if cfg.kind != "param_sweep":
        raise GapKitError("sweep config must be a param_sweep config")
    return _finish(args, run_experiment(cfg), raw)


def cmd_counterexample(args) -> int:
    cfg = ExperimentConfig(kind="counterexample", problem={"iters": args.iters},
                           params=[1.0, 1.5, 1.5])
    return _finish(args, run_experiment(cfg))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--json", action="store_true",
                        help="print the result document to stdout")
    p = argparse.ArgumentParser(prog="gap-kit", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run one experiment config")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.set_defaults(func=cmd_run)
    s = sub.add_parser("spectrum", parents=[common],
                       help="closed-form vs numeric spectra over a batch")
    s.add_argument("--batch", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_spectrum)
    w = sub.add_parser("sweep", parents=[common], help="parameter grid sweep")
    w.add_argument("config")
    w.set_defaults(func=cmd_sweep)
    c = sub.add_parser("counterexample", parents=[common],
                       help="cone/line example without face identification")
    c.add_argument("--iters", type=int, default=50)
    c.set_defaults(func=cmd_counterexample)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GapKitError, OSError, ValueError, KeyError) as exc:
        print(f"gap-kit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
