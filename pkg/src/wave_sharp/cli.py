"""Command-line front end: ``wave-sharp verify|search|table ...``.

Exit status is 0 when every report with a pass flag passed, 1 when any
failed (or a run aborted), and 2 on usage or precondition errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import verify as V
from .constants import ProblemInstance, constant_W
from .extremal import TrialDatum, search_extremiser
from .harmonics import i_k_rodrigues, i_k_table
from .propagator import RadialProfile

SCHEMA = "wave-sharp-report/1"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: list
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None
    output: str | None = None
    format: str = "json"
    threads: int = 1
    mc_samples: int = 1_000_000


def _parse_tol(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or key not in V.DEFAULT_TOLERANCES:
            raise UsageError(f"--tol expects KEY=VALUE with KEY in "
                             f"{sorted(V.DEFAULT_TOLERANCES)}, got {item!r}")
        try:
            out[key] = float(val)
        except ValueError:
            raise UsageError(f"--tol value for {key} is not a number: {val!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    common.add_argument("--tol", action="append", metavar="KEY=VALUE",
                        help="override a default tolerance (repeatable)")

    p = argparse.ArgumentParser(prog="wave-sharp",
                                description="Numerical checks of sharp wave Strichartz constants.")
    sub = p.add_subparsers(dest="command", required=True)

    ver = sub.add_parser("verify", help="run verification suites")
    vsub = ver.add_subparsers(dest="suite", required=True)
    s = vsub.add_parser("lemma1", parents=[common])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--kmax", type=int, default=50)
    s = vsub.add_parser("prop", parents=[common])
    s.add_argument("--d", type=int, default=4)
    s.add_argument("--lambda", dest="lam", type=float, default=-1.0)
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--seed", type=int, default=7)
    s = vsub.add_parser("remark", parents=[common])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    for name in ("theorem1", "corollary", "fived", "spectral"):
        vsub.add_parser(name, parents=[common])
    s = vsub.add_parser("all", parents=[common])
    s.add_argument("--mc-samples", type=int, default=1_000_000)

    s = sub.add_parser("search", parents=[common], help="extremiser search near f*")
    s.add_argument("--basis-size", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-iter", type=int, default=200)
    s.add_argument("--step", type=float, default=0.1)

    tab = sub.add_parser("table", help="plot-ready tables")
    tsub = tab.add_subparsers(dest="table", required=True)
    s = tsub.add_parser("ik", parents=[common])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--kmax", type=int, default=50)
    return p


# ------------------------------------------------------------------ commands

def _verify(args, cfg: RunConfig, sink: list) -> None:
    tols = cfg.tolerances
    if args.suite == "lemma1":
        sink.append(V.verify_lemma1_signs(args.d, args.lam, args.kmax,
                                          tols.get("quadrature_1d", 1e-10)))
    elif args.suite == "prop":
        sink.append(V.verify_prop(args.d, args.lam, args.trials, args.seed))
    elif args.suite == "remark":
        sink.append(V.verify_remark(args.d, args.lam))
    else:
        names = list(V.SUITES) if args.suite == "all" else [args.suite]
        samples = getattr(args, "mc_samples", 1_000_000)
        # one suite at a time so that an abort still leaves earlier reports
        for name in names:
            sink.extend(V.run_all(tols, suites=[name], threads=cfg.threads,
                                  mc_samples=samples))


def _search(args, sink: list) -> None:
    if not 1 <= args.basis_size <= 9:
        raise UsageError("--basis-size must be between 1 and 9")
    rng = np.random.Generator(np.random.Philox(args.seed))
    eps0 = rng.uniform(-0.3, 0.3, args.basis_size)
    init = TrialDatum(RadialProfile.extremal(),
                      tuple((float(e), j, 0) for j, e in enumerate(eps0)), 4)
    res = search_extremiser(init, {"max_iter": args.max_iter, "step": args.step,
                                   "seed": args.seed})
    w = constant_W(ProblemInstance(4, 0.75))
    meta = {"initial_eps": eps0, "best_eps": res.best_datum.eps, "accepted_steps": res.accepted,
            "converged": res.converged, "message": res.message, "trace": res.trace,
            "gap_to_W": (w - res.best_ratio) / w, **res.meta}
    sink.append(V.VerificationReport("search.ceiling", res.best_ratio, w, 1e-4 * w, "le", meta))


def _table_ik(args) -> str:
    table = i_k_table(args.d, args.lam, args.kmax)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "d", "lambda", "i_k", "i_k_closed_form"])
    for k, v in enumerate(table):
        w.writerow([k, args.d, repr(args.lam), repr(float(v)),
                    repr(i_k_rodrigues(args.d, args.lam, k))])
    return buf.getvalue()


# -------------------------------------------------------------------- output

def serialize(reports: list, cfg: RunConfig) -> str:
    rows = []
    for r in reports:
        d = r.to_dict()
        echo = asdict(cfg)
        echo.pop("threads")  # results do not depend on it, so neither does the output
        d["metadata"] = {**d["metadata"], "config": V._clean(echo)}
        d["schema"] = SCHEMA
        rows.append(d)
    if cfg.format == "json":
        return json.dumps(rows, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    keys = ["claim_id", "computed", "expected", "abs_err", "rel_err", "tol", "relation",
            "pass", "metadata", "schema"]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for d in rows:
        w.writerow([json.dumps(d[k], sort_keys=True) if k == "metadata" else
                    ("" if d[k] is None else repr(d[k]) if isinstance(d[k], float) else d[k])
                    for k in keys])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _exit_code(reports: list) -> int:
    return 1 if any(r.passed is False for r in reports) else 0


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return int(exc.code) if exc.code is not None else 0
    reports: list = []
    cfg = None
    try:
        threads = V.thread_count()
        cfg = RunConfig(command=list(argv if argv is not None else sys.argv[1:]),
                        tolerances=_parse_tol(getattr(args, "tol", None)),
                        seed=getattr(args, "seed", None), output=args.out,
                        format=args.format, threads=threads,
                        mc_samples=getattr(args, "mc_samples", 1_000_000))
        if args.command == "table":
            _emit(_table_ik(args), args.out)
            return 0
        if args.command == "verify":
            _verify(args, cfg, reports)
        else:
            _search(args, reports)
    except (UsageError, ValueError) as exc:
        print(f"wave-sharp: error: {exc}", file=sys.stderr)
        if reports and cfg is not None:
            _emit(serialize(reports, cfg), args.out)
        return 2
    except Exception as exc:
        print(f"wave-sharp: run aborted: {type(exc).__name__}: {exc}", file=sys.stderr)
        if reports and cfg is not None:
            _emit(serialize(reports, cfg), args.out)
        return 1
    _emit(serialize(reports, cfg), args.out)
    return _exit_code(reports)


def main() -> None:
    sys.exit(run())


__all__ = ["run", "main", "build_parser", "serialize", "RunConfig", "SCHEMA"]
