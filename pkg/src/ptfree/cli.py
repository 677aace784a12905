"""Command-line runner: ``ptfree <command> [options]``.

Commands
--------
wg         exact Weingarten table on S_n at dimension N
exact      exact expected normalized trace of a word (both routes by default)
mc         Monte Carlo estimate of the same quantity
predict    limit moment of a sign pattern under a cumulant model
freeness   freeness verdicts for two or more transpose specs on an N grid
reproduce  canned prediction-vs-measurement experiments

Word grammar (see :mod:`ptfree.grammar`)::

    letter := label ':' perm "'"?      e.g.  A:G(1,2,4)  A:G(1,2,4)'  B:T  B:I'
    perm   := I | T | G(theta,b,d)     theta in {1,-1}, b*d = N

Spec grammar for ``freeness``: ``t=<+-1>,b=<expr>,d=<expr>`` with ``expr`` an
integer, ``N``, ``N/k`` or ``N^alpha``.

Output is JSON (default) or CSV. Both carry ``schema_version`` and the
resolved configuration, so a run can be repeated from its own output.

Exit codes: 0 success, 1 tolerance failure, 2 usage or configuration error,
3 capacity limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction

from . import __version__
from .errors import CapacityError, PtfreeError
from .experiments import DEFAULTS, EXPERIMENTS, run
from .freeness import parse_spec, predict_family
from .grammar import parse_pattern, parse_word
from .moments import (
    block_spec,
    exact_trace_expectation_direct,
    exact_trace_expectation_pairing,
    haar_spec,
    moments_from_cumulants,
    transpose_spec,
)
from .sampler import EstimatorResult, estimate_word_trace
from .weingarten import compute_table

SCHEMA_VERSION = 1

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3

MODELS = {"transpose": transpose_spec, "block": block_spec, "haar": lambda b: haar_spec()}


class Output:
    """Header (schema and config) plus tabular rows or a JSON payload."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.columns: list[str] = []
        self.rows: list[list] = []
        self.extra: dict = {}

    def render(self, fmt: str) -> str:
        if fmt == "json":
            doc = {"schema_version": SCHEMA_VERSION, "command": self.command, "config": self.config}
            doc["rows"] = [dict(zip(self.columns, r)) for r in self.rows]
            doc.update(self.extra)
            return json.dumps(doc, indent=2, default=_jsonable) + "\n"
        buf = io.StringIO()
        buf.write(f"# schema_version={SCHEMA_VERSION}\n")
        buf.write(f"# command={self.command}\n")
        buf.write(f"# config={json.dumps(self.config, default=_jsonable, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(x) for x in r])
        return buf.getvalue()


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _cell(x):
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, (list, dict)):
        return json.dumps(x, default=_jsonable)
    return str(x)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "format", "verbose")}


def cmd_wg(args) -> tuple[Output, int]:
    table = compute_table(args.n, args.N)
    out = Output("wg", _config(args))
    out.columns = ["cycle_type", "numerator", "denominator", "value"]
    for lam, num, den in table.rows():
        out.rows.append([list(lam), num, den, str(Fraction(num, den))])
    return out, EXIT_OK


def cmd_exact(args) -> tuple[Output, int]:
    word = parse_word(args.word, args.N)
    out = Output("exact", _config(args))
    out.columns = ["word", "N", "route", "value", "value_float"]
    values = {}
    if args.route in ("direct", "both"):
        values["direct"] = exact_trace_expectation_direct(word, args.budget)
    if args.route in ("pairing", "both"):
        values["pairing"] = exact_trace_expectation_pairing(word, args.budget)
    for route, v in values.items():
        out.rows.append([str(word), args.N, route, str(v), float(v)])
    agree = len(set(values.values())) == 1
    out.extra["routes_agree"] = agree
    return out, EXIT_OK if agree else EXIT_FAIL


def cmd_mc(args) -> tuple[Output, int]:
    word = parse_word(args.word, args.N)
    res = estimate_word_trace(word, args.samples, args.seed, args.threads)
    out = Output("mc", _config(args))
    out.columns = list(EstimatorResult.FIELDS)
    out.rows.append(res.csv_row())
    code = EXIT_OK
    if args.expect is not None:
        ok = abs(res.mean - args.expect) <= args.band * res.std_error
        out.columns.append("passed")
        out.rows[0].append(bool(ok))
        code = EXIT_OK if ok else EXIT_FAIL
    return out, code


def cmd_predict(args) -> tuple[Output, int]:
    pattern = parse_pattern(args.pattern)
    spec = MODELS[args.model](args.b)
    v = moments_from_cumulants(spec, pattern)
    out = Output("predict", _config(args))
    out.columns = ["pattern", "model", "b", "value", "value_float"]
    out.rows.append([args.pattern, args.model, args.b, str(v), float(v)])
    return out, EXIT_OK


def cmd_freeness(args) -> tuple[Output, int]:
    texts = [args.spec1, args.spec2] + list(args.spec or [])
    specs = [parse_spec(t) for t in texts]
    grid = _grid(args.grid)
    verdicts, family = predict_family(specs, grid)
    out = Output("freeness", _config(args))
    out.columns = ["pair", "clause", "predicted_free", "fractions", "heuristic", "diagnostic"]
    for v in verdicts.values():
        r = v.record()
        out.rows.append([r[c] for c in out.columns])
    out.extra["family_free"] = family
    return out, EXIT_OK


def cmd_reproduce(args) -> tuple[Output, int]:
    overrides = {k: getattr(args, k) for k in ("b", "d", "samples", "seed", "band", "grid", "threads")}
    overrides = {k: v for k, v in overrides.items() if k in DEFAULTS[args.name]}
    report = run(args.name, **overrides)
    out = Output("reproduce", dict(_config(args), resolved=report.params))
    out.columns = ["experiment", "quantity", "prediction", "prediction_float", "measured", "std_error", "passed", "note"]
    for row in report.rows:
        r = row.record()
        out.rows.append([args.name] + [r[c] for c in out.columns[1:]])
    out.extra["passed"] = report.passed
    return out, EXIT_OK if report.passed else EXIT_FAIL


def _grid(text):
    try:
        grid = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid: expected comma-separated integers, got {text!r}") from None
    return grid


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptfree", description="Partial transposes of Haar unitaries: exact and Monte Carlo moments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("wg", parents=[common], help="Weingarten table")
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--N", type=_positive, required=True)
    s.set_defaults(func=cmd_wg)

    s = sub.add_parser("exact", parents=[common], help="exact E tr of a word")
    s.add_argument("--word", required=True)
    s.add_argument("--N", type=_positive, required=True)
    s.add_argument("--route", choices=("direct", "pairing", "both"), default="both")
    s.add_argument("--budget", type=_positive, default=10**9)
    s.set_defaults(func=cmd_exact)

    s = sub.add_parser("mc", parents=[common], help="Monte Carlo E tr of a word")
    s.add_argument("--word", required=True)
    s.add_argument("--N", type=_positive, required=True)
    s.add_argument("--samples", type=_positive, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=_positive, default=1)
    s.add_argument("--expect", type=complex, default=None, help="reference value for a pass/fail check")
    s.add_argument("--band", type=float, default=4.0, help="pass band in standard errors")
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("predict", parents=[common], help="limit moment of a pattern")
    s.add_argument("--pattern", required=True)
    s.add_argument("--b", type=_positive, default=1)
    s.add_argument("--model", choices=sorted(MODELS), default="transpose")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("freeness", parents=[common], help="freeness verdicts for transpose specs")
    s.add_argument("--spec1", required=True)
    s.add_argument("--spec2", required=True)
    s.add_argument("--spec", action="append", help="further family members")
    s.add_argument("--grid", default="8,16,32,64")
    s.set_defaults(func=cmd_freeness)

    s = sub.add_parser("reproduce", parents=[common], help="canned experiments")
    s.add_argument("name", choices=sorted(EXPERIMENTS))
    s.add_argument("--b", type=_positive)
    s.add_argument("--d", type=_positive)
    s.add_argument("--samples", type=_positive)
    s.add_argument("--seed", type=int)
    s.add_argument("--band", type=float)
    s.add_argument("--grid")
    s.add_argument("--threads", type=_positive)
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        out, code = args.func(args)
    except CapacityError as e:
        print(f"ptfree: capacity limit: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except (PtfreeError, argparse.ArgumentTypeError) as e:
        print(f"ptfree {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    text = out.render(args.format)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
