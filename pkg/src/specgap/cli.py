"""Command line driver: emits curve samples, Monte Carlo reports, spectra and convergence tables.

Every output starts with a header record (tool version, config echo, seed)
and contains no timestamps, so identical configurations give identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import __version__
from .errors import AssemblyError, DegenerateError, ParameterError, ReportError, SolverError
from .fem import PROBLEMS, get_problem
from .geometry import RegionParams, SpectrumModel, curve_samples
from .lab import enclosure_trial
from .linalg import herm_gen_eigvals
from .method import Thresholds, convergence_study, run_method

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_VIOLATIONS = 0, 1, 2, 3

SUBCOMMANDS = ("curves", "random-check", "solve", "perturb", "converge")

DEFAULTS = {
    "problem": "block",
    "h": None,  # problem default
    "refine": None,  # problem default (converge: 7 for h >= 1/8, else 5)
    "gap": None,  # problem default
    "trials": 1000,
    "seed": 0,
    "format": "csv",
    "out": None,  # stdout
    "region": "0,1,-1,1",
    "samples": 101,
    "spec_a": "-1,0,2",
    "spec_b": "-1,0,1",
    "target": None,  # problem's first reference eigenvalue outside the gap list
    "hs": "1/2,1/4,1/8",
    "lifted_imag": 0.5,
    "near_real_imag": 0.1,
    "gamma_tol_frac": 0.05,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_number(text) -> float:
    """A float, also accepting fractions such as 1/64."""
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def parse_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [parse_number(x) for x in text]
    return [parse_number(x) for x in str(text).split(",") if x.strip()]


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    problem: str
    h: Optional[float]
    refine: Optional[int]
    gap: Optional[tuple]
    thresholds: Thresholds
    trials: int
    seed: int
    out: Optional[str]
    format: str
    region: tuple
    samples: int
    spec_a: tuple
    spec_b: tuple
    target: Optional[float]
    hs: tuple

    def echo(self) -> dict:
        d = asdict(self)
        d["thresholds"] = asdict(self.thresholds)
        for key in ("gap", "region", "spec_a", "spec_b", "hs"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d


def build_config(sub: str, values: dict) -> RunConfig:
    v = dict(DEFAULTS)
    v.update(values)
    if v["format"] not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    if v["problem"] not in PROBLEMS:
        raise UsageError(f"unknown problem {v['problem']!r}; choose from {sorted(PROBLEMS)}")
    gap = None if v["gap"] is None else tuple(parse_list(v["gap"]))
    if gap is not None and len(gap) != 2:
        raise UsageError("--gap takes two numbers a,b")
    region = tuple(parse_list(v["region"]))
    if len(region) != 4:
        raise UsageError("--region takes four numbers alpha,beta,gamma,delta")
    try:
        refine = None if v["refine"] is None else int(v["refine"])
        trials, seed, samples = int(v["trials"]), int(v["seed"]), int(v["samples"])
    except (TypeError, ValueError):
        raise UsageError("--refine, --trials, --seed and --samples take integers") from None
    if refine is not None and refine < 0:
        raise UsageError("--refine must be non-negative")
    if trials < 0 or seed < 0 or samples < 2:
        raise UsageError("--trials and --seed must be non-negative and --samples at least 2")
    try:
        thresholds = Thresholds(parse_number(v["lifted_imag"]), parse_number(v["near_real_imag"]),
                                parse_number(v["gamma_tol_frac"]))
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(
        subcommand=sub, problem=v["problem"],
        h=None if v["h"] is None else parse_number(v["h"]),
        refine=refine, gap=gap, thresholds=thresholds, trials=trials, seed=seed,
        out=v["out"], format=v["format"], region=region, samples=samples,
        spec_a=tuple(parse_list(v["spec_a"])), spec_b=tuple(parse_list(v["spec_b"])),
        target=None if v["target"] is None else parse_number(v["target"]),
        hs=tuple(parse_list(v["hs"])),
    )


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with any of the options below; flags win")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--seed", help="seed echoed in the header and used by random-check (default 0)")

    def problem_flags(p, with_refine=True):
        p.add_argument("--problem", help=f"one of {', '.join(sorted(PROBLEMS))} (default block)")
        p.add_argument("--h", help="coarse mesh size, fractions allowed (default: problem default)")
        if with_refine:
            p.add_argument("--refine", help="fine mesh is h / 2^refine (default: problem default)")

    parser = _Parser(prog="specgap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"specgap {__version__}")
    subs = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    p = subs.add_parser("curves", parents=[common], argument_default=argparse.SUPPRESS,
                        help="sample the curves f and g")
    p.add_argument("--region", help="alpha,beta,gamma,delta (default 0,1,-1,1)")
    p.add_argument("--samples", help="number of t values (default 101)")

    p = subs.add_parser("random-check", parents=[common], argument_default=argparse.SUPPRESS,
                        help="Monte Carlo enclosure check for sigma(A + iB)")
    p.add_argument("--spec-a", dest="spec_a", help="spectrum of A (default -1,0,2)")
    p.add_argument("--spec-b", dest="spec_b", help="spectrum of B (default -1,0,1)")
    p.add_argument("--trials", help="number of random (A, B) pairs (default 1000)")

    p = subs.add_parser("solve", parents=[common], argument_default=argparse.SUPPRESS,
                        help="plain Galerkin eigenvalues")
    problem_flags(p, with_refine=False)

    p = subs.add_parser("perturb", parents=[common], argument_default=argparse.SUPPRESS,
                        help="classified eigenvalues of the perturbed pencil")
    problem_flags(p)
    p.add_argument("--gap", help="a,b (default: problem gap)")
    p.add_argument("--lifted-imag", dest="lifted_imag", help="lifted-candidate threshold (default 0.5)")
    p.add_argument("--near-real-imag", dest="near_real_imag", help="near-real threshold (default 0.1)")
    p.add_argument("--gamma-tol-frac", dest="gamma_tol_frac",
                   help="near-Gamma tolerance as a fraction of b - a (default 0.05)")

    p = subs.add_parser("converge", parents=[common], argument_default=argparse.SUPPRESS,
                        help="Galerkin versus perturbed distances over a list of mesh sizes")
    p.add_argument("--problem", help=f"one of {', '.join(sorted(PROBLEMS))} (default block)")
    p.add_argument("--target", help="eigenvalue to approximate (default: problem reference)")
    p.add_argument("--hs", help="comma separated mesh sizes (default 1/2,1/4,1/8)")
    p.add_argument("--refine", help="refinement for every row (default 7 for h >= 1/8, else 5)")
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    unknown = set(k.replace("-", "_") for k in data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return {k.replace("-", "_"): val for k, val in data.items()}


# ---------------------------------------------------------------------------
# output

def _plain(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _fmt(x) -> str:
    x = _plain(x)
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    return str(x)


@dataclass
class Table:
    columns: list
    rows: list
    footer: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)  # JSON-only nested data


def render(cfg: RunConfig, table: Table) -> str:
    header = {"tool": "specgap", "version": __version__, "seed": cfg.seed, "config": cfg.echo()}
    if cfg.format == "json":
        doc = {"header": header,
               "columns": table.columns,
               "rows": [dict(zip(table.columns, _plain(r))) for r in table.rows],
               "footer": _plain(table.footer)}
        doc.update(_plain(table.extra))
        return json.dumps(_plain(doc), indent=1, sort_keys=False, allow_nan=True) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(_plain(header), sort_keys=False) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(x) for x in row])
    if table.footer:
        buf.write("# footer " + json.dumps(_plain(table.footer)) + "\n")
    return buf.getvalue()


def write_output(cfg: RunConfig, text: str):
    if cfg.out is None:
        sys.stdout.write(text)
        return
    try:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write {cfg.out}: {exc.strerror}") from exc


# ---------------------------------------------------------------------------
# subcommands

def cmd_curves(cfg: RunConfig):
    p = RegionParams(*cfg.region)
    t, f, g = curve_samples(p, cfg.samples)
    rows = [(ti, fi.real, fi.imag, gi.real, gi.imag) for ti, fi, gi in zip(t, f, g)]
    return Table(["t", "f_re", "f_im", "g_re", "g_im"], rows,
                 {"tall": p.tall}), EXIT_OK


def cmd_random_check(cfg: RunConfig):
    spec_a = SpectrumModel.from_values(cfg.spec_a)
    spec_b = SpectrumModel.from_values(cfg.spec_b)
    rep = enclosure_trial(spec_a, spec_b, cfg.trials, cfg.seed)
    rows = [(r.trial, r.z.real, r.z.imag, r.in_x, r.in_y, r.in_rect, r.margin) for r in rep.records]
    footer = {"trials": rep.trials, "violations": rep.violations, "worst_margin": rep.worst_margin}
    code = EXIT_VIOLATIONS if rep.violations else EXIT_OK
    return Table(["trial", "re", "im", "in_x", "in_y", "in_rect", "margin"], rows, footer), code


def cmd_solve(cfg: RunConfig):
    problem = get_problem(cfg.problem)
    h = problem.default_h if cfg.h is None else cfg.h
    pencil = problem.assemble(problem.space(h))
    w = herm_gen_eigvals(pencil.s, pencil.m)
    rows = [(i, x) for i, x in enumerate(w)]
    return Table(["index", "eigenvalue"], rows, {"problem": problem.name, "h": h, "dim": w.size}), EXIT_OK


def cmd_perturb(cfg: RunConfig):
    problem = get_problem(cfg.problem)
    rep = run_method(problem, cfg.h, cfg.refine, cfg.gap, cfg.thresholds)
    cols = ["re", "im", "class", "gamma_dist", "tau_re", "tau_im",
            "enc_lo", "enc_hi", "ref_lo", "ref_hi"]
    rows = []
    for e in rep.eigenvalues:
        enc = e.enclosure or (None, None)
        ref = e.refined_enclosure or (None, None)
        rows.append((e.z.real, e.z.imag, e.cls, e.gamma_dist, e.tau.real, e.tau.imag, *enc, *ref))
    footer = {"problem": rep.problem, "h_n": rep.h_n, "refinement": rep.refinement,
              "gap": list(rep.gap), "coarse_dim": rep.coarse_dim, "fine_dim": rep.fine_dim,
              "lifted_in_gap": len(rep.lifted_in_gap())}
    return Table(cols, rows, footer, {"galerkin": list(rep.galerkin)}), EXIT_OK


def _default_target(problem) -> float:
    if problem.name == "block":
        return problem.reference_eigenvalues[-1]
    if problem.reference_eigenvalues:
        return problem.reference_eigenvalues[0]
    raise UsageError(f"problem {problem.name!r} has no reference eigenvalue; pass --target")


def cmd_converge(cfg: RunConfig):
    problem = get_problem(cfg.problem)
    target = _default_target(problem) if cfg.target is None else cfg.target
    rec = convergence_study(problem, target, list(cfg.hs), cfg.refine)
    rows = [(r.h, r.refinement, r.fine_dim, r.galerkin_dist, r.perturbed_dist) for r in rec.rows]
    footer = {"target": rec.target, "galerkin_slope": rec.galerkin_slope,
              "perturbed_slope": rec.perturbed_slope, "galerkin_used": list(rec.galerkin_used),
              "perturbed_used": list(rec.perturbed_used), "epsilon_defs": rec.epsilon_defs}
    return Table(["h", "refinement", "fine_dim", "galerkin_dist", "perturbed_dist"], rows, footer), EXIT_OK


COMMANDS = {
    "curves": cmd_curves,
    "random-check": cmd_random_check,
    "solve": cmd_solve,
    "perturb": cmd_perturb,
    "converge": cmd_converge,
}


_NEGATIVE = re.compile(r"^-[\d.]")


def _glue_negative_values(argv):
    """Turn ``--flag -1,0,2`` into ``--flag=-1,0,2`` so argparse keeps the value."""
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    parser = make_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns = parser.parse_args(_glue_negative_values(argv))
        if ns.subcommand is None:
            raise UsageError("a subcommand is required: " + ", ".join(SUBCOMMANDS))
        values = vars(ns)
        sub = values.pop("subcommand")
        merged = {}
        if "config" in values:
            merged.update(_load_config(values.pop("config")))
        merged.update(values)
        cfg = build_config(sub, merged)
        table, code = COMMANDS[sub](cfg)
        write_output(cfg, render(cfg, table))
        return code
    except UsageError as exc:
        print(f"specgap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"specgap: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ReportError as exc:
        print(f"specgap: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, AssemblyError, DegenerateError, np.linalg.LinAlgError) as exc:
        print(f"specgap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
