"""Command-line front end: ``design``, ``analyze``, ``estimate``, ``simulate``.

Frequencies on the command line are in cycles/sample. Relative ``--out``
paths are resolved against ``$IFREQ_OUTPUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path


from .analysis import characterize
from .errors import ValidationError
from .estimators import Domain, EstimatorConfig, Unwrap, estimate
from .harness import builtin_scenario, emit_report, load_scenario_file, run, standard_filters
from .lti import impulse_response
from .signals import read_waveform_csv
from .weights import (
    CicParams,
    FilterDesign,
    design_butterworth,
    design_cic,
    design_differentiator,
    design_erlang,
    design_kay,
    design_lsq,
    design_rect,
    solve_erlang_p,
)

OUTPUT_DIR_ENV = "IFREQ_OUTPUT_DIR"
FILTER_CHOICES = ("rec", "kay", "cic", "erl", "lsq", "but", "diff")
DOMAIN_CHOICES = {"ang": Domain.ANG, "cpx": Domain.CPX, "mag": Domain.ANG_MAG_WGT}


def _add_filter_args(p: argparse.ArgumentParser, allow_all: bool = False):
    g = p.add_argument_group("filter")
    choices = FILTER_CHOICES + (("all",) if allow_all else ())
    g.add_argument("--filter", choices=choices)
    g.add_argument("--design-file", help="read a design written by 'design' instead of --filter")
    g.add_argument("--M", type=int, default=25, help="window length (rec, kay)")
    g.add_argument("--kcic", type=int, default=3, help="CIC stage count")
    g.add_argument("--mcic", type=int, default=9, help="CIC section length")
    g.add_argument("--kappa", type=int, default=2, help="Erlang shape (erl, lsq)")
    g.add_argument("--p", type=float, help="Erlang pole (erl, lsq)")
    g.add_argument("--wng-match-rect", type=int, default=None, metavar="M",
                   help="choose p so the Erlang WNG equals 1/M (default 25 when --p is absent)")
    g.add_argument("--kx", type=int, default=3, help="polynomial terms for lsq")
    g.add_argument("--delay", type=float, default=None, help="lsq evaluation delay (default: min WNG)")
    g.add_argument("--order", type=int, default=4, help="Butterworth order")
    g.add_argument("--fc", type=float, default=None,
                   help="Butterworth cutoff in cycles/sample (default 1/M)")


def build_design(args) -> FilterDesign:
    if getattr(args, "design_file", None):
        return read_design_csv(args.design_file)
    kind = args.filter
    if kind == "diff":
        return design_differentiator()
    if kind == "rec":
        return design_rect(args.M)
    if kind == "kay":
        return design_kay(args.M)
    if kind == "cic":
        return design_cic(CicParams(args.kcic, args.mcic))
    if kind in ("erl", "lsq"):
        if args.p is not None and args.wng_match_rect is not None:
            raise ValidationError("give either --p or --wng-match-rect, not both")
        p = args.p if args.p is not None else solve_erlang_p(args.kappa, 1.0 / (args.wng_match_rect or 25))
        if kind == "erl":
            return design_erlang(args.kappa, p)
        return design_lsq(args.kappa, p, args.kx, args.delay)
    if kind == "but":
        fc = args.fc if args.fc is not None else 1.0 / args.M
        return design_butterworth(args.order, 2 * math.pi * fc)
    raise ValidationError(f"unknown filter {kind!r}")


# ---------------------------------------------------------------------------
# design dump:  '# {json header}' then rows m,b,a,h
# ---------------------------------------------------------------------------


def design_csv(design: FilterDesign) -> str:
    h = impulse_response(design)
    buf = io.StringIO()
    buf.write("# " + design.to_json() + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "b", "a", "h"])
    n = max(design.b.size, design.a.size, h.size)
    for m in range(n):
        cell = lambda arr: f"{arr[m]:.17g}" if m < arr.size else ""  # noqa: E731
        w.writerow([m, cell(design.b), cell(design.a), cell(h)])
    return buf.getvalue()


def read_design_csv(path) -> FilterDesign:
    text = Path(path).read_text()
    first = text.splitlines()[0] if text else ""
    if not first.startswith("#"):
        raise ValidationError(f"{path}: missing design header line")
    try:
        return FilterDesign.from_json(first[1:].strip())
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ValidationError(f"{path}: bad design header: {exc}") from exc


ANALYZE_COLUMNS = ("kind", "grp_del", "wng_lpf", "wng_bpf", "mag_probe", "d2_dc_real")


def analyze_csv(designs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ANALYZE_COLUMNS)
    for d in designs:
        row = characterize(d).row()
        w.writerow([row["kind"]] + [f"{row[c]:.17g}" for c in ANALYZE_COLUMNS[1:]])
    return buf.getvalue()


def estimate_csv(est) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "omega_hat", "f_hat"])
    for n, om in zip(est.sample_index(), est.values):
        w.writerow([int(n), f"{om:.17g}", f"{om / (2 * math.pi):.17g}"])
    return buf.getvalue()


def _resolve_out(path: str | None) -> Path | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text: str, out: str | None) -> None:
    dest = _resolve_out(out)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)


def cmd_design(args) -> int:
    _emit(design_csv(build_design(args)), args.out)
    return 0


def cmd_analyze(args) -> int:
    if args.filter == "all" or (args.filter is None and not args.design_file):
        designs = list(standard_filters().values())
    else:
        designs = [build_design(args)]
    _emit(analyze_csv(designs), args.out)
    return 0


def cmd_estimate(args) -> int:
    x = read_waveform_csv(args.input)
    cfg = EstimatorConfig(DOMAIN_CHOICES[args.domain], build_design(args), Unwrap(args.unwrap))
    _emit(estimate_csv(estimate(x, cfg)), args.out)
    return 0


def cmd_simulate(args) -> int:
    spec = load_scenario_file(args.spec) if args.spec else builtin_scenario(args.run)
    if args.trials is not None:
        spec = spec.with_trials(args.trials)
    _emit(emit_report(run(spec, args.seed), args.format), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ifreq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="write filter coefficients and impulse response")
    _add_filter_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("analyze", help="group delay, white-noise gains, probe gain, dc curvature")
    _add_filter_args(p, allow_all=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("estimate", help="estimate frequency from an n,re,im CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--domain", choices=tuple(DOMAIN_CHOICES), default="ang")
    p.add_argument("--unwrap", choices=[u.value for u in Unwrap], default="none")
    _add_filter_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="Monte-Carlo scenario report")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--run", type=int, choices=range(1, 8), metavar="{1..7}")
    src.add_argument("--spec", help="key/value scenario file")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("design", "estimate") and args.filter is None and args.design_file is None:
        parser.error("--filter or --design-file is required")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"ifreq: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"ifreq: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
