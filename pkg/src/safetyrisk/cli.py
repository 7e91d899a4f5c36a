"""Command-line interface.

Subcommands: ``demo-data``, ``attributes``, ``reports``, ``simulate``,
``density``, ``ranges``, ``escalate``.  Files are the composition mechanism;
every CSV written carries ``#`` provenance lines (command, configuration,
input digests) so it can be regenerated.

Exit codes: 0 success, 1 validation or domain error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .datamodel import (
    AttributeCatalog,
    demo_catalog_path,
    format_catalog,
    format_report_matrix,
    generate_demo_matrix,
    parse_catalog,
    parse_catalog_text,
    parse_report_matrix,
)
from .density import KdeModel, Support, density_grid, format_histogram, histogram
from .errors import SafetyRiskError, ValidationError
from .quantiles import (
    EscalationQuery,
    EscalationReport,
    RiskRanges,
    build_ranges,
    classify,
    escalation_estimate,
    format_quantile_table,
    format_ranges,
    parse_ranges_text,
)
from .riskcore import (
    Basis,
    catalog_relative_risks,
    format_attribute_table,
    format_report_risks,
    report_risks,
)
from .simgen import GeneratorConfig, RiskPairSample, smoothed_bootstrap_biv, smoothed_bootstrap_uni

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2
BUNDLED = "bundled:table1_demo.csv"


class _Parser(argparse.ArgumentParser):
    # usage mistakes are validation errors, not I/O errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _provenance(args, inputs: dict[str, bytes]) -> list[str]:
    lines = [f"safetyrisk {__version__} {args.command}"]
    skip = {"func", "command", "config"}
    cfg = " ".join(f"{k}={v}" for k, v in sorted(vars(args).items()) if k not in skip)
    lines.append(f"config: {cfg}")
    for name, data in sorted(inputs.items()):
        lines.append(f"input {name} sha256={_digest(data)}")
    return lines


def _emit(text: str, out: str | None, provenance: list[str] | None = None) -> None:
    head = "".join(f"# {ln}\n" for ln in provenance or [])
    if out is None or out == "-":
        sys.stdout.write(head + text)
    else:
        Path(out).write_text(head + text, encoding="utf-8")


def _read_bytes(path: str) -> bytes:
    return Path(path).read_bytes()


def _load_catalog(path: str | None) -> tuple[AttributeCatalog, bytes]:
    if path is None or path == BUNDLED:
        data = demo_catalog_path().read_bytes()
    else:
        data = _read_bytes(path)
    return parse_catalog_text(data.decode("utf-8")), data


def _read_columns(path: str) -> dict[str, np.ndarray]:
    lines = [ln for ln in _read_bytes(path).decode("utf-8").splitlines()
             if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValidationError(f"{path}: no data")
    header = [h.strip() for h in lines[0].split(",")]
    try:
        rows = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric cell ({exc})") from None
    if rows.size == 0:
        raise ValidationError(f"{path}: no data rows")
    if rows.ndim != 2 or rows.shape[1] != len(header):
        raise ValidationError(f"{path}: ragged rows")
    return {h: rows[:, k] for k, h in enumerate(header)}


def _pick_column(cols: dict[str, np.ndarray], name: str | None, path: str) -> np.ndarray:
    if name is None:
        return next(iter(cols.values()))
    if name not in cols:
        raise ValidationError(f"{path}: no column {name!r} (have {', '.join(cols)})")
    return cols[name]


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _fmt_rows(header: list[str], columns) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def cmd_demo_data(args) -> int:
    catalog, raw = _load_catalog(args.catalog)
    matrix = generate_demo_matrix(catalog, args.n_reports, args.seed)
    prov = ["synthetic demo matrix; not observed injury reports"] + _provenance(args, {"catalog": raw})
    _emit(format_report_matrix(matrix), args.out, prov)
    if args.catalog_out:
        Path(args.catalog_out).write_text(format_catalog(catalog), encoding="utf-8")
    return EXIT_OK


def cmd_attributes(args) -> int:
    catalog, raw = _load_catalog(args.catalog)
    text = format_attribute_table(catalog, raw=args.raw, ranked=args.rank)
    _emit(text, args.out, _provenance(args, {"catalog": raw}))
    return EXIT_OK


def _report_samples(args):
    catalog, raw_cat = _load_catalog(args.catalog)
    raw_mat = _read_bytes(args.matrix)
    matrix = parse_report_matrix(args.matrix, catalog, strict=args.strict)
    real = report_risks(matrix, catalog_relative_risks(catalog, Basis.REAL))
    worst = report_risks(matrix, catalog_relative_risks(catalog, Basis.WORST))
    return real, worst, {"catalog": raw_cat, "matrix": raw_mat}, matrix


def cmd_reports(args) -> int:
    real, worst, inputs, matrix = _report_samples(args)
    prov = _provenance(args, inputs)
    if matrix.dropped:
        prov.append(f"dropped {matrix.dropped} reports with no attributes")
    _emit(format_report_risks(real, worst), args.out, prov)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = GeneratorConfig(n_sim=args.n_sim, seed=args.seed,
                          negatives=args.negatives, streams=args.streams)
    real, worst, inputs, _ = _report_samples(args)
    prov = _provenance(args, inputs)
    if args.mode == "uni":
        source = real if Basis(args.basis) is Basis.REAL else worst
        sims = smoothed_bootstrap_uni(source.values, cfg)
        _emit(_fmt_rows(["sim_value"], [sims]), args.out, prov)
    else:
        sims = smoothed_bootstrap_biv(RiskPairSample(real.values, worst.values), cfg)
        u, v = sims.pseudo_normal() if args.pseudo == "normal" else sims.pseudo_rank()
        _emit(_fmt_rows(["x_sim", "y_sim", "u", "v"], [sims.x, sims.y, u, v]), args.out, prov)
    return EXIT_OK


def cmd_density(args) -> int:
    raw = _read_bytes(args.values)
    values = _pick_column(_read_columns(args.values), args.column, args.values)
    support = Support(args.support) if args.corrected else Support.REAL_LINE
    model = KdeModel.fit(values, support)
    if args.corrected:
        model.transformed  # validates the support before any output is written
    grid = density_grid(model, args.lo, args.hi, args.n_points, corrected=args.corrected)
    prov = _provenance(args, {"values": raw})
    prov.append(f"bandwidth={model.bandwidth!r} trapezoid_integral={grid.integral()!r}")
    _emit(grid.to_csv(), args.out, prov)
    if args.histogram_out:
        _emit(format_histogram(histogram(values, args.bins)), args.histogram_out,
              _provenance(args, {"values": raw}))
    return EXIT_OK


def cmd_ranges(args) -> int:
    raw = _read_bytes(args.values)
    values = _pick_column(_read_columns(args.values), args.column, args.values)
    ranges = build_ranges(values, args.basis)
    prov = _provenance(args, {"values": raw})
    _emit(format_ranges(ranges), args.out, prov)
    if args.quantiles:
        _emit(format_quantile_table(values, args.quantiles), args.quantiles_out, prov)
    return EXIT_OK


def _escalation_ranges(args, pairs: RiskPairSample, inputs: dict) -> tuple[RiskRanges, RiskRanges]:
    if args.real_ranges or args.worst_ranges:
        if not (args.real_ranges and args.worst_ranges):
            raise ValidationError("--real-ranges and --worst-ranges go together")
        out = []
        for key, path, basis in (("real_ranges", args.real_ranges, Basis.REAL),
                                 ("worst_ranges", args.worst_ranges, Basis.WORST)):
            data = _read_bytes(path)
            inputs[key] = data
            out.append(parse_ranges_text(data.decode("utf-8"), basis))
        return out[0], out[1]
    if args.ranges == "published":
        return RiskRanges.published(Basis.REAL), RiskRanges.published(Basis.WORST)
    return build_ranges(pairs.x, Basis.REAL), build_ranges(pairs.y, Basis.WORST)


def cmd_escalate(args) -> int:
    names = [n.strip() for n in args.attributes.split(",") if n.strip()]
    if not names:
        raise ValidationError("no attributes given")
    catalog, raw_cat = _load_catalog(args.catalog)
    unknown = [n for n in names if n not in set(catalog.names)]
    if unknown:
        raise ValidationError(f"unknown attribute(s): {', '.join(unknown)}")
    if len(set(names)) != len(names):
        raise ValidationError("attribute listed more than once")
    raw_pairs = _read_bytes(args.sim_pairs)
    cols = _read_columns(args.sim_pairs)
    if "x_sim" not in cols or "y_sim" not in cols:
        raise ValidationError(f"{args.sim_pairs}: expected x_sim and y_sim columns")
    pairs = RiskPairSample(cols["x_sim"], cols["y_sim"])
    inputs = {"catalog": raw_cat, "sim_pairs": raw_pairs}
    real_ranges, worst_ranges = _escalation_ranges(args, pairs, inputs)

    rr = catalog_relative_risks(catalog, Basis.REAL)
    parts = tuple(rr[n] for n in names)
    x0 = float(sum(parts))
    query = EscalationQuery(x0, args.window_lo, args.window_hi, args.threshold)
    result = escalation_estimate(pairs, query, worst_ranges, args.min_support)
    report = EscalationReport(tuple(names), parts, x0, classify(x0, real_ranges), query, result)
    prov = _provenance(args, inputs)
    if args.format == "json":
        payload = report.to_dict()
        payload["provenance"] = prov
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        _emit(report.to_text(), args.out, prov)
    return EXIT_OK


def _add_common(p, *, catalog=True, matrix=False, out=True):
    if catalog:
        p.add_argument("--catalog", default=BUNDLED,
                       help="attribute catalog CSV (default: bundled demo catalog)")
    if matrix:
        p.add_argument("--matrix", required=True, help="0/1 report matrix CSV")
        p.add_argument("--strict", action=argparse.BooleanOptionalAction, default=True,
                       help="reject (default) or drop reports with no attributes")
    if out:
        p.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="safetyrisk", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"safetyrisk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", default=None, help="key=value file; flags override it")
        p.set_defaults(func=func)
        return p

    p = add("demo-data", cmd_demo_data, "write a synthetic report matrix")
    _add_common(p)
    p.add_argument("--n-reports", type=int, default=814)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--catalog-out", default=None, help="also write the catalog used")

    p = add("attributes", cmd_attributes, "relative risks and escalation deltas per attribute")
    _add_common(p)
    p.add_argument("--raw", action="store_true", help="unrounded values")
    p.add_argument("--rank", action="store_true", help="sort by delta, largest first")

    p = add("reports", cmd_reports, "real and worst risk per report")
    _add_common(p, matrix=True)

    p = add("simulate", cmd_simulate, "smoothed-bootstrap synthetic risks")
    _add_common(p, matrix=True)
    p.add_argument("--mode", choices=("uni", "biv"), default="uni")
    p.add_argument("--basis", choices=[b.value for b in Basis], default="real",
                   help="risk basis for --mode uni")
    p.add_argument("--n-sim", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--streams", type=int, default=1)
    p.add_argument("--negatives", choices=("reject", "keep"), default="reject")
    p.add_argument("--pseudo", choices=("normal", "rank"), default="normal",
                   help="u,v columns: normal CDF of the values or rank/(n+1)")

    p = add("density", cmd_density, "KDE grid (and histogram) of a value column")
    _add_common(p, catalog=False)
    p.add_argument("--values", required=True)
    p.add_argument("--column", default=None, help="column name (default: first)")
    p.add_argument("--corrected", action="store_true", help="boundary-corrected estimate")
    p.add_argument("--support", choices=[s.value for s in Support if s is not Support.REAL_LINE],
                   default=Support.NONNEG_HALFLINE.value)
    p.add_argument("--lo", type=float, default=None)
    p.add_argument("--hi", type=float, default=None)
    p.add_argument("--n-points", type=int, default=512)
    p.add_argument("--histogram-out", default=None)
    p.add_argument("--bins", type=int, default=None)

    p = add("ranges", cmd_ranges, "risk ranges from a (simulated) sample")
    _add_common(p, catalog=False)
    p.add_argument("--values", required=True)
    p.add_argument("--column", default=None)
    p.add_argument("--basis", choices=[b.value for b in Basis], default="real")
    p.add_argument("--quantiles", type=_float_list, default=None,
                   help="extra quantile levels p1,p2,...")
    p.add_argument("--quantiles-out", default=None)

    p = add("escalate", cmd_escalate, "conditional-quantile escalation for observed attributes")
    _add_common(p)
    p.add_argument("--sim-pairs", required=True, help="CSV with x_sim,y_sim columns")
    p.add_argument("--attributes", required=True, help="comma-separated attribute names")
    p.add_argument("--window-lo", type=float, default=5.0)
    p.add_argument("--window-hi", type=float, default=5.0)
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--min-support", type=int, default=30)
    p.add_argument("--ranges", choices=("simulated", "published"), default="simulated",
                   help="range breakpoints: from the simulated pairs or the published tables")
    p.add_argument("--real-ranges", default=None, help="ranges CSV for real outcomes")
    p.add_argument("--worst-ranges", default=None, help="ranges CSV for worst outcomes")
    p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _config_argv(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Splice ``--config`` key=value pairs in front of the explicit flags."""
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return argv
    pre, _ = parser.parse_known_args(argv)
    if not getattr(pre, "config", None) or not argv:
        return argv
    sub = parser._subparsers._group_actions[0].choices[pre.command]  # noqa: SLF001
    flags = {}
    for action in sub._actions:  # noqa: SLF001
        for opt in action.option_strings:
            flags[opt] = action
    extra = []
    for n, line in enumerate(Path(pre.config).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{pre.config}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        opt = "--" + key.replace("_", "-")
        action = flags.get(opt)
        if action is None or opt == "--config":
            raise ValidationError(f"{pre.config}:{n}: unknown key {key!r}")
        truthy = value.lower() in ("1", "true", "yes", "on")
        if isinstance(action, argparse.BooleanOptionalAction):
            extra.append(opt if truthy else "--no-" + opt[2:])
        elif action.nargs == 0:
            if truthy:
                extra.append(opt)
        else:
            extra.extend([opt, value])
    k = argv.index(pre.command) + 1
    return argv[:k] + extra + argv[k:]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _config_argv(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SafetyRiskError as exc:
        print(f"safetyrisk: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"safetyrisk: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
