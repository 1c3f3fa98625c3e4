"""Command line front end: ``formsens analyze|sweep|validate``.

Exit status is 0 on success, 2 for invalid input and 3 when a numerical
procedure fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .analysis import analyze, sweep
from .config import load, with_overrides
from .errors import ConfigError, FormsensError, NumericalError, ValidationError
from .limit_state import evaluate_in_u, finite_difference_gradient

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
GRADIENT_WARN = 1e-3


def _fmt(x) -> str:
    # repr keeps every digit so CSV fields parse back to the JSON values
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else "nan"
    return str(x)


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def report_rows(report: dict):
    """Flatten a report to ``(section, name, value, std_error)`` rows."""
    rows = []
    probs = report["probabilities"]
    for key in ("system", "series", "parallel"):
        rows.append(("probability", key, probs[key]["value"], probs[key]["std_error"]))
    for name, e in probs["components"].items():
        rows.append(("probability", name, e["value"], e["std_error"]))
    sens = report["sensitivity"]
    for kind in ("first_order", "total_effect"):
        for name, e in sens[kind].items():
            rows.append((kind, name, e["value"], e["std_error"]))
    for kind in ("closed", "variance_components"):
        for e in sens[kind]:
            rows.append((kind, " ".join(e["subset"]), e["value"], e["std_error"]))
    if "mc" in report:
        mc = report["mc"]
        rows.append(("mc_probability", "system", mc["p_f"]["value"], mc["p_f"]["std_error"]))
        for kind in ("first_order", "total_effect"):
            for name, e in mc["pick_freeze"][kind].items():
                rows.append((f"mc_{kind}", name, e["value"], e["std_error"]))
    return rows


def format_table(report: dict) -> str:
    cfg = report["config"]
    lines = [f"problem: {cfg['name']}  (system mode: {cfg['system']['mode']}, "
             f"evaluated as {report['sensitivity']['mode']})", ""]
    lines.append("design points")
    for dp in report["design_points"]:
        u = ", ".join(f"{v:.4f}" for v in dp["u_star"])
        lines.append(f"  {dp['component']:<8} beta = {dp['beta']:.4f}  u* = ({u})")
    lines.append("")
    lines.append("FORM probabilities          value        std.err")
    probs = report["probabilities"]
    for key in ("system", "series", "parallel"):
        lines.append(f"  {key:<24}{probs[key]['value']:.4e}   {probs[key]['std_error']:.1e}")
    lines.append("")
    sens = report["sensitivity"]
    mc = report.get("mc")
    head = f"  {'variable':<10}{'S':>11}{'+-':>9}{'S_T':>11}{'+-':>9}"
    if mc:
        head += f"{'S (MC)':>11}{'S_T (MC)':>11}"
    lines.append("sensitivity indices")
    lines.append(head)
    for name in sens["first_order"]:
        s, t = sens["first_order"][name], sens["total_effect"][name]
        row = (f"  {name:<10}{s['value']:>11.4g}{s['std_error']:>9.1e}"
               f"{t['value']:>11.4g}{t['std_error']:>9.1e}")
        if mc:
            pf = mc["pick_freeze"]
            row += (f"{pf['first_order'][name]['value']:>11.4g}"
                    f"{pf['total_effect'][name]['value']:>11.4g}")
        lines.append(row)
    for kind, label in (("closed", "closed index"), ("variance_components", "variance component")):
        for e in sens[kind]:
            lines.append(f"  {label} {{{', '.join(e['subset'])}}}: "
                         f"{e['value']:.4g} +- {e['std_error']:.1e}")
    if mc:
        lines.append("")
        lines.append(f"Monte Carlo p_f = {mc['p_f']['value']:.4e} +- {mc['p_f']['std_error']:.1e}"
                     f"  ({mc['p_f']['n_samples']} samples)")
    return "\n".join(lines) + "\n"


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args):
    cfg = load(args.config)
    return with_overrides(cfg, seed=args.seed, mvn_samples=args.mvn_samples,
                          mc_samples=args.mc_samples, mc=args.mc, n_starts=args.n_starts,
                          joint_linearization=args.joint_linearization)


def cmd_analyze(args) -> int:
    report = analyze(_load(args))
    fmt = args.format or ("json" if args.out else "table")
    if fmt == "json":
        text = json.dumps(report, indent=2) + "\n"
    elif fmt == "csv":
        text = write_csv(("section", "name", "value", "std_error"), report_rows(report))
    else:
        text = format_table(report)
    _emit(text, args.out)
    if args.out:
        sys.stdout.write(format_table(report))
    return EXIT_OK


def parse_range(text: str):
    try:
        start, stop = (float(t) for t in text.split(":"))
    except ValueError:
        raise ConfigError(f"--range expects START:STOP, got {text!r}") from None
    return start, stop


def cmd_sweep(args) -> int:
    cfg = _load(args)
    start, stop = parse_range(args.range)
    header, rows = sweep(cfg, args.param, start, stop, args.steps)
    fmt = args.format or "csv"
    if fmt == "json":
        text = json.dumps({"schema_version": "1.0", "parameter": args.param,
                           "columns": header,
                           "rows": [[None if isinstance(v, float) and math.isnan(v) else v
                                     for v in r] for r in rows]}, indent=2) + "\n"
    elif fmt == "table":
        widths = [max(len(h), 11) for h in header]
        text = "  ".join(h.rjust(w) for h, w in zip(header, widths)) + "\n"
        for r in rows:
            text += "  ".join(f"{v:{w}.4g}" for v, w in zip(r, widths)) + "\n"
    else:
        text = write_csv(header, rows)
    _emit(text, args.out)
    return EXIT_OK


def _plural(k, word):
    return f"{k} {word}" if k == 1 else f"{k} {word}s"


def cmd_validate(args) -> int:
    cfg = load(args.config)
    rv = cfg.random_vector()
    lsfs = cfg.limit_state_functions()
    cfg.system()
    rng = np.random.default_rng(cfg.solver.seed if args.seed is None else args.seed)
    warnings = []
    for lsf in lsfs:
        for _ in range(5):
            u = rng.standard_normal(rv.n)
            try:
                _, grad = evaluate_in_u(lsf, u, rv)
                fd = finite_difference_gradient(lsf, u, rv)
            except NumericalError as exc:
                warnings.append(f"{lsf.name}: cannot check gradient at u={np.round(u, 3).tolist()}: "
                                f"{exc}")
                continue
            err = np.linalg.norm(grad - fd) / max(np.linalg.norm(grad), 1e-12)
            if err > GRADIENT_WARN:
                warnings.append(f"{lsf.name}: gradient mismatch {err:.2e} vs finite differences "
                                f"at u={np.round(u, 3).tolist()}")
    for w in warnings:
        print(f"warning: {w}")
    print(f"OK, {_plural(len(lsfs), 'limit state')}, {_plural(rv.n, 'variable')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formsens",
        description="FORM system reliability and variance-based reliability sensitivities.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="problem file (INI format)")
    common.add_argument("--seed", type=int, help="seed for solver starts, MVN and MC")
    common.add_argument("--mvn-samples", type=int, help="total multinormal QMC budget per call")
    common.add_argument("--mc-samples", type=int, help="Monte Carlo sample size")
    common.add_argument("--mc", action=argparse.BooleanOptionalAction, default=None,
                        help="run the Monte Carlo reference")
    common.add_argument("--n-starts", type=int, help="design point searches per limit state")
    common.add_argument("--joint-linearization", action="store_true", default=None,
                        help="linearise parallel terms at their joint design point")
    common.add_argument("--out", help="write the report to this file")
    common.add_argument("--format", choices=("json", "table", "csv"))

    p = sub.add_parser("analyze", parents=[common], help="run the full analysis")
    p.set_defaults(func=cmd_analyze)
    p = sub.add_parser("sweep", parents=[common], help="sweep one parameter, emit CSV")
    p.add_argument("--param", required=True, help="parameter declared in [parameters]")
    p.add_argument("--range", required=True, help="START:STOP (angles in degrees)")
    p.add_argument("--steps", type=int, required=True, help="number of grid points")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("validate", help="check a problem file without heavy computation")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FormsensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FloatingPointError, np.linalg.LinAlgError, OverflowError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
