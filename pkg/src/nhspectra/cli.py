"""Command-line front end.

Every command prints one report, as JSON or as CSV (``#`` comment lines
echo the command, config and summary; then a header row and data rows).
Floats are written with 17 significant digits so identical runs give
identical bytes.  Exit status: 0 success, 1 computational error, 2 input
error.  ``NHSPECTRA_THREADS`` caps the worker pool used by ``sweep``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cf_matrix, cf_scalar, hermitize, spectral
from .errors import GridTooCoarse, InputError, InputNotFound, NHSpectraError
from .model import (
    BoseHubbard,
    NonBH5,
    UnconventionalBH,
    parse_model_spec,
    spec_to_dict,
)

COMMANDS = ("model", "spectrum", "singular-values", "green", "ep-scan", "fixed-point", "sweep")
SWEEPABLE = ("spectrum", "singular-values", "green")


class UsageError(InputError):
    code = "USAGE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class Report:
    command: str
    config: dict
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    status: str = "ok"
    error: dict = None


# -- formatting ---------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    raise TypeError(type(x))


def _json(obj):
    """JSON text with floats at 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    return _fmt(obj)


def _csv_cell(x):
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    text = _fmt(x)
    return "nan" if text == "null" else text


def render(report: Report, fmt: str) -> str:
    doc = {"command": report.command, "config": report.config, "status": report.status}
    if report.error is not None:
        doc["error"] = report.error
    else:
        doc["summary"] = report.summary
        doc["columns"] = report.columns
        doc["rows"] = report.rows
    if fmt == "json":
        return _json(doc) + "\n"
    buf = io.StringIO()
    buf.write(f"# command: {report.command}\n")
    buf.write(f"# config: {_json(report.config)}\n")
    buf.write(f"# status: {report.status}\n")
    if report.error is not None:
        buf.write(f"# error: {_json(report.error)}\n")
        return buf.getvalue()
    buf.write(f"# summary: {_json(report.summary)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_csv_cell(x) for x in row])
    return buf.getvalue()


# -- argument handling -------------------------------------------------------------

def _model_options(p):
    g = p.add_argument_group("model")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--ubh", type=int, metavar="PARTICLES",
                     help="non-Hermitian Bose-Hubbard dimer, epsilon = i*gamma")
    src.add_argument("--bh", type=int, metavar="PARTICLES", help="general Bose-Hubbard dimer")
    src.add_argument("--nonbh5", action="store_true", help="5x5 non-Bose-Hubbard model")
    src.add_argument("--file", metavar="PATH", help="JSON model file")
    g.add_argument("--gamma", type=float, help="non-Hermiticity parameter")
    g.add_argument("--epsilon", type=float, nargs="+", metavar=("RE", "IM"))
    g.add_argument("--v", type=float, nargs="+", metavar=("RE", "IM"))
    g.add_argument("--c", type=float, nargs="+", metavar=("RE", "IM"))


def _output_options(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", metavar="PATH", help="write the report here instead of stdout")


def _range_options(p, required):
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"), required=required)
    p.add_argument("--steps", type=int, required=required)


def _sv_options(p):
    p.add_argument("--method", choices=("mcf", "direct"), default="mcf")
    p.add_argument("--grid", type=int, help="scan points for the mcf method")
    p.add_argument("--tol", type=float, help="bisection tolerance for the mcf method")


def build_parser():
    parser = _Parser(prog="nhspectra", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("model", help="print the tridiagonal bands of a model")
    _model_options(p)
    _output_options(p)
    p.add_argument("--emit", action="store_true", help="print the model file document")

    p = sub.add_parser("spectrum", help="dense eigenvalues with CF residuals")
    _model_options(p)
    _output_options(p)

    p = sub.add_parser("singular-values", help="singular values")
    _model_options(p)
    _output_options(p)
    _sv_options(p)

    p = sub.add_parser("green", help="continued-fraction Green's function G(z) = [(H-z)^-1]_11")
    _model_options(p)
    _output_options(p)
    p.add_argument("--z", type=float, nargs=2, metavar=("RE", "IM"), required=True)

    p = sub.add_parser("ep-scan", help="scan gamma for exceptional points")
    _model_options(p)
    _output_options(p)
    _range_options(p, required=True)

    p = sub.add_parser("fixed-point", help="fixed points of the constant-coefficient tail map")
    _output_options(p)
    p.add_argument("--alpha", type=float, nargs="+", required=True, metavar=("RE", "IM"))
    p.add_argument("--beta", type=float, nargs="+", required=True, metavar=("RE", "IM"))
    p.add_argument("--energy", type=float, nargs="+", default=[0.0], metavar=("RE", "IM"))
    p.add_argument("--f0", type=float, nargs="+", default=[0.0], metavar=("RE", "IM"))
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-12)

    p = sub.add_parser("sweep", help="evaluate a quantity on a parameter grid")
    p.add_argument("quantity", choices=SWEEPABLE)
    _model_options(p)
    _output_options(p)
    _sv_options(p)
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"), help="gamma range")
    p.add_argument("--z-real", type=float, nargs=2, metavar=("LO", "HI"), help="Re z range")
    p.add_argument("--z-imag", type=float, default=0.0, help="fixed Im z")
    p.add_argument("--steps", type=int, required=True)
    return parser


def _cplx(values, name):
    if values is None:
        return None
    if len(values) > 2:
        raise UsageError(f"--{name} takes RE [IM]")
    return complex(values[0], values[1] if len(values) > 1 else 0.0)


def _model_from_args(args):
    gamma = args.gamma
    if args.file is not None:
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except FileNotFoundError as exc:
            raise InputNotFound(f"model file not found: {args.file}") from exc
        except OSError as exc:
            raise InputNotFound(f"cannot read model file {args.file}: {exc}") from exc
        spec = parse_model_spec(text)
        return spec.with_gamma(gamma) if gamma is not None else spec
    v = _cplx(args.v, "v")
    c = _cplx(args.c, "c")
    if args.ubh is not None:
        if v is not None and v.imag or c is not None and c.imag:
            raise UsageError("--ubh takes real --v and --c")
        return UnconventionalBH(args.ubh, gamma or 0.0,
                                1.0 if v is None else v.real, 0.0 if c is None else c.real)
    if args.bh is not None:
        eps = _cplx(args.epsilon, "epsilon")
        if eps is not None and gamma is not None:
            raise UsageError("give either --epsilon or --gamma for --bh")
        if eps is None:
            eps = 1j * (gamma or 0.0)
        return BoseHubbard(args.bh, eps, 1.0 if v is None else v, 0.0 if c is None else c)
    if args.nonbh5:
        return NonBH5(gamma or 0.0)
    raise UsageError("no model given: use --ubh, --bh, --nonbh5 or --file")


def _config(args):
    """Deterministic echo of the parsed arguments (output destination excluded)."""
    skip = {"output"}
    out = {}
    for key in sorted(vars(args)):
        if key in skip:
            continue
        val = getattr(args, key)
        if isinstance(val, list):
            val = [float(x) if isinstance(x, float) else x for x in val]
        out[key] = val
    return out


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


# -- commands -----------------------------------------------------------------------

def _cmd_model(args, report):
    spec = _model_from_args(args)
    if args.emit:
        report.summary = {"model": spec_to_dict(spec)}
        return
    H = spec.build()
    report.summary = {"dim": H.dim, "complex_symmetric": H.is_complex_symmetric(),
                      "model": spec_to_dict(spec)}
    report.columns = ["k", "diag_re", "diag_im", "upper_re", "upper_im", "lower_re", "lower_im"]
    for k in range(H.dim):
        up = H.upper[k] if k < H.dim - 1 else math.nan
        lo = H.lower[k - 1] if k > 0 else math.nan
        report.rows.append([k + 1, H.diag[k].real, H.diag[k].imag,
                            complex(up).real, complex(up).imag, complex(lo).real, complex(lo).imag])


def _cmd_spectrum(args, report):
    model = _model_from_args(args)
    spec = spectral.eigenvalues_dense(model)
    report.summary = {"dim": spec.eigenvalues.size, "all_real": spec.all_real}
    report.columns = ["n", "re", "im", "residual"]
    report.rows = [[i + 1, e.real, e.imag, r]
                   for i, (e, r) in enumerate(zip(spec.eigenvalues, spec.residuals))]


def _singular_values(H, args):
    """(values, multiple flags, method used, warning or None)"""
    if args.method == "direct":
        s = hermitize.singular_values_direct(H)
        return s, [False] * s.size, "direct", None
    try:
        s, info = cf_matrix.singular_values_mcf(H, grid=args.grid, tol=args.tol, return_info=True)
        return s, list(info.multiple), "mcf", None
    except GridTooCoarse as exc:
        s = hermitize.singular_values_direct(H)
        return s, [False] * s.size, "direct", f"{exc.code}: {exc.message}; fell back to direct"


def _cmd_singular_values(args, report):
    H = _model_from_args(args).build()
    s, multiple, method, warning = _singular_values(H, args)
    report.summary = {"dim": H.dim, "method": method}
    if warning:
        report.summary["warning"] = warning
    report.columns = ["n", "sigma", "multiple"]
    report.rows = [[i + 1, float(x), bool(m)] for i, (x, m) in enumerate(zip(s, multiple))]


def _cmd_green(args, report):
    H = _model_from_args(args).build()
    z = complex(*args.z)
    res = cf_scalar.cf_recurrence(H, z)
    report.summary = {"dim": H.dim, "convention": "G(z) = [(H - z)^-1]_11"}
    report.columns = ["z_re", "z_im", "G_re", "G_im"]
    report.rows = [[z.real, z.imag, res.value.real, res.value.imag]]


def _cmd_ep_scan(args, report):
    spec = _model_from_args(args)
    lo, hi = args.range
    ep = spectral.ep_scan(spec, lo, hi, args.steps)
    report.summary = {"found": ep.found, "count": len(ep.locations)}
    if not ep.found:
        report.summary["note"] = "NO_EP_FOUND"
    report.columns = ["location", "order", "gap", "eigvec_condition", "reality_boundary"]
    report.rows = [[loc, order, gap, cond, rb] for loc, order, gap, cond, rb in
                   zip(ep.locations, ep.orders, ep.gaps, ep.conditions, ep.reality_boundaries)]


def _cmd_fixed_point(args, report):
    alpha, beta = _cplx(args.alpha, "alpha"), _cplx(args.beta, "beta")
    energy, f0 = _cplx(args.energy, "energy"), _cplx(args.f0, "f0")
    fp = cf_scalar.fixed_point_analysis(alpha, beta, energy)
    lim = cf_scalar.cf_tail_limit(alpha, beta, energy, f0, args.max_iter, args.tol)
    report.summary = {"stable": fp.stable, "limit": _pair(lim.value),
                      "converged": lim.converged, "iterations": lim.iterations}
    report.columns = ["root", "re", "im", "derivative"]
    report.rows = [["plus", fp.f_plus.real, fp.f_plus.imag, fp.deriv_plus],
                   ["minus", fp.f_minus.real, fp.f_minus.imag, fp.deriv_minus]]


def _workers():
    try:
        n = int(os.environ.get("NHSPECTRA_THREADS", ""))
    except ValueError:
        n = 0
    return n if n >= 1 else min(4, os.cpu_count() or 1)


def _grid(lo, hi, steps):
    if steps < 1:
        raise UsageError("--steps must be at least 1")
    if not lo < hi:
        raise UsageError("range needs LO < HI")
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])


def _row_error(exc):
    if isinstance(exc, NHSpectraError):
        return exc.code
    return "ERROR"


def _cmd_sweep(args, report):
    spec = _model_from_args(args)
    if args.quantity == "green":
        if args.z_real is None:
            raise UsageError("sweep green needs --z-real LO HI")
        H = spec.build()
        points = _grid(*args.z_real, args.steps)

        def evaluate(x):
            z = complex(x, args.z_imag)
            res = cf_scalar.cf_recurrence(H, z)
            return [z.real, z.imag, res.value.real, res.value.imag]

        columns = ["z_re", "z_im", "status", "G_re", "G_im"]
        width = 2
        lead = lambda x: [float(x), float(args.z_imag)]  # noqa: E731
    else:
        if args.range is None:
            raise UsageError(f"sweep {args.quantity} needs --range LO HI")
        points = _grid(*args.range, args.steps)
        dim = spec.with_gamma(points[0]).build().dim
        if args.quantity == "spectrum":
            columns = ["gamma", "status"] + [f"E{i}_{part}" for i in range(1, dim + 1)
                                             for part in ("re", "im")]
            width = 2 * dim

            def evaluate(g):
                eig = spectral.eigenvalues_dense(spec.with_gamma(g)).eigenvalues
                return [float(g)] + [x for e in eig for x in (e.real, e.imag)]
        else:
            columns = ["gamma", "status"] + [f"sigma{i}" for i in range(1, dim + 1)]
            width = dim

            def evaluate(g):
                s, _, _, _ = _singular_values(spec.with_gamma(g).build(), args)
                return [float(g)] + [float(x) for x in s]
        lead = lambda x: [float(x)]  # noqa: E731

    def safe(x):
        try:
            vals = evaluate(x)
        except NHSpectraError as exc:
            return lead(x) + [_row_error(exc)] + [math.nan] * width
        k = len(lead(x))
        return vals[:k] + ["ok"] + vals[k:]

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        rows = list(pool.map(safe, points))
    report.columns = columns
    report.rows = rows
    report.summary = {"quantity": args.quantity, "rows": len(rows),
                      "failed": sum(1 for r in rows if "ok" not in r)}


_DISPATCH = {
    "model": _cmd_model,
    "spectrum": _cmd_spectrum,
    "singular-values": _cmd_singular_values,
    "green": _cmd_green,
    "ep-scan": _cmd_ep_scan,
    "fixed-point": _cmd_fixed_point,
    "sweep": _cmd_sweep,
}


def run(argv):
    """Parse ``argv`` and execute; returns ``(exit_status, report_text, fmt)``."""
    fmt = "csv" if "csv" in argv and "--format" in argv else "json"
    command = next((a for a in argv if a in COMMANDS), "")
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        report = Report(command, {}, status="error", error={"code": exc.code, "message": exc.message})
        return exc.exit_status, render(report, fmt), fmt
    fmt = args.format
    report = Report(args.command, _config(args))
    try:
        _DISPATCH[args.command](args, report)
        if args.command == "model" and args.emit:
            return 0, _json(report.summary["model"]) + "\n", fmt
        status = 0
    except NHSpectraError as exc:
        report.status = "error"
        report.error = {"code": exc.code, "message": exc.message}
        status = exc.exit_status
    except ValueError as exc:
        report.status = "error"
        report.error = {"code": "INVALID_ARGUMENT", "message": str(exc)}
        status = 2
    return status, render(report, fmt), fmt


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    status, text, _ = run(argv)
    out = None
    if "--output" in argv:
        idx = argv.index("--output")
        if idx + 1 < len(argv):
            out = argv[idx + 1]
    if out and status != 2:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status:
        sys.stderr.write(f"nhspectra: exit {status}\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
