"""Command line front end: ``ghp <command> [flags]``.

Commands write CSV (or JSON) to ``--out`` or standard output.  Library
errors are reported as a JSON record ``{"error", "module", "detail"}`` on
standard error with exit status 1; usage and I/O errors exit with 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from .errors import GHPError

__all__ = ["main", "build_parser"]

COMMANDS = ("roots", "predict", "compare", "boundary", "corners", "density")


def _fmt(x) -> str:
    return format(float(x) + 0.0, ".17g")  # no negative zero


def _size(text: str) -> tuple:
    try:
        m, n = text.split(":")
        return int(m), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected m:n, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ghp", description="Roots of generalized Hermite polynomials and their lattice prediction.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--nu", type=float)
    p.add_argument("--sigma", type=float, default=0.9)
    p.add_argument("--precision-bits", type=int, dest="precision_bits")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--size", type=_size, action="append", default=[], metavar="m:n")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed", type=int, default=0)
    return p


class UsageError(Exception):
    pass


def _need_mn(args):
    if args.m is None or args.n is None:
        raise UsageError(f"{args.command} needs --m and --n")
    if args.nu is not None:
        raise UsageError("give either --m/--n or --nu, not both")
    return args.m, args.n


def _need_nu(args):
    if args.nu is not None:
        if args.m is not None or args.n is not None:
            raise UsageError("give either --m/--n or --nu, not both")
        return args.nu
    if args.m is None or args.n is None:
        raise UsageError(f"{args.command} needs --nu or both --m and --n")
    return args.n / (2 * args.m + args.n)


def _table(header, rows, fmt):
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def cmd_roots(args) -> str:
    from .hermite import hermite_generalized
    from .roots import find_roots

    m, n = _need_mn(args)
    p = hermite_generalized(m, n)
    rs = find_roots(p, args.precision_bits)
    a = rs.as_complex()
    res = rs.residuals(p)
    alpha = a / np.sqrt(2 * m + n)
    order = sorted(range(len(a)), key=lambda i: (alpha[i].real, alpha[i].imag))
    rows = [(t, a[i].real, a[i].imag, alpha[i].real, alpha[i].imag, float(res[i])) for t, i in enumerate(order)]
    return _table(["index", "re_a", "im_a", "re_alpha", "im_alpha", "residual"], rows, args.format)


def cmd_predict(args) -> str:
    from .lattice import LatticeConfig, build_lattice

    m, n = _need_mn(args)
    lat = build_lattice(LatticeConfig(m, n, args.sigma))
    for key, why in sorted(lat.failures.items()):
        logging.getLogger("ghp.cli").warning("lattice point %s dropped: %s", key, why)
    rows = [(j, k, e.alpha.real, e.alpha.imag, e.beta.real, e.beta.imag, e.residual) for (j, k), e in lat.items()]
    return _table(["j", "k", "re_alpha", "im_alpha", "re_beta", "im_beta", "residual"], rows, args.format)


def _pairs_json(rep, m=None, n=None):
    out = []
    for j, k, ap, at, d in rep.pairs:
        row = {"j": j, "k": k, "re_pred": ap.real, "im_pred": ap.imag, "re_true": at.real, "im_true": at.imag, "distance": d}
        if m is not None:
            row = {"m": m, "n": n, **row}
        out.append(row)
    return out


def cmd_compare(args) -> str:
    from .compare import exact_scaled_roots, match_roots, scaling_report
    from .lattice import LatticeConfig, build_lattice

    fmt = args.format or "json"
    if args.size:
        if args.m is not None or args.n is not None:
            raise UsageError("use either --size (repeated) or --m/--n")
        sr = scaling_report(args.size, args.sigma)
        pairs = []
        for (m, n), rep in zip(args.size, sr.reports):
            pairs.extend(_pairs_json(rep, m, n))
        summary = {
            "sizes": [f"{m}:{n}" for m, n in args.size],
            "E": sr.E,
            "max_bulk_error": sr.max_errors,
            "mean_bulk_error": [r.mean_bulk_error for r in sr.reports],
            "per_size": [r.summary() for r in sr.reports],
            "exponent": sr.exponent,
        }
    else:
        m, n = _need_mn(args)
        rep = match_roots(build_lattice(LatticeConfig(m, n, args.sigma)), exact_scaled_roots(m, n, args.precision_bits))
        pairs = _pairs_json(rep)
        summary = rep.summary()
    if fmt == "csv":
        header = list(pairs[0].keys()) if pairs else ["j", "k", "re_pred", "im_pred", "re_true", "im_true", "distance"]
        return _table(header, [tuple(r.values()) for r in pairs], "csv")
    return json.dumps({"pairs": pairs, "summary": summary}, indent=1) + "\n"


def cmd_boundary(args) -> str:
    from .region import trace_boundary

    nu = _need_nu(args)
    curve = trace_boundary(nu, args.points)
    rows = []
    for e, pts in enumerate(curve.edges, start=1):
        seg = np.abs(np.diff(pts))
        s = np.concatenate([[0.0], np.cumsum(seg)])
        t = s / s[-1]
        rows.extend((e, t[i], pts[i].real, pts[i].imag) for i in range(len(pts)))
    return _table(["edge", "t", "re_alpha", "im_alpha"], rows, args.format)


def cmd_corners(args) -> str:
    from .region import corner_polynomial_roots

    nu = _need_nu(args)
    cs = corner_polynomial_roots(nu)
    rows = [(label, complex(z).real, complex(z).imag) for label, z in cs.labeled()]
    return _table(["label", "re", "im"], rows, args.format)


def cmd_density(args) -> str:
    from .region import density_grid

    nu = _need_nu(args)
    X, Y, phi, _ = density_grid(nu, args.grid)
    rows = [(X.flat[i], Y.flat[i], phi.flat[i]) for i in range(X.size)]
    return _table(["re_alpha", "im_alpha", "phi"], rows, args.format)


_DISPATCH = {
    "roots": cmd_roots,
    "predict": cmd_predict,
    "compare": cmd_compare,
    "boundary": cmd_boundary,
    "corners": cmd_corners,
    "density": cmd_density,
}


def _error(kind: str, module: str, detail: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "module": module, "detail": detail}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        return _error("UsageError", "cli", "invalid arguments", 2)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    np.random.seed(args.seed)
    if args.format is None and args.command != "compare":
        args.format = "csv"
    try:
        text = _DISPATCH[args.command](args)
    except GHPError as exc:
        rec = exc.as_record()
        return _error(rec["error"], rec["module"], rec["detail"], 1)
    except UsageError as exc:
        return _error("UsageError", "cli", str(exc), 2)
    except ValueError as exc:
        return _error("ValueError", "cli", str(exc), 2)
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        return _error("IOError", "cli", str(exc), 2)
    return 0
