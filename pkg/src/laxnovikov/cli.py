"""Command-line front end.

Exit codes: 0 success, 2 verification failure, 3 input error,
4 numerical failure (pole, collision, step underflow, no sign change).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from . import __version__
from .config import precision_bits
from .diffalg import ProfileSample
from .dubrovin import (DEGENERATE_TAGS, DegenerateCase, classify, find_real_zero,
                       integrate_on_grid, pencil_from_profile, pencil_roots_along)
from .errors import LaxNovikovError, NumericalFailure, PoleAt
from .hierarchy import (StationaryCoeffs, elementary_symmetric, gd_r_recur, gd_r_residue,
                        hierarchy_rhs, stationary_poly, stationary_residual)
from .psdo import DEFAULT_DEPTH
from .soliton import SolitonProfile, SolitonSpec

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4


class InputError(LaxNovikovError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would exit with 2, which is reserved for failed verification
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class Grid:
    lo: float
    hi: float
    n: int

    @classmethod
    def parse(cls, text: str) -> Grid:
        try:
            lo, hi, n = text.split(":")
            g = cls(float(lo), float(hi), int(n))
        except ValueError:
            raise InputError(f"grid must look like min:max:n, got {text!r}") from None
        if not g.lo < g.hi or g.n < 2:
            raise InputError("grid needs min < max and at least 2 samples")
        return g

    def points(self) -> list[float]:
        step = (self.hi - self.lo) / (self.n - 1)
        return [self.lo + i * step for i in range(self.n - 1)] + [self.hi]


# -- argument helpers ---------------------------------------------------------

def _numbers(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(Fraction(tok))
        except ValueError:
            try:
                c = complex(tok.replace("i", "j"))
            except ValueError:
                raise InputError(f"cannot read number {tok!r}") from None
            out.append(c.real if c.imag == 0 else c)
    return out


def _load_spec(args) -> SolitonSpec | None:
    if getattr(args, "spec", None):
        try:
            with open(args.spec) as fh:
                return SolitonSpec.from_json(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read spec {args.spec}: {exc}") from None
    if getattr(args, "alphas", None):
        alphas = [float(a) if isinstance(a, Fraction) else a for a in _numbers(args.alphas)]
        amps = [float(a) if isinstance(a, Fraction) else a for a in _numbers(args.amps or "")]
        times = {}
        if args.times:
            for item in args.times.split(","):
                key, _, val = item.partition("=")
                times[key.strip()] = float(val)
        return SolitonSpec(tuple(alphas), tuple(amps), times)
    return None


def _coeffs(args, spec: SolitonSpec | None) -> StationaryCoeffs | None:
    given = [name for name in ("s", "d") if getattr(args, name, None)]
    if getattr(args, "d3", None) is not None or getattr(args, "d5", None) is not None:
        given.append("d3/d5")
    if len(given) > 1:
        raise InputError(f"give only one of --s, --d, --d3/--d5 (got {', '.join(given)})")
    if getattr(args, "s", None):
        return StationaryCoeffs.from_s(_real(_numbers(args.s)))
    if getattr(args, "d", None):
        c = StationaryCoeffs.from_d(_real(_numbers(args.d)))
    elif "d3/d5" in given:
        if args.d3 is None or args.d5 is None:
            raise InputError("--d3 and --d5 go together")
        c = StationaryCoeffs({3: Fraction(args.d3), 5: Fraction(args.d5), 7: 1})
    elif spec is not None:
        return elementary_symmetric(spec.alphas)
    else:
        return None
    if c.coefficient(1):
        raise InputError("d1 must be 0: decaying solutions force it (see README)")
    return c


def _real(vals):
    if any(isinstance(v, complex) for v in vals):
        raise InputError("stationary coefficients must be real")
    return vals


def _bits(args) -> int:
    try:
        return precision_bits(getattr(args, "precision_bits", None))
    except ValueError as exc:
        raise InputError(str(exc)) from None


# -- output -------------------------------------------------------------------

def _emit(args, text: str, meta: dict):
    out = getattr(args, "out", None)
    if not out:
        sys.stdout.write(text)
        return
    _atomic_write(out, text)
    meta = dict(meta, argv=sys.argv[1:], version=__version__,
                written_at=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))
    _atomic_write(out + ".meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _table(args, header: list[str], rows: list[list]) -> str:
    if getattr(args, "format", "csv") == "json":
        return json.dumps({"columns": header, "rows": rows}, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- subcommands ----------------------------------------------------------------

def cmd_hierarchy(args) -> int:
    rows, ok = [], True
    for k in range(args.k_max + 1):
        rec = gd_r_recur(k)
        res = gd_r_residue(k, args.depth)
        same = rec == res
        ok = ok and same
        rows.append({"k": k, "R": f"R{2 * k + 1}", "prime": rec.to_prime(), "canonical": str(rec),
                     "flow": f"u_t{2 * k + 1}", "flow_rhs": hierarchy_rhs(k).to_prime(),
                     "recurrence_equals_residue": same})
    if args.format == "json":
        text = json.dumps({"depth": args.depth, "entries": rows, "all_equal": ok}, indent=2) + "\n"
    else:
        lines = [f"{r['R']} = {r['prime']}" for r in rows]
        lines += [f"{r['flow']} = {r['flow_rhs']}" for r in rows]
        lines.append(f"recurrence == residue: {'true' if ok else 'false'}")
        text = "\n".join(lines) + "\n"
    _emit(args, text, {"command": "hierarchy", "k_max": args.k_max, "depth": args.depth})
    return EXIT_OK if ok else EXIT_VERIFY


def _render(ctx, v) -> str:
    return mpmath.libmp.to_str(ctx.mpf(v)._mpf_, mpmath.libmp.repr_dps(ctx.prec))


def cmd_eval(args) -> int:
    spec = _load_spec(args)
    if spec is None:
        raise InputError("eval needs --spec or --alphas/--amps")
    bits = _bits(args)
    prof = SolitonProfile(spec, bits)
    grid = Grid.parse(args.grid)
    names = ["u"] + [f"u{k}" for k in range(1, args.derivs + 1)]
    header = ["x"] + (names if prof.real else [f"{p}_{n}" for n in names for p in ("re", "im")])
    rows, poles = [], 0
    for x in grid.points():
        try:
            vals = prof.derivs(x, args.derivs)
        except PoleAt:
            poles += 1
            rows.append([repr(x)] + ["nan"] * (len(header) - 1))
            continue
        if prof.real:
            cells = [_render(prof.ctx, v) for v in vals]
        else:
            cells = [_render(prof.ctx, part) for v in vals for part in (prof.ctx.re(v), prof.ctx.im(v))]
        rows.append([repr(x)] + cells)
    _emit(args, _table(args, header, rows),
          {"command": "eval", "spec": spec.to_json(), "precision_bits": bits, "poles": poles})
    if poles:
        print(f"{poles} grid point(s) hit poles of the profile", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = _load_spec(args)
    if spec is None:
        raise InputError("verify needs --spec or --alphas/--amps")
    coeffs = _coeffs(args, spec)
    bits = _bits(args)
    poly = stationary_poly(coeffs)
    prof = SolitonProfile(spec, bits)
    order = max(poly.order, 0)
    report = stationary_residual(poly, lambda x: prof.sample(x, order), Grid.parse(args.grid).points(),
                                 skip_poles=args.skip_poles)
    ok = report.max_rel <= args.tol
    body = dict(report.to_dict(), s=[str(v) for v in coeffs.s()], tol=args.tol, passed=ok)
    _emit(args, json.dumps(body, indent=2) + "\n",
          {"command": "verify", "spec": spec.to_json(), "precision_bits": bits})
    if report.poles:
        return EXIT_NUMERIC
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_classify(args) -> int:
    if args.d1 not in (None, 0.0):
        raise InputError("the classifier requires d1 = 0")
    result = classify(Fraction(args.d3), Fraction(args.d5))
    if args.format == "json":
        text = json.dumps(result.to_dict(), indent=2) + "\n"
    else:
        fams = result.families
        lines = [f"roots: C1={result.to_dict()['C1']} C2={result.to_dict()['C2']} ({result.tag})"]
        lines += [f"family: {f.describe()}" for f in fams] or ["family: none"]
        lines.append(f"certificate: {result.certificate or 'none'}")
        lines.append(f"note: {result.note}")
        text = "\n".join(lines) + "\n"
    _emit(args, text, {"command": "classify"})
    return EXIT_OK


def cmd_dubrovin(args) -> int:
    spec = _load_spec(args)
    coeffs = _coeffs(args, spec)
    if coeffs is None:
        raise InputError("dubrovin needs --spec or --d3/--d5")
    if coeffs.N != 2 or coeffs.coefficient(7) != 1:
        raise InputError("dubrovin handles d3 R3 + d5 R5 + R7 only")
    d3, d5 = coeffs.coefficient(3), coeffs.coefficient(5)
    if spec is None:
        profile = lambda x: ProfileSample(x, (0.0,) * 5)  # noqa: E731
    else:
        prof = SolitonProfile(spec, _bits(args))
        profile = lambda x: prof.sample(x, 4)  # noqa: E731
    pencil = pencil_from_profile(profile, d3, d5)
    # a short stencil around x0 lets the root slopes fix the square-root signs
    h = 1e-3
    start = pencil_roots_along(pencil, [args.x0 + k * h for k in (-2, -1, 0, 1, 2)]).states[2]
    grid = Grid.parse(args.grid).points()
    traj = integrate_on_grid(start, args.x0, grid, args.step)
    header = ["x", "re_z1", "im_z1", "re_z2", "im_z2", "u_reconstructed"]
    # + 0.0 folds -0.0 into 0.0 so constant columns print identically
    rows = [[repr(x)] + [repr(v + 0.0) for v in (z1.real, z1.imag, z2.real, z2.imag, u.real)]
            for x, z1, z2, u in ((x, complex(a), complex(b), complex(u)) for x, a, b, u in traj.rows())]
    _emit(args, _table(args, header, rows),
          {"command": "dubrovin", "d3": str(d3), "d5": str(d5), "x0": args.x0, "step": args.step})
    return EXIT_OK


def cmd_degenerate(args) -> int:
    v1, v2 = (_numbers(args.V1)[0], _numbers(args.V2)[0])
    alpha = complex(_numbers(args.alpha)[0]) if args.alpha else 0
    case = DegenerateCase(args.case, alpha, complex(v1), complex(v2), args.x0)
    bracket = _numbers(args.bracket.replace(":", ","))
    report = find_real_zero(case, (float(bracket[0]), float(bracket[1])))
    _emit(args, json.dumps(report.to_dict(), indent=2) + "\n", {"command": "degenerate"})
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="laxnovikov", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, grid="-20:20:2001"):
        sp.add_argument("--spec", help="soliton spec JSON file")
        sp.add_argument("--alphas", help="inline wavespeeds, comma separated")
        sp.add_argument("--amps", help="inline amplitudes, comma separated")
        sp.add_argument("--times", help="inline times, e.g. t3=0.1,t5=0")
        sp.add_argument("--grid", default=grid, help="min:max:n (default %(default)s)")
        sp.add_argument("--precision-bits", type=int, default=None)
        sp.add_argument("--out", help="write here (atomically) instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    def coeff_flags(sp):
        sp.add_argument("--s", help="s0,s1,...,sN")
        sp.add_argument("--d", help="d1,d3,d5,...")
        sp.add_argument("--d3", type=Fraction)
        sp.add_argument("--d5", type=Fraction)

    h = sub.add_parser("hierarchy", help="print R_1 .. R_{2k+1} and the flows")
    h.add_argument("k_max", type=int, nargs="?", default=3)
    h.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    h.add_argument("--format", choices=("text", "json"), default="text")
    h.add_argument("--out")
    h.set_defaults(func=cmd_hierarchy)

    e = sub.add_parser("eval", help="export a profile and its derivatives")
    common(e)
    e.add_argument("--derivs", type=int, default=4)
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="stationary residual of a profile")
    common(v)
    coeff_flags(v)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--skip-poles", action="store_true")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("classify", help="decaying solution families for (d3, d5)")
    c.add_argument("--d1", type=float, default=None)
    c.add_argument("--d3", type=Fraction, required=True)
    c.add_argument("--d5", type=Fraction, required=True)
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("--out")
    c.set_defaults(func=cmd_classify)

    d = sub.add_parser("dubrovin", help="integrate the root system and export the trajectory")
    common(d, grid="-5:5:101")
    coeff_flags(d)
    d.add_argument("--x0", type=float, default=0.0)
    d.add_argument("--step", type=float, default=1e-3)
    d.set_defaults(func=cmd_dubrovin)

    g = sub.add_parser("degenerate", help="real zero of a limit determinant")
    g.add_argument("--case", choices=DEGENERATE_TAGS, required=True)
    g.add_argument("--alpha", help="sqrt of the nonzero root (i*beta for negative roots)")
    g.add_argument("--V1", required=True)
    g.add_argument("--V2", required=True)
    g.add_argument("--x0", type=float, default=0.0)
    g.add_argument("--bracket", default="-10:10")
    g.add_argument("--out")
    g.set_defaults(func=cmd_degenerate)
    return p


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Turn '--grid -20:20:5' into '--grid=-20:20:5' so argparse does not see an option."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if (tok.startswith("--") and "=" not in tok and len(nxt) > 1 and nxt[0] == "-"
                and (nxt[1].isdigit() or nxt[1] == ".")):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_values(argv))
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LaxNovikovError, ValueError, ZeroDivisionError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
