"""``brownlab`` command line.

Every command reads an operator spec file (``-`` for stdin) and writes plain
text: one number per line for ``det``, CSV for ``brown`` and ``spectrum``,
spec-file text for ``project`` and ``polar``, a check report for ``verify``.
"""

import argparse
import sys
import warnings

from . import brown as br
from . import determinant as dt
from . import spectral as sp
from .errors import BrownlabError, UnknownSuite
from .measures import Rectangle, fmt
from .specfile import parse_spec, serialize_spec
from .verify import SUITES, run_verify


def _complex(text):
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're' or 're,im', got {text!r}")


def _rect(text):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        vals = []
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"expected 'x0,x1,y0,y1', got {text!r}")
    return Rectangle(*vals)


def _schedule(text):
    out = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        try:
            n, m, k = item.split(",")
            out.append((int(n), float(m), int(k)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"schedule entries are 'n,m,k', got {item!r}") from None
    return out


def _load(path):
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    parsed = parse_spec(text)
    for note in parsed.notices:
        print(f"notice: {note}", file=sys.stderr)
    return parsed.operator


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_det(args):
    T = _load(args.spec)
    lams = args.lam or [0j]
    lines = []
    for lam in lams:
        if args.family == "none":
            v = dt.shifted_log_det(T, lam)
        elif args.family == "eps":
            v = dt.log_fk_det_eps(T.shift(lam), args.eps)
        else:
            v = dt.quad_reg_log_det(T, lam, args.m)
        lines.append(fmt(v))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_brown(args):
    T = _load(args.spec)
    if args.mode == "exact":
        text = br.brown_exact(T).to_csv()
    elif args.mode == "grid":
        region = args.region or br.auto_region(T, min(args.nx, args.ny))
        g = br.brown_grid(T, region, args.nx, args.ny, args.m)
        for note in g.notes:
            print(f"notice: {note}", file=sys.stderr)
        text = g.to_csv()
    else:
        if args.region is None:
            raise SystemExit("mollifier mode needs --region (the box B)")
        sched = args.schedule or [(1, args.m, 400), (2, args.m, 800)]
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", br.ResolutionWarning)
            est = br.mollifier_mass(T, args.region, sched, args.scale)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        text = "".join(f"{n},{fmt(m)},{k},{fmt(e)}\n" for (n, m, k), e in zip(sched, est))
    _emit(text, args.out)
    return 0


def cmd_spectrum(args):
    T = _load(args.spec)
    s = sp.spectrum(T)
    rows = [
        f"{i},{fmt(z.real)},{fmt(z.imag)}\n" for i, ev in enumerate(s.per_atom) for z in ev
    ]
    _emit("".join(rows), args.out)
    return 0


def cmd_project(args):
    T = _load(args.spec)
    if args.halfline is not None:
        region = sp.HalfLine(args.halfline, above=not args.below, closed=args.closed)
    elif args.region:
        region = args.region[0] if len(args.region) == 1 else sp.union(*args.region)
    else:
        raise SystemExit("project needs --region or --halfline")
    if args.complement:
        region = sp.Complement(region)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", sp.BoundaryWarning)
        E = sp.spectral_projection(T, region)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit(serialize_spec(E.operator, header=f"spectral projection, ranks {E.rank()}"), args.out)
    return 0


def cmd_polar(args):
    T = _load(args.spec)
    V, P = sp.polar(T)
    parts = []
    if args.part in ("V", "both"):
        parts.append(serialize_spec(V, header="polar part V"))
    if args.part in ("P", "both"):
        parts.append(serialize_spec(P, header="absolute value |T|"))
    _emit("".join(parts), args.out)
    return 0


def cmd_verify(args):
    if args.suite != "all" and args.suite not in SUITES:
        raise UnknownSuite(f"unknown suite {args.suite!r}")
    T = _load(args.spec) if args.spec else None
    rep = run_verify(args.suite, args.seed, T)
    _emit(rep.render(), args.out)
    return 0 if rep.ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="brownlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_, spec_required=True):
        if spec_required:
            sp_.add_argument("spec", help="operator spec file, or - for stdin")
        sp_.add_argument("--out", help="write output here instead of stdout")

    d = sub.add_parser("det", help="log Fuglede-Kadison determinant of T - lambda")
    common(d)
    d.add_argument("--lambda", dest="lam", type=_complex, action="append",
                   help="shift 're,im' (repeatable); default 0")
    d.add_argument("--family", choices=["none", "eps", "quad"], default="none",
                   help="none: log D(T-l); eps: tau log(|T-l|+eps); quad: tau log(|T-l|^2+1/m^2)")
    d.add_argument("--eps", type=float, default=1e-6)
    d.add_argument("--m", type=float, default=1e3)
    d.set_defaults(fn=cmd_det)

    b = sub.add_parser("brown", help="Brown measure as CSV")
    common(b)
    b.add_argument("--mode", choices=["exact", "grid", "mollifier"], default="exact")
    b.add_argument("--region", type=_rect, help="x0,x1,y0,y1 (grid region or mollifier box)")
    b.add_argument("--nx", type=int, default=200)
    b.add_argument("--ny", type=int, default=200)
    b.add_argument("--m", type=float, default=1e3)
    b.add_argument("--scale", type=float, default=0.05, help="mollifier edge width at n=1")
    b.add_argument("--schedule", type=_schedule, help="'n,m,k;n,m,k;...'")
    b.set_defaults(fn=cmd_brown)

    s = sub.add_parser("spectrum", help="per-atom eigenvalues of a normal operator")
    common(s)
    s.set_defaults(fn=cmd_spectrum)

    pr = sub.add_parser("project", help="spectral projection onto a region")
    common(pr)
    pr.add_argument("--region", type=_rect, action="append", help="half-open box x0,x1,y0,y1 (repeatable: union)")
    pr.add_argument("--halfline", type=float, help="real half-line threshold")
    pr.add_argument("--below", action="store_true", help="half-line below the threshold")
    pr.add_argument("--closed", action="store_true", help="include the threshold")
    pr.add_argument("--complement", action="store_true")
    pr.set_defaults(fn=cmd_project)

    po = sub.add_parser("polar", help="polar decomposition T = V|T|")
    common(po)
    po.add_argument("--part", choices=["V", "P", "both"], default="both")
    po.set_defaults(fn=cmd_polar)

    v = sub.add_parser("verify", help="run invariant suites")
    v.add_argument("suite", nargs="?", default="all", help=f"one of {sorted(SUITES) + ['all']}")
    v.add_argument("--spec", help="operator spec file (default: seeded random 3-atom instance)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(fn=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BrownlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
