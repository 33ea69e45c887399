"""Command-line front end.

Exit codes: 0 success, 1 usage/parse error, 2 precondition failure,
3 convergence or validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

from . import __version__
from .errors import (
    DegenerateDeterminant,
    InsufficientAcceptance,
    LerwError,
    MaxTriesExceeded,
    NotConverged,
    Singular,
)
from .lattice import Saw, Site

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_CONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    eta: str | None = None
    zeta: str | None = None
    route: str | None = None
    radii: list = field(default_factory=list)
    strips: list = field(default_factory=list)
    window: list | None = None
    tol: float | None = None
    samples: int | None = None
    seed: int = 0
    output_format: str = "json"
    precision: int = 17
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None and v != [] and v != {}}


# ---------------------------------------------------------------------------
# parsing helpers


def parse_site(text: str) -> Site:
    t = text.strip()
    if t.startswith("(") and t.endswith(")"):
        t = t[1:-1]
    try:
        return Site(*(int(p) for p in t.split(",")))
    except ValueError as exc:
        raise UsageError(f"cannot parse site {text!r}") from exc


def parse_saw(text: str) -> Saw:
    """Syntax errors are usage errors; a well-formed list that is not a SAW is a precondition failure."""
    parts = [p for p in text.replace(" ", "").split(";") if p]
    if not parts:
        raise UsageError("empty SAW")
    return Saw.of([parse_site(p) for p in parts])


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _window(text: str) -> list[int]:
    vals = _int_list(text)
    if len(vals) != 4 or vals[0] > vals[1] or vals[2] > vals[3]:
        raise argparse.ArgumentTypeError("window must be xmin,xmax,ymin,ymax with min <= max")
    return vals


def _fmt(x: float, precision: int) -> str:
    return f"{float(x):.{precision}g}"


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if isinstance(o, Site):
        return repr(o)
    try:
        return float(o)
    except (TypeError, ValueError):
        return str(o)


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _envelope(cfg: RunConfig, result) -> dict:
    return {"version": __version__, "config": cfg.to_dict(), "result": result}


# ---------------------------------------------------------------------------
# commands


def cmd_v_table(args) -> int:
    from .harmonic import sqrt_branch, v_table

    cfg = RunConfig("v-table", route=args.route, radii=args.radii, window=args.window, tol=args.tol,
                    output_format="csv", precision=args.precision,
                    extra={"compare_asymptotic": args.compare_asymptotic})
    x0, x1, y0, y1 = args.window
    sites = [Site(x, y) for y in range(y0, y1 + 1) for x in range(x0, x1 + 1)]
    tv = v_table(sites, args.radii, args.route, "v")
    tu = v_table(sites, args.radii, args.route, "u")
    bad = [z for z in sites if max(tv[z].error, tu[z].error) > args.tol]

    buf = io.StringIO()
    buf.write(f"# twosided_lerw {__version__} v-table\n")
    buf.write(f"# config: {json.dumps(cfg.to_dict(), sort_keys=True)}\n")
    if bad:
        buf.write(f"# WARNING: {len(bad)} rows exceed tol={args.tol:g} (converged=0)\n")
    wr = csv.writer(buf, lineterminator="\n")
    head = ["x", "y", "v", "v_err", "u", "u_err"]
    if args.compare_asymptotic:
        head += ["asym_v", "asym_u"]
    head.append("converged")
    wr.writerow(head)
    p = args.precision
    for z in sites:
        row = [z[0], z[1], _fmt(tv[z].value, p), _fmt(tv[z].error, p), _fmt(tu[z].value, p), _fmt(tu[z].error, p)]
        if args.compare_asymptotic:
            re_, im_ = sqrt_branch(z[0], z[1])
            row += [_fmt(4 / math.pi * im_, p), _fmt(4 / math.pi * re_, p)]
        row.append(0 if z in bad else 1)
        wr.writerow(row)
    _emit(buf.getvalue(), args.out)
    return EXIT_PRECONDITION if bad else EXIT_OK


def _mc_params(args):
    from .transition import MCParams

    return MCParams(radius=args.radius, truncation_radius=args.truncation_radius or None,
                    target_accepted=args.accepted, seed=args.seed)


def cmd_transition(args) -> int:
    from .transition import transition_prob_det, transition_prob_green

    eta, zeta = parse_saw(args.eta), parse_site(args.zeta)
    cfg = RunConfig("transition", eta=args.eta, zeta=args.zeta, route=args.route, strips=args.strips,
                    seed=args.seed, samples=args.accepted,
                    extra={"radius": args.radius, "truncation_radius": args.truncation_radius})
    out = {}
    if args.route in ("det", "both"):
        out["det"] = transition_prob_det(eta, zeta, args.strips).to_dict()
    if args.route in ("green", "both"):
        out["green"] = transition_prob_green(eta, zeta, _mc_params(args)).to_dict()
    if args.route == "both":
        d, g = out["det"], out["green"]
        out["difference"] = {"value": d["probability"] - g["probability"],
                             "combined_error": math.hypot(d["error"], g["error"])}
    result = out if args.route == "both" else next(iter(out.values()))
    _emit(_dump(_envelope(cfg, result)), args.out)
    return EXIT_OK


def cmd_phat(args) -> int:
    from .transition import phat_det, phat_green_phi

    eta = parse_saw(args.eta)
    cfg = RunConfig("phat", eta=args.eta, route=args.route, strips=args.strips, seed=args.seed,
                    samples=args.accepted, extra={"radius": args.radius, "truncation_radius": args.truncation_radius})
    out = {}
    if args.route in ("det", "both"):
        out["det"] = phat_det(eta, args.strips).to_dict()
    if args.route in ("green", "both"):
        out["green"] = phat_green_phi(eta, _mc_params(args)).to_dict()
    if args.route == "both":
        d, g = out["det"], out["green"]
        out["difference"] = {"value": float(d["value"]) - g["probability"],
                             "combined_error": math.hypot(float(d["error"]), g["error"])}
    result = out if args.route == "both" else next(iter(out.values()))
    _emit(_dump(_envelope(cfg, result)), args.out)
    return EXIT_OK


def cmd_straightline(args) -> int:
    from .transition import phat_det, transition_prob_det

    cfg = RunConfig("straightline", strips=args.strips, extra={"k_max": args.k_max})
    sq = math.sqrt(2) - 1
    rows = []
    for k in range(1, args.k_max + 1):
        eta = Saw.line(k)
        ph = phat_det(eta, args.strips)
        tr = transition_prob_det(eta, (k + 1, 0), args.strips)
        target = 0.25 * sq ** (k - 1)
        rows.append({"k": k, "phat": float(ph.value), "phat_error": ph.error, "phat_target": target,
                     "phat_rel_error": abs(float(ph.value) / target - 1),
                     "transition": tr.value, "transition_error": tr.error, "transition_target": sq})
    _emit(_dump(_envelope(cfg, rows)), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    from . import validate

    crit = [c for part in (args.criterion or []) for c in part.split(",") if c]
    try:
        keys = validate.select(crit, args.quick)
    except KeyError as exc:
        raise UsageError(str(exc.args[0]))
    cfg = RunConfig("validate", extra={"quick": args.quick, "criteria": keys})
    results = validate.run(keys, report=lambda s: print(s, flush=True))
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed", flush=True)
    if args.out:
        rep = [{k: v for k, v in r.to_dict().items() if k != "seconds"} for r in results]
        _emit(_dump(_envelope(cfg, {"passed": ok, "criteria": rep})), args.out)
    return EXIT_OK if ok else EXIT_CONVERGENCE


def cmd_sample_lerw(args) -> int:
    from .linops import FiniteDomain
    from .montecarlo import RngStream, chordal_probability, phat_A_empirical

    eta = parse_saw(args.eta)
    rng = RngStream(args.seed, args.stream)
    if args.strip_n is not None:
        cfg = RunConfig("sample-lerw", eta=args.eta, samples=args.samples, seed=args.seed,
                        extra={"strip_n": args.strip_n, "max_tries": args.max_tries, "method": args.method,
                               "stream": args.stream})
        est = chordal_probability(args.strip_n, eta, rng, target_accepted=args.samples, max_tries=args.max_tries,
                                  method=args.method)
        quantity = "p^(n)(eta): chordal LERW through 0 containing eta"
    else:
        cfg = RunConfig("sample-lerw", eta=args.eta, samples=args.samples, seed=args.seed,
                        extra={"domain_radius": args.domain_radius, "stream": args.stream})
        est = phat_A_empirical(FiniteDomain.disk(args.domain_radius), eta, rng, args.samples)
        quantity = "p-hat_A(eta) on the disk"
    _emit(_dump(_envelope(cfg, {"quantity": quantity, "estimate": est.to_dict()})), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="twosided-lerw", description="Two-sided LERW transition probabilities on Z^2.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, strips=True):
        sp.add_argument("--out", "-o", help="write output here instead of stdout")
        if strips:
            sp.add_argument("--strips", type=_int_list, default=[64, 128, 256],
                            help="strip half-widths n for the extrapolation (default 64,128,256)")

    def mc(sp):
        sp.add_argument("--radius", type=float, default=16, help="matched disk radius (default 16)")
        sp.add_argument("--truncation-radius", type=float, default=8,
                        help="second radius for the truncation error, 0 to skip (default 8)")
        sp.add_argument("--accepted", type=int, default=10**5, help="accepted MC samples per phi estimate")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("v-table", help="CSV of v and u over a window")
    sp.add_argument("--window", type=_window, required=True, help="xmin,xmax,ymin,ymax")
    sp.add_argument("--radii", type=_int_list, default=[64, 128, 256])
    sp.add_argument("--route", choices=["harmonic", "escape"], default="harmonic")
    sp.add_argument("--tol", type=float, default=1e-3, help="maximum extrapolation error per row")
    sp.add_argument("--compare-asymptotic", action="store_true", help="add (4/pi) Im sqrt z and Re sqrt z")
    sp.add_argument("--precision", type=int, default=12)
    common(sp, strips=False)
    sp.set_defaults(func=cmd_v_table)

    sp = sub.add_parser("transition", help="p(eta^zeta | eta)")
    sp.add_argument("--eta", required=True, help='SAW, e.g. "(0,0);(1,0)"')
    sp.add_argument("--zeta", required=True, help='next site, e.g. "(2,0)"')
    sp.add_argument("--route", choices=["det", "green", "both"], default="det")
    common(sp)
    mc(sp)
    sp.set_defaults(func=cmd_transition)

    sp = sub.add_parser("phat", help="p-hat(eta)")
    sp.add_argument("--eta", required=True)
    sp.add_argument("--route", choices=["det", "green", "both"], default="det")
    common(sp)
    mc(sp)
    sp.set_defaults(func=cmd_phat)

    sp = sub.add_parser("straightline", help="straight-line probabilities against the closed form")
    sp.add_argument("--k-max", type=int, default=6)
    common(sp)
    sp.set_defaults(func=cmd_straightline)

    sp = sub.add_parser("validate", help="run the acceptance checks")
    sp.add_argument("--quick", action="store_true", help="oracle checks only")
    sp.add_argument("--criterion", action="append",
                    help="criterion number, name or group (straightline, determinant, harmonic, oracle, montecarlo)")
    common(sp, strips=False)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("sample-lerw", help="Monte Carlo LERW estimates")
    where = sp.add_mutually_exclusive_group(required=True)
    where.add_argument("--strip-n", type=int, help="chordal LERW in the strip of half-width n")
    where.add_argument("--domain-radius", type=float, help="two-walk estimator on the disk of this radius")
    sp.add_argument("--eta", default="(0,0);(1,0)")
    sp.add_argument("--samples", type=int, default=10**4, help="accepted samples (strip) or walk pairs (disk)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--stream", type=int, default=0)
    sp.add_argument("--max-tries", type=int, default=10**9)
    sp.add_argument("--method", choices=["rejection", "h-transform"], default="rejection")
    common(sp, strips=False)
    sp.set_defaults(func=cmd_sample_lerw)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NotConverged, DegenerateDeterminant, Singular, MaxTriesExceeded, InsufficientAcceptance) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (LerwError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
