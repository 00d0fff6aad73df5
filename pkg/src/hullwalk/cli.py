"""Command-line entry point: ``hullwalk <command> ...``.

Every run writes one JSON object or one CSV table.  Exit status is 0 on
success, 2 on invalid input and 3 when a geometric configuration is
degenerate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from hullwalk import __version__
from hullwalk import exactforms as ef
from hullwalk import mcharness as mc
from hullwalk import spitzer as sp
from hullwalk.comboracle import DegenerateConfigurationError, check_lemma
from hullwalk.hullgeom import GEOMETRY_TOL, DegenerateHullError
from hullwalk.walkgen import IncrementSpec

EXIT_OK, EXIT_INVALID, EXIT_DEGENERATE = 0, 2, 3


class UsageError(ValueError):
    pass


# -- exact quantities ------------------------------------------------------------------------

def _needs(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for this quantity")


EXACT = {
    "theorem1": lambda a, n: ef.theorem1_prob(n, a.mode),
    "sparre-andersen": lambda a, n: ef.sparre_andersen(n, a.mode),
    "bridge": lambda a, n: ef.bridge_prob(n, a.mode),
    "wendel": lambda a, n: ef.wendel_prob(n, a.d, a.mode),
    "face-pinned": lambda a, n: ef.face_prob_pinned(n, a.d, a.indices, a.mode),
    "face-bridge": lambda a, n: ef.face_prob_bridge(n, a.d, a.indices, a.mode),
    "face-temporal": lambda a, n: ef.face_prob_temporal_sum(n, a.d, a.gaps, a.mode),
    "expected-faces": lambda a, n: ef.expected_faces(n, a.d, a.mode),
    "expected-faces-at-origin": lambda a, n: ef.expected_faces_at_origin(n, a.d, a.mode),
    "expected-bridge-faces-at-origin": lambda a, n: ef.expected_bridge_faces_at_origin(n, a.d, a.mode),
    "gaussian-volume": lambda a, n: ef.gaussian_expected_volume(n, a.d, a.sigma),
    "gaussian-intrinsic-volume": lambda a, n: ef.gaussian_intrinsic_volume(n, a.d, a.k, a.sigma),
    "v1": lambda a, n: ef.v1_expected(n, a.d, IncrementSpec.gaussian(a.sigma**2, d=a.d)),
    "perimeter": lambda a, n: ef.spitzer_widom_perimeter(n, IncrementSpec.gaussian(a.sigma**2, d=2)),
    "orthoscheme": lambda a, n: ef.orthoscheme_intrinsic_volume(n, a.k),
    "spherical-u": lambda a, n: ef.spherical_U(n, a.k, a.mode),
}

# exact quantity -> (asymptotic law, extra parameters taken from the arguments)
SWEEP_ASYMPTOTICS = {
    "theorem1": ("log-asympt", ()),
    "sparre-andersen": ("gamma-asympt", ()),
    "expected-faces": ("e-rw", ("d",)),
    "expected-faces-at-origin": ("e-rw-0", ("d",)),
    "expected-bridge-faces-at-origin": ("e-br-0", ("d",)),
}


def _exact_params(args) -> dict:
    out = {"d": args.d, "mode": args.mode}
    for key in ("indices", "gaps", "k"):
        val = getattr(args, key)
        if val is not None:
            out[key] = list(val) if isinstance(val, tuple) else val
    if args.quantity in ("gaussian-volume", "gaussian-intrinsic-volume", "v1", "perimeter"):
        out["sigma"] = args.sigma
    return out


def _check_exact_args(args):
    if args.quantity not in EXACT:
        raise UsageError(f"unknown quantity {args.quantity!r}; known: {', '.join(sorted(EXACT))}")
    if args.quantity in ("face-pinned", "face-bridge"):
        _needs(args, "indices")
    if args.quantity == "face-temporal":
        _needs(args, "gaps")
    if args.quantity in ("gaussian-intrinsic-volume", "orthoscheme", "spherical-u"):
        _needs(args, "k")


# -- Monte Carlo quantities ------------------------------------------------------------------

def build_spec(args) -> IncrementSpec:
    d = args.d
    if args.dist == "gaussian":
        return IncrementSpec.gaussian(args.sigma**2, d=d)
    if args.dist == "uniform-sphere":
        return IncrementSpec.uniform_sphere(d, args.radius)
    if args.dist == "uniform-cube":
        return IncrementSpec.uniform_cube(d, args.half_width)
    if args.dist == "exponential":
        rates = args.rates if args.rates is not None else (1.0,) * d
        if len(rates) != d:
            raise UsageError(f"--rates needs {d} values")
        return IncrementSpec.centered_exponential(rates)
    if args.dist == "mixture":
        scales = args.scales if args.scales is not None else (1.0,)
        return IncrementSpec.scaled_mixture(IncrementSpec.gaussian(args.sigma**2, d=d), scales)
    raise UsageError(f"unknown distribution {args.dist!r}")


def _mc_params(args) -> dict:
    out = {}
    if args.indices is not None:
        out["indices"] = tuple(args.indices)
    if args.gaps is not None:
        out["gaps"] = tuple(args.gaps)
    if args.k is not None:
        out["k"] = args.k
        out["frames"] = args.frames
    if args.quantity == "opening-angle-deficit":
        out["directions"] = args.directions
    if args.quantity.startswith("bridge"):
        out["bridge"] = args.bridge
    if args.tol != GEOMETRY_TOL:
        out["tol"] = args.tol
    return out


def _jsonable(params: dict) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()}


def _check_mc_quantity(name: str):
    if name not in mc.QUANTITIES:
        raise UsageError(f"unknown quantity {name!r}; known: {', '.join(sorted(mc.QUANTITIES))}")


# -- record helpers --------------------------------------------------------------------------------

def _record(args, **fields) -> dict:
    rec = {
        "command": args.command,
        "quantity": getattr(args, "quantity", None),
        "params": {},
        "n": getattr(args, "n", None),
        "d": getattr(args, "d", None),
        "samples": getattr(args, "samples", None),
        "seed": getattr(args, "seed", None),
        "library_version": __version__,
    }
    rec.update(fields)
    return rec


def _estimate_fields(est: mc.Estimate) -> dict:
    out = {"mean": est.mean, "stderr": est.stderr, "ci95": list(est.ci95), "n_samples": est.n_samples}
    if est.discard_rate is not None:
        out["discard_rate"] = est.discard_rate
    if est.remainder is not None:
        out["remainder"] = est.remainder if math.isfinite(est.remainder) else None
    if est.degenerate:
        out["degenerate"] = est.degenerate
    if est.warnings:
        out["warnings"] = list(est.warnings)
    return out


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _to_csv(columns: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


CSV_COLUMNS = {
    "exact": ["quantity", "n", "d", "exact", "rational"],
    "simulate": ["quantity", "n", "d", "samples", "seed", "mean", "stderr", "ci_low", "ci_high"],
    "compare": ["quantity", "n", "d", "samples", "seed", "exact", "mean", "stderr", "ci_low", "ci_high", "z"],
    "sweep": ["n", "exact", "asymptotic", "ratio"],
    "spitzer": ["route", "mean", "stderr", "n_samples", "remainder", "discard_rate"],
    "orthoscheme": ["n", "k", "value", "value_over_n"],
    "lemma-check": ["lemma", "d", "n", "trials", "failures"],
}


def _csv_rows(rec: dict) -> list:
    cmd = rec["command"]
    if "rows" in rec:
        return rec["rows"]
    row = dict(rec)
    if "ci95" in rec:
        row["ci_low"], row["ci_high"] = rec["ci95"]
    if cmd == "orthoscheme":
        row["value"] = rec["exact"]
    return [row]


# -- commands -------------------------------------------------------------------------------------

def cmd_exact(args) -> dict:
    _check_exact_args(args)
    val = EXACT[args.quantity](args, args.n)
    return _record(args, params=_exact_params(args), exact=val.value, rational=val.rational_str)


def cmd_sweep(args) -> dict:
    _check_exact_args(args)
    law = SWEEP_ASYMPTOTICS.get(args.quantity)
    rows = []
    for n in args.n:
        val = EXACT[args.quantity](args, n).value
        asym = ratio = None
        if law is not None and n >= 2:
            extra = {key: getattr(args, key) for key in law[1]}
            asym = ef.asymptotic(law[0], n, **extra).value
            ratio = val / asym
        rows.append({"n": n, "exact": val, "asymptotic": asym, "ratio": ratio})
    params = _exact_params(args)
    if law is not None:
        params["asymptotic_law"] = law[0]
    return _record(args, n=None, params=params, rows=rows)


def cmd_simulate(args, with_exact: bool = False) -> dict:
    _check_mc_quantity(args.quantity)
    spec = build_spec(args)
    params = _mc_params(args)
    fields = {"params": dict(_jsonable(params), dist=spec.describe())}
    if with_exact:
        row = mc.compare(args.quantity, spec, args.n, args.samples, args.seed, args.threads, **params)
        fields.update(exact=row.exact.value, rational=row.exact.rational_str, z=row.z)
        est = row.estimate
    else:
        est = mc.estimate(args.quantity, spec, args.n, args.samples, args.seed, args.threads, **params)
    fields.update(_estimate_fields(est))
    if fields.get("z") is not None and not math.isfinite(fields["z"]):
        fields["z"] = None
    return _record(args, **fields)


def cmd_spitzer(args) -> dict:
    spec = build_spec(args)
    u = args.direction if args.direction is not None else (1.0,) + (0.0,) * (args.d - 1)
    rows = []
    routes = ("ladder", "series") if args.route == "both" else (args.route,)
    for route in routes:
        if route == "angular":
            est = sp.angular_average_R(spec, args.directions, args.samples, args.seed, args.n_terms)
        else:
            view = sp.DirectionalWalkView.along(spec, u)
            if route == "ladder":
                est = sp.r_of_u_ladder(view, args.max_steps, args.samples, args.seed)
            else:
                est = sp.r_of_u_series(view, args.n_terms, args.samples, args.seed)
        rows.append(dict(_estimate_fields(est), route=route))
    params = {"dist": spec.describe(), "direction": list(map(float, u)), "route": args.route,
              "n_terms": args.n_terms, "max_steps": args.max_steps}
    return _record(args, quantity="R", n=None, params=params, rows=rows)


def cmd_orthoscheme(args) -> dict:
    val = ef.orthoscheme_intrinsic_volume(args.n, args.k).value
    rec = _record(args, quantity="orthoscheme", samples=None, seed=None, d=args.n,
                  params={"k": args.k}, exact=val)
    rec["k"] = args.k
    rec["value_over_n"] = val / args.n
    return rec


def cmd_lemma_check(args) -> dict:
    failures = check_lemma(args.lemma, args.d, args.n, args.trials, args.seed)
    rec = _record(args, quantity=f"lemma{args.lemma}", samples=args.trials,
                  params={"lemma": args.lemma}, failures=failures)
    rec["lemma"], rec["trials"] = args.lemma, args.trials
    return rec


# -- argument parsing -------------------------------------------------------------------------------

def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return val


def _common(p, *, mc_opts: bool):
    p.add_argument("--config", help="file of key=value lines mirroring flag names")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--d", type=_positive, default=2)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--indices", type=_int_list)
    p.add_argument("--gaps", type=_int_list)
    p.add_argument("--k", type=_positive)
    p.add_argument("--mode", choices=("auto", "rational", "float"), default="auto")
    if mc_opts:
        p.add_argument("--samples", type=_positive, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=_positive, default=None)
        p.add_argument("--dist", default="gaussian",
                       choices=("gaussian", "uniform-sphere", "uniform-cube", "exponential", "mixture"))
        p.add_argument("--radius", type=float, default=1.0)
        p.add_argument("--half-width", type=float, default=1.0)
        p.add_argument("--rates", type=_float_list)
        p.add_argument("--scales", type=_float_list)
        p.add_argument("--frames", type=_positive, default=1)
        p.add_argument("--directions", type=_positive, default=1000)
        p.add_argument("--bridge", choices=("difference", "conditional-gaussian"), default="difference")
        p.add_argument("--tol", type=float, default=GEOMETRY_TOL)


def build_parser() -> tuple:
    parser = argparse.ArgumentParser(prog="hullwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hullwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("exact", help="evaluate a closed-form quantity")
    p.add_argument("quantity")
    p.add_argument("--n", type=_positive, required=True)
    _common(p, mc_opts=False)
    subs["exact"] = p

    p = sub.add_parser("sweep", help="exact value against its leading asymptotic over several n")
    p.add_argument("quantity")
    p.add_argument("--n", type=_int_list, required=True)
    _common(p, mc_opts=False)
    subs["sweep"] = p

    for name in ("simulate", "compare"):
        p = sub.add_parser(name, help=f"{name} a Monte Carlo quantity")
        p.add_argument("quantity")
        p.add_argument("--n", type=_positive, required=True)
        _common(p, mc_opts=True)
        subs[name] = p

    p = sub.add_parser("spitzer", help="estimate the exit functional R(u)")
    p.add_argument("--route", choices=("ladder", "series", "both", "angular"), default="both")
    p.add_argument("--direction", type=_float_list)
    p.add_argument("--n-terms", type=int, default=200)
    p.add_argument("--max-steps", type=_positive, default=100_000)
    _common(p, mc_opts=True)
    p.set_defaults(dist="exponential", d=1, directions=16)
    subs["spitzer"] = p

    p = sub.add_parser("orthoscheme", help="intrinsic volume of the canonical orthoscheme")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--config")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output")
    subs["orthoscheme"] = p

    p = sub.add_parser("lemma-check", help="exhaustive checks of the cyclic-shift lemmas")
    p.add_argument("--lemma", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--d", type=_positive, default=2)
    p.add_argument("--n", type=_positive, default=6)
    p.add_argument("--trials", type=_positive, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output")
    subs["lemma-check"] = p
    return parser, subs


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment; keys may use ``-`` or ``_``."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        config = read_config(args.config)
        p = subs[args.command]
        known = {a.dest for a in p._actions}
        unknown = sorted(set(config) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        # string defaults go through each option's type converter on re-parse
        p.set_defaults(**config)
        for action in p._actions:
            if action.dest in config:
                action.required = False
        args = parser.parse_args(argv)
    if hasattr(args, "threads") and args.threads is None:
        args.threads = mc.default_threads()
    return args


COMMANDS = {
    "exact": cmd_exact,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "compare": lambda a: cmd_simulate(a, with_exact=True),
    "spitzer": cmd_spitzer,
    "orthoscheme": cmd_orthoscheme,
    "lemma-check": cmd_lemma_check,
}


def render(rec: dict, fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps(rec, sort_keys=True, allow_nan=False) + "\n"
    rows = _csv_rows(rec)
    return _to_csv(CSV_COLUMNS[rec["command"]], rows)


def run(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    start = time.perf_counter()
    try:
        rec = COMMANDS[args.command](args)
    except (DegenerateHullError, DegenerateConfigurationError) as exc:
        print(f"degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    rec["wall_time_ms"] = (time.perf_counter() - start) * 1000.0
    text = render(rec, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
