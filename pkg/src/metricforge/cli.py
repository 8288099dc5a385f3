"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 numerical failure.
"""

import argparse
import json
import os
import shlex
import subprocess
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .attack import run_attack
from .axioms import check_axioms
from .embedding import PointCloud
from .errors import (
    ConditioningWarning,
    MetricForgeError,
    NumericalFailure,
    RankDeficiencyError,
)
from .io import fmt, read_distances, read_points, write_matrix, write_points
from .linalg import largest_eigenvalue
from .quadform import check_capacity
from .semimetric import build_semimetric

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
SEED_ENV = "METRICFORGE_SEED"


class AdapterError(MetricForgeError):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _emit(payload: dict, fmt_name: str, table_lines=None, csv_rows=None, out=None):
    out = out or sys.stdout
    if fmt_name == "json" or (fmt_name == "table" and table_lines is None) or (fmt_name == "csv" and csv_rows is None):
        json.dump(payload, out, indent=2, ensure_ascii=False, default=_json_default)
        out.write("\n")
    elif fmt_name == "table":
        out.write("\n".join(table_lines) + "\n")
    else:
        for row in csv_rows:
            out.write(",".join(str(c) for c in row) + "\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _envelope(args, result: dict) -> dict:
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "func"}
    return {"tool": "metricforge", "version": __version__, "seed": args.seed, "config": config, "result": result}


def _fail(args, stage, exc, code):
    payload = _envelope(args, {"error": {"stage": stage, "type": type(exc).__name__, "message": str(exc)}})
    json.dump(payload, sys.stdout, indent=2, ensure_ascii=False, default=_json_default)
    sys.stdout.write("\n")
    return code


# ---- capacity -------------------------------------------------------------

def cmd_capacity(args) -> int:
    m = check_capacity(args.dim)
    if args.format == "json":
        _emit(_envelope(args, {"dim": args.dim, "max_points": m}), "json")
    else:
        print(m)
    return EXIT_OK


# ---- forge ----------------------------------------------------------------

def _load_cloud(path):
    points, labels, names = read_points(path)
    return PointCloud(points, labels), names


def cmd_forge(args) -> int:
    try:
        cloud, _ = _load_cloud(args.points)
        spec = read_distances(args.distances, cloud.m)
    except (MetricForgeError, OSError) as exc:
        return _fail(args, "input", exc, EXIT_INPUT)
    rng = np.random.default_rng(args.seed)
    scaled = bool(args.scaled)
    diagnostics = []
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConditioningWarning)
            sm = build_semimetric(cloud, spec, args.eps, noise=args.noise, scaled=scaled, rng=rng)
        diagnostics = [str(w.message) for w in caught]
        lam = sm.lambda_max if scaled else largest_eigenvalue(sm.form.matrix)
        table = sm.verification_table()
        matrix = sm.form.matrix
        if not np.all(np.isfinite(matrix)) or not all(np.isfinite(r["realized"]) for r in table):
            raise NumericalFailure("forge", "non-finite values in form or realized distances")
    except (NumericalFailure, RankDeficiencyError) as exc:
        return _fail(args, getattr(exc, "stage", "rank_check"), exc, EXIT_NUMERIC)
    except MetricForgeError as exc:
        return _fail(args, "input", exc, EXIT_INPUT)

    max_err = max(r["rel_error"] for r in table)
    result = {
        "m": cloud.m,
        "h": cloud.h,
        "alpha": 1.0 / lam,
        "lambda_max": lam,
        "scaled": scaled,
        "eigen_spread": sm.form.spread,
        "diagnostics": diagnostics,
        "max_rel_error": max_err,
        "verified": max_err <= args.tol,
        "distances": table,
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_matrix(out / "form.csv", matrix)
        with open(out / "report.json", "w") as fh:
            json.dump(_envelope(args, result), fh, indent=2, ensure_ascii=False, default=_json_default)
        result["matrix_path"] = str(out / "form.csv")
    lines = [
        f"m = {cloud.m}   h = {cloud.h}   scaled = {scaled}",
        f"alpha = {fmt(1.0 / lam)}   lambda_max = {fmt(lam)}   spread = {sm.form.spread:.3e}",
        *[f"warning: {d}" for d in diagnostics],
        f"{'i':>4} {'j':>4} {'desired':>24} {'realized':>24} {'rel.err':>10}",
    ]
    lines += [f"{r['i']:>4} {r['j']:>4} {r['expected']:>24.17g} {r['realized']:>24.17g} {r['rel_error']:>10.2e}"
              for r in table]
    rows = [["i", "j", "desired", "expected", "realized", "rel_error"]]
    rows += [[r["i"], r["j"], fmt(r["desired"]), fmt(r["expected"]), fmt(r["realized"]), fmt(r["rel_error"])]
             for r in table]
    _emit(_envelope(args, result), args.format, lines, rows)
    return EXIT_OK if result["verified"] else EXIT_VERIFY


# ---- check-axioms ---------------------------------------------------------

class SubprocessDistance:
    """Distance served by a child process: one JSON line ``{"x": [...], "y": [...]}``
    in, one number per line out."""

    def __init__(self, command):
        try:
            self.proc = subprocess.Popen(shlex.split(command), stdin=subprocess.PIPE,
                                         stdout=subprocess.PIPE, text=True, bufsize=1)
        except OSError as exc:
            raise AdapterError(f"adapter launch failure: {exc}") from exc

    def __call__(self, x, y) -> float:
        msg = json.dumps({"x": [float(v) for v in x], "y": [float(v) for v in y]})
        try:
            self.proc.stdin.write(msg + "\n")
            self.proc.stdin.flush()
            line = self.proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterError(f"adapter process failed: {exc}") from exc
        if not line:
            raise AdapterError(f"adapter exited with code {self.proc.poll()}")
        return float(line)

    def close(self):
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait(timeout=10)


def _euclid(x, y):
    return float(np.linalg.norm(x - y))


def _plus_one(x, y):
    return 0.0 if np.array_equal(x, y) else float(np.linalg.norm(x - y)) + 1.0


def _asymmetric(x, y):
    # Euclidean plus a one-sided penalty on the first coordinate
    return float(np.linalg.norm(x - y)) + 0.5 * max(0.0, float(x[0] - y[0]))


BUILTIN_DISTANCES = {"euclidean": _euclid, "plus-one": _plus_one, "asymmetric": _asymmetric}


def cmd_check_axioms(args) -> int:
    try:
        points, labels, _ = read_points(args.points)
    except (MetricForgeError, OSError) as exc:
        return _fail(args, "input", exc, EXIT_INPUT)
    rng = np.random.default_rng(args.seed)
    sample = [p for p in points]
    closer = None
    try:
        if args.distance == "forged":
            if not args.distances:
                raise MetricForgeError("--distances is required for --distance forged")
            cloud = PointCloud(points, labels)
            spec = read_distances(args.distances, cloud.m)
            scaled = True if args.scaled is None else args.scaled
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConditioningWarning)
                distance = build_semimetric(cloud, spec, args.eps, noise=args.noise, scaled=scaled, rng=rng)
        elif args.distance == "command":
            if not args.command:
                raise MetricForgeError("--command is required for --distance command")
            distance = SubprocessDistance(args.command)
            closer = distance.close
        else:
            distance = BUILTIN_DISTANCES[args.distance]
        if args.random_extra:
            lo, hi = points.min(axis=0), points.max(axis=0)
            sample += list(rng.uniform(lo - 1.0, hi + 1.0, size=(args.random_extra, points.shape[1])))
        report = check_axioms(distance, sample, args.eps, tol=args.tol, rng=rng)
    except (NumericalFailure, RankDeficiencyError) as exc:
        return _fail(args, getattr(exc, "stage", "rank_check"), exc, EXIT_NUMERIC)
    except (MetricForgeError, OSError) as exc:
        return _fail(args, "input", exc, EXIT_INPUT)
    finally:
        if closer:
            closer()
    result = report.to_dict()
    lines = [f"{k:>22}: {v}" for k, v in result.items()]
    rows = [["key", "value"]] + [[k, json.dumps(v, ensure_ascii=False, default=_json_default)]
                                 for k, v in result.items()]
    _emit(_envelope(args, result), args.format, lines, rows)
    return EXIT_OK


# ---- attack ---------------------------------------------------------------

def cmd_attack(args) -> int:
    cloud = None
    try:
        if args.points:
            points, labels, _ = read_points(args.points)
            if labels is None:
                raise MetricForgeError(f"{args.points}: attack needs a 'class' column")
            cloud = PointCloud(points, labels)
        elif not args.random:
            raise MetricForgeError("give either --points or --random M L CLASSES")
        kwargs = {}
        if args.random:
            m, ell, classes = args.random
            if m < 2 or ell < 1 or classes < 1:
                raise MetricForgeError("--random needs M >= 2, L >= 1, CLASSES >= 1")
            kwargs["random_shape"] = (m, ell, classes)
        report = run_attack(args.algorithm, cloud, seed=args.seed, eps=args.eps, noise=args.noise,
                            scaled=bool(args.scaled), iterations=args.iterations, centers=args.centers,
                            **kwargs)
    except (NumericalFailure, RankDeficiencyError) as exc:
        return _fail(args, getattr(exc, "stage", "rank_check"), exc, EXIT_NUMERIC)
    except (MetricForgeError, OSError) as exc:
        return _fail(args, "input", exc, EXIT_INPUT)

    if args.write_points:
        write_points(args.write_points, np.array(report.points), report.desired)
    result = report.to_dict()
    ell = len(report.points[0])
    header = f"{'#':>3} " + " ".join(f"{'x' + str(k + 1):>12}" for k in range(ell)) + f" {'desired':>8} {'recovered':>9}"
    lines = [f"algorithm = {report.algorithm}   seed = {report.seed}   success = {report.success}"]
    if report.failure:
        lines.append(f"numerical failure in stage '{report.failure['stage']}': {report.failure['message']}")
    lines += [f"warning: {w}" for w in report.warnings]
    lines.append(header)
    for idx, p in enumerate(report.points):
        got = report.recovered[idx] if idx < len(report.recovered) else "-"
        lines.append(f"{idx + 1:>3} " + " ".join(f"{v:>12.6f}" for v in p) + f" {report.desired[idx]:>8} {got!s:>9}")
    if report.bijection is not None:
        lines.append("bijection: {" + ", ".join(f"{k}->{v}" for k, v in report.bijection.items()) + "}")
    if report.separation:
        sep = report.separation
        lines.append("max distance within class: " + ", ".join(
            f"{c}: {v:.6g}" if v is not None else f"{c}: -" for c, v in sep.within.items()))
        lines.append("min distance between classes: " + ", ".join(
            f"{a}-{b}: {v:.6g}" for (a, b), v in sep.between.items()))
        if sep.ratio is not None:
            lines.append(f"between/within ratio: {sep.ratio:.6g}")
    rows = [["index"] + [f"x{k + 1}" for k in range(ell)] + ["desired", "recovered"]]
    rows += [[idx + 1] + [fmt(v) for v in p] + [report.desired[idx],
                                                report.recovered[idx] if idx < len(report.recovered) else ""]
             for idx, p in enumerate(report.points)]
    _emit(_envelope(args, result), args.format, lines, rows)
    if report.failure:
        return EXIT_NUMERIC
    return EXIT_OK if report.success else EXIT_VERIFY


# ---- parser ---------------------------------------------------------------

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                        help=f"master seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--format", choices=("json", "table", "csv"), default=None,
                        help="report format (default json; capacity prints a bare integer)")
    common.add_argument("--tol", type=float, default=None)

    scaling = argparse.ArgumentParser(add_help=False)
    group = scaling.add_mutually_exclusive_group()
    group.add_argument("--scaled", dest="scaled", action="store_true", default=None,
                       help="divide the form by its largest eigenvalue")
    group.add_argument("--unscaled", dest="scaled", action="store_false")

    parser = argparse.ArgumentParser(prog="metricforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"metricforge {__version__}")
    sub = parser.add_subparsers(dest="command_name", required=True)

    p = sub.add_parser("capacity", parents=[common], help="max number of points embeddable in R^dim")
    p.add_argument("--dim", type=_positive_int, required=True)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("forge", parents=[common, scaling], help="build a form realizing a distance spec")
    p.add_argument("--points", type=Path, required=True)
    p.add_argument("--distances", type=Path, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--noise", choices=("hashed", "paper", "fixed"), default="hashed")
    p.add_argument("--out", type=Path, help="directory for form.csv and report.json")
    p.set_defaults(func=cmd_forge, tol_default=1e-8)

    p = sub.add_parser("check-axioms", parents=[common, scaling], help="audit metric axioms on a sample")
    p.add_argument("--points", type=Path, required=True)
    p.add_argument("--distance", choices=("euclidean", "plus-one", "asymmetric", "forged", "command"),
                   default="euclidean")
    p.add_argument("--command", help="child process serving distances (JSON lines)")
    p.add_argument("--distances", type=Path, help="distance spec for --distance forged")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--noise", choices=("hashed", "paper", "fixed"), default="hashed")
    p.add_argument("--random-extra", type=int, default=0, help="add N seeded random points to the sample")
    p.set_defaults(func=cmd_check_axioms, tol_default=1e-12)

    p = sub.add_parser("attack", parents=[common, scaling], help="forge a metric and manipulate a clustering")
    p.add_argument("algorithm", choices=("kmeans", "dbscan"))
    src = p.add_mutually_exclusive_group()
    src.add_argument("--points", type=Path, help="CSV with a 'class' column of desired labels")
    src.add_argument("--random", type=int, nargs=3, metavar=("M", "L", "CLASSES"))
    p.add_argument("--eps", type=float, default=None, help="noise budget (default 0.45 x closest pair)")
    p.add_argument("--noise", choices=("hashed", "paper"), default="hashed")
    p.add_argument("--iterations", type=_positive_int, default=20)
    p.add_argument("--centers", choices=("mean", "z-neighbor"), default="mean")
    p.add_argument("--write-points", type=Path, help="save the (possibly generated) labeled cloud")
    p.set_defaults(func=cmd_attack, tol_default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = default_seed()
    explicit_format = args.format is not None
    if not explicit_format:
        args.format = "json"
    if args.command_name == "capacity" and not explicit_format:
        args.format = "table"
    if args.tol is None:
        args.tol = getattr(args, "tol_default", None)
    if hasattr(args, "tol_default"):
        del args.tol_default
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
