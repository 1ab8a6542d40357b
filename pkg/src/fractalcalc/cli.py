"""Command-line front end: reproducible CSV emission for the library.

Every command resolves a flat key=value configuration (file keys
overridden by flags), stamps the output with a metadata header carrying
the command, the sha256 of the effective configuration, the seed and the
curve, and writes comma-separated rows with LF endings and 17-significant
-digit floats. Identical configurations produce byte-identical files.

Exit codes: 0 success, 2 user/config error, 3 numerical-estimation
failure.
"""

import argparse
import hashlib
import math
import sys

import numpy as np

from . import __version__
from .curves import KOCH_DIMENSION, build_koch, build_line, load_polyline_csv
from .distributions import DistributionOnCurve
from .errors import (
    CurveDomainError,
    EstimationError,
    EvaluationError,
    ExistenceError,
    FractalCalcError,
    GeometryError,
    InvariantViolationError,
    ResolutionError,
    ResourceError,
)
from .oscillator import (
    BetaSquaredAmplitude,
    FixedSquaredAmplitude,
    MomentSpec,
    deterministic_initial_data,
    mc_solution_moments,
    solve_series,
)
from .processes import (
    BUILTIN_FIXTURES,
    estimate_correlation_grid,
    ms_derivative_check,
)
from .staircase import build_staircase, gamma_dimension

_USAGE_ERRORS = (CurveDomainError, ResourceError, GeometryError, ValueError,
                 KeyError, OSError)
_NUMERIC_ERRORS = (EstimationError, ExistenceError, EvaluationError,
                   ResolutionError, InvariantViolationError)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _config_hash(cfg: dict) -> str:
    canon = "\n".join(f"{k}={_fmt(cfg[k])}" for k in sorted(cfg))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def load_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CurveDomainError(f"config line without '=': {raw.strip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _resolve_curve(cfg):
    kind = cfg["curve"]
    if kind == "koch":
        return build_koch(int(cfg["level"]))
    if kind == "line":
        return build_line(float(cfg["line_a"]), float(cfg["line_b"]))
    if str(kind).endswith(".csv"):
        alpha = cfg["alpha"]
        if alpha == "auto":
            curve = load_polyline_csv(kind, 1.0)
            est = gamma_dimension(curve).value
            return load_polyline_csv(kind, _snap_alpha(est))
        return load_polyline_csv(kind, float(alpha))
    raise CurveDomainError(f"unknown curve kind {kind!r} (koch, line, or *.csv)")


def _snap_alpha(estimate: float, tol: float = 0.02) -> float:
    for known in (1.0, KOCH_DIMENSION):
        if abs(estimate - known) <= tol:
            return known
    return estimate


def _resolve_alpha(cfg, curve) -> float:
    raw = cfg["alpha"]
    if raw == "auto":
        if curve.kind == "line":
            return 1.0
        if curve.kind == "koch" and curve.level == 0:
            return 1.0
        return _snap_alpha(gamma_dimension(curve).value)
    alpha = float(raw)
    if alpha <= 0.0:
        raise CurveDomainError("alpha must be positive")
    return alpha


def write_csv(out_path, meta: dict, header, rows, trailing_comments=()):
    lines = [f"# {k}={_fmt(v)}" for k, v in meta.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    lines.extend(f"# {c}" for c in trailing_comments)
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def read_csv(path):
    """Parse an emitted file back into (meta, header, rows)."""
    meta, header, rows = {}, None, []
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k] = v
                continue
            if header is None:
                header = line.split(",")
            else:
                rows.append([float(v) if _is_number(v) else v
                             for v in line.split(",")])
    return meta, header, rows


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


# -- command configuration -------------------------------------------------

_GLOBAL_DEFAULTS = {
    "curve": "koch",
    "level": "6",
    "alpha": "auto",
    "seed": "0",
    "line_a": "0",
    "line_b": "1",
}

_COMMAND_DEFAULTS = {
    "dimension": {"tol": "0.01"},
    "staircase": {"p0": "", "grid": ""},
    "cdf": {"lam": "1.0", "grid": "256"},
    "sample": {"family": "memoryless", "lam": "1.0", "count": "1000"},
    "correlation": {"fixture": "linear-amplitude", "sigma2": "1.0",
                    "points": "5", "n": "4000"},
    "msdiag": {"fixture": "all", "sigma2": "1.0", "tau": "0.0", "n": "10000"},
    "sde": {"mu": "", "nu": "", "a2": "", "ex0": "1", "ex1": "0",
            "ex0sq": "", "ex1sq": "", "ex01": "", "order": "20",
            "grid": "64", "n": "10000"},
}


def _effective_config(args) -> dict:
    cfg = dict(_GLOBAL_DEFAULTS)
    cfg.update(_COMMAND_DEFAULTS[args.command])
    if args.config:
        file_cfg = load_config_file(args.config)
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise CurveDomainError(
                f"unknown config keys for {args.command}: {sorted(unknown)}"
            )
        cfg.update(file_cfg)
    for key in cfg:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = str(flag)
    cfg["command"] = args.command
    return cfg


def _base_meta(cfg, curve, alpha):
    return {
        "command": cfg["command"],
        "version": __version__,
        "config_sha256": _config_hash(cfg),
        "seed": int(cfg["seed"]),
        "curve": cfg["curve"],
        "level": curve.level,
        "alpha": alpha,
    }


# -- commands ----------------------------------------------------------------


def cmd_dimension(cfg, out):
    curve = _resolve_curve(cfg)
    tol = float(cfg["tol"])
    result = gamma_dimension(curve, tol=tol)
    meta = _base_meta(cfg, curve, cfg["alpha"])
    meta["tol"] = tol
    rows = []
    for alpha, est in result.trace:
        for delta, mass in zip(est.deltas, est.masses):
            rows.append((alpha, delta, mass))
    write_csv(out, meta, ["alpha", "delta", "mass"], rows,
              trailing_comments=[f"dimension={_fmt(result.value)}"])
    if out:
        print(f"dimension={_fmt(result.value)}")
    return 0


def cmd_staircase(cfg, out):
    curve = _resolve_curve(cfg)
    alpha = _resolve_alpha(cfg, curve)
    a, b = curve.domain
    p0 = float(cfg["p0"]) if cfg["p0"] else a
    grid = int(cfg["grid"]) if cfg["grid"] else None
    table = build_staircase(curve, alpha, p0, grid)
    meta = _base_meta(cfg, curve, alpha)
    meta["p0"] = p0
    rows = list(zip(table.t, table.s))
    write_csv(out, meta, ["t", "S"], rows)
    return 0


def cmd_cdf(cfg, out):
    curve = _resolve_curve(cfg)
    alpha = _resolve_alpha(cfg, curve)
    lam = float(cfg["lam"])
    if lam <= 0.0:
        raise CurveDomainError("lam must be positive")
    grid = int(cfg["grid"])
    table = build_staircase(curve, alpha)
    dist = DistributionOnCurve.memoryless(table, lam)
    a, b = curve.domain
    t = np.linspace(a, b, grid + 1)
    j = table.value(t)
    f = dist.cdf_at_j(j)
    meta = _base_meta(cfg, curve, alpha)
    meta["lam"] = lam
    meta["j_range"] = f"[{_fmt(float(j[0]))},{_fmt(float(j[-1]))}]"
    meta["f_max"] = float(f[-1])
    write_csv(out, meta, ["t", "J", "F_X"], zip(t, j, f))
    return 0


def cmd_sample(cfg, out):
    curve = _resolve_curve(cfg)
    alpha = _resolve_alpha(cfg, curve)
    table = build_staircase(curve, alpha)
    family = cfg["family"]
    if family == "uniform":
        dist = DistributionOnCurve.uniform(table)
    elif family == "memoryless":
        dist = DistributionOnCurve.memoryless(table, float(cfg["lam"]))
    else:
        raise CurveDomainError(f"unknown family {family!r}")
    count = int(cfg["count"])
    seed = int(cfg["seed"])
    sample = dist.sample(seed, count)
    meta = _base_meta(cfg, curve, alpha)
    meta["family"] = family
    if family == "memoryless":
        meta["lam"] = float(cfg["lam"])
        meta["truncated_mass"] = dist.truncated_mass
    meta["count"] = count
    meta["plateau_hits"] = sample.plateau_hits
    coords = [f"x{i}" for i in range(curve.ndim)] if curve.ndim > 2 else \
        ["x", "y"][: curve.ndim]
    rows = (
        (t, jv, *pt)
        for t, jv, pt in zip(sample.t, sample.j, sample.points)
    )
    write_csv(out, meta, ["t", "J", *coords], rows)
    return 0


def cmd_correlation(cfg, out):
    curve = _resolve_curve(cfg)
    alpha = _resolve_alpha(cfg, curve)
    table = build_staircase(curve, alpha)
    fixture = cfg["fixture"]
    if fixture not in BUILTIN_FIXTURES:
        raise CurveDomainError(
            f"unknown fixture {fixture!r}; pick from {sorted(BUILTIN_FIXTURES)}"
        )
    proc = _make_fixture(fixture, float(cfg["sigma2"]))
    lo, hi = table.mass_bounds
    j_values = np.linspace(max(lo, 0.0), hi, int(cfg["points"]))
    grid = estimate_correlation_grid(proc, j_values, int(cfg["n"]), int(cfg["seed"]))
    meta = _base_meta(cfg, curve, alpha)
    meta["fixture"] = fixture
    meta["n"] = grid.n
    rows = (
        (grid.j_values[i], grid.j_values[l], grid.r[i, l], grid.stderr[i, l])
        for i in range(len(j_values))
        for l in range(len(j_values))
    )
    write_csv(out, meta, ["J1", "J2", "R", "stderr"], rows)
    return 0


def _make_fixture(name, sigma2):
    if name == "linear-amplitude":
        return BUILTIN_FIXTURES[name](sigma2)
    if name == "white-noise":
        return BUILTIN_FIXTURES[name](sigma2)
    return BUILTIN_FIXTURES[name]()


def cmd_msdiag(cfg, out):
    curve = _resolve_curve(cfg)
    alpha = _resolve_alpha(cfg, curve)
    fixture = cfg["fixture"]
    names = sorted(BUILTIN_FIXTURES) if fixture == "all" else [fixture]
    for name in names:
        if name not in BUILTIN_FIXTURES:
            raise CurveDomainError(
                f"unknown fixture {name!r}; pick from {sorted(BUILTIN_FIXTURES)}"
            )
    tau = float(cfg["tau"])
    n = int(cfg["n"])
    seed = int(cfg["seed"])
    sigma2 = float(cfg["sigma2"])
    rows = []
    for name in names:
        proc = _make_fixture(name, sigma2)
        check = ms_derivative_check(proc, tau, n=n, seed=seed)
        cont = check.continuity
        value = check.value if check.differentiable else math.nan
        rows.append((name, cont.continuous, check.differentiable, value))
    meta = _base_meta(cfg, curve, alpha)
    meta["tau"] = tau
    meta["n"] = n
    write_csv(out, meta,
              ["fixture", "continuous", "differentiable", "second_derivative"],
              rows)
    return 0


def _a2_provider(cfg):
    has_beta = cfg["mu"] != "" and cfg["nu"] != ""
    has_fixed = cfg["a2"] != ""
    if has_beta and has_fixed:
        raise CurveDomainError("give either mu/nu or a2, not both")
    if has_fixed:
        return FixedSquaredAmplitude(float(cfg["a2"]))
    if has_beta:
        return BetaSquaredAmplitude(float(cfg["mu"]), float(cfg["nu"]))
    raise CurveDomainError("sde needs the squared amplitude: mu/nu or a2")


def cmd_sde(cfg, out):
    curve = _resolve_curve(cfg)
    alpha = _resolve_alpha(cfg, curve)
    table = build_staircase(curve, alpha)
    a2 = _a2_provider(cfg)
    ex0 = float(cfg["ex0"])
    ex1 = float(cfg["ex1"])
    ex0sq = float(cfg["ex0sq"]) if cfg["ex0sq"] else ex0 ** 2
    ex1sq = float(cfg["ex1sq"]) if cfg["ex1sq"] else ex1 ** 2
    ex01 = float(cfg["ex01"]) if cfg["ex01"] else ex0 * ex1
    spec = MomentSpec(ex0, ex1, ex0sq, ex1sq, ex01, a2)
    order = int(cfg["order"])
    solution = solve_series(spec, order)
    a, b = curve.domain
    t = np.linspace(a, b, int(cfg["grid"]) + 1)
    j = np.asarray(table.value(t), dtype=float)
    mean = solution.mean(j)
    second = solution.second_moment(j)
    var = second - mean ** 2
    mc = mc_solution_moments(
        a2, deterministic_initial_data(ex0, ex1), int(cfg["n"]),
        int(cfg["seed"]), j,
    )
    meta = _base_meta(cfg, curve, alpha)
    meta.update({
        "a2": a2.describe(),
        "ex0": ex0, "ex1": ex1, "ex0sq": ex0sq, "ex1sq": ex1sq, "ex01": ex01,
        "order": order, "n": mc.n,
    })
    rows = zip(t, j, mean, second, var, mc.mean, mc.mean_stderr)
    write_csv(out, meta,
              ["t", "J", "mean", "second_moment", "variance", "mc_mean",
               "mc_stderr"],
              rows)
    return 0


_COMMANDS = {
    "dimension": cmd_dimension,
    "staircase": cmd_staircase,
    "cdf": cmd_cdf,
    "sample": cmd_sample,
    "correlation": cmd_correlation,
    "msdiag": cmd_msdiag,
    "sde": cmd_sde,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractalcalc",
        description="Mass, calculus, and mean-square statistics on fractal curves",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value configuration file")
        p.add_argument("--seed", type=int, help="stream seed (default 0)")
        p.add_argument("--out", help="output CSV path (default stdout)")
        p.add_argument("--curve", help="koch | line | <polyline.csv>")
        p.add_argument("--level", type=int, help="koch recursion level")
        p.add_argument("--alpha", help="auto or a positive real")
        p.add_argument("--line-a", dest="line_a", type=float,
                       help="line domain start")
        p.add_argument("--line-b", dest="line_b", type=float,
                       help="line domain end")

    p = sub.add_parser("dimension", help="dimension estimate with mass ladders")
    add_common(p)
    p.add_argument("--tol", type=float, help="bisection tolerance")

    p = sub.add_parser("staircase", help="cumulative mass table t,S")
    add_common(p)
    p.add_argument("--p0", type=float, help="staircase origin (default domain start)")
    p.add_argument("--grid", type=int, help="grid cell count")

    p = sub.add_parser("cdf", help="memoryless cdf curve t,J,F_X")
    add_common(p)
    p.add_argument("--lam", type=float, help="rate of the exponential law")
    p.add_argument("--grid", type=int, help="grid cell count")

    p = sub.add_parser("sample", help="draw points on the curve")
    add_common(p)
    p.add_argument("--family", choices=["uniform", "memoryless"])
    p.add_argument("--lam", type=float, help="memoryless rate")
    p.add_argument("--count", type=int, help="number of draws")

    p = sub.add_parser("correlation", help="correlation grid J1,J2,R,stderr")
    add_common(p)
    p.add_argument("--fixture", help="process fixture name")
    p.add_argument("--sigma2", type=float, help="fixture variance parameter")
    p.add_argument("--points", type=int, help="grid points per axis")
    p.add_argument("--n", type=int, help="realizations")

    p = sub.add_parser("msdiag", help="mean-square diagnostics verdict table")
    add_common(p)
    p.add_argument("--fixture", help="fixture name or 'all'")
    p.add_argument("--sigma2", type=float, help="fixture variance parameter")
    p.add_argument("--tau", type=float, help="index point in mass coordinate")
    p.add_argument("--n", type=int, help="realizations")

    p = sub.add_parser("sde", help="oscillator series and ensemble moments")
    add_common(p)
    p.add_argument("--mu", type=float, help="Beta mu for A^2")
    p.add_argument("--nu", type=float, help="Beta nu for A^2")
    p.add_argument("--a2", type=float, help="deterministic A^2")
    p.add_argument("--ex0", type=float, help="E[X0]")
    p.add_argument("--ex1", type=float, help="E[X1]")
    p.add_argument("--ex0sq", type=float, help="E[X0^2]")
    p.add_argument("--ex1sq", type=float, help="E[X1^2]")
    p.add_argument("--ex01", type=float, help="E[X0 X1]")
    p.add_argument("--order", type=int, help="truncation order N")
    p.add_argument("--grid", type=int, help="grid cell count")
    p.add_argument("--n", type=int, help="Monte Carlo realizations")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _effective_config(args)
        return _COMMANDS[args.command](cfg, args.out)
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FractalCalcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
