"""Command-line interface: ``deepwh factors|density|simulate|verify``.

Numeric output uses the shortest round-trip float representation, ``\\n``
line endings and ``#`` metadata lines only at the head of the file, so seeded
runs are byte-reproducible. Exit codes: 0 success, 1 failed identity, 2 usage
or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import densities as dens
from . import factorisation as fac
from . import stable_sim as sim
from . import verify as ver
from .errors import DeepWHError, DomainError, RegimeError
from .params import StableParams

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

FACTOR_FUNCS = {
    "kappa_inv": fac.kappa_inv,
    "kappa_hat_inv": fac.kappa_hat_inv,
    "kappa": fac.kappa,
    "kappa_hat": fac.kappa_hat,
}
DENSITIES = ("closest", "furthest", "stationary", "phi", "phi_bar")
FUNCTIONALS = ("closest", "furthest", "reflected", "avoid")

# hard defaults, applied after the config file and the flags
DEFAULTS = {
    "rho": 0.5,
    "which": None,
    "x": None,
    "n": 1000,
    "dt": 1e-3,
    "seed": 0,
    "workers": None,
    "r_stop": 50.0,
    "eps_abs": 1e-3,
    "t_max": None,
    "format": "csv",
    "out": None,
}


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def parse_grid(spec: str) -> list[float]:
    """``a,b,c`` list or inclusive ``start:stop:step`` range."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid range must be start:stop:step, got {spec!r}")
        start, stop, step = (float(s) for s in parts)
        if not step > 0 or stop < start:
            raise UsageError(f"bad grid range {spec!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        # round away the accumulated representation error of start + k*step
        return [round(start + k * step, 12) for k in range(n)]
    try:
        return [float(s) for s in spec.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad grid {spec!r}") from None


def read_config(path: str | None) -> dict:
    """Flat ``key=value`` file with ``#`` comments; keys may use dashes or underscores."""
    if path is None:
        return {}
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _merge(args: argparse.Namespace, keys: dict[str, type]) -> dict:
    """Flags override the config file, which overrides the defaults."""
    file_cfg = read_config(getattr(args, "config", None))
    unknown = set(file_cfg) - set(keys)
    if unknown:
        raise UsageError(f"unknown config keys for {args.command}: {', '.join(sorted(unknown))}")
    out = {}
    for key, typ in keys.items():
        val = getattr(args, key, None)
        if val is None and key in file_cfg:
            try:
                val = typ(file_cfg[key])
            except ValueError:
                raise UsageError(f"config key {key}: cannot parse {file_cfg[key]!r}") from None
        if val is None:
            val = DEFAULTS.get(key)
        out[key] = val
    return out


def _params(cfg) -> StableParams:
    if cfg.get("alpha") is None:
        raise UsageError("--alpha is required")
    return StableParams(cfg["alpha"], cfg["rho"])


def _grid(cfg) -> list[float]:
    spec = cfg.get("grid") or cfg.get("lambda")
    if spec is None:
        raise UsageError("a --grid (or --lambda) is required")
    return parse_grid(str(spec))


def _table(columns, rows, meta: list[tuple[str, object]], form: str) -> str:
    if form == "json":
        doc = {"meta": {k: _jsonable(v) for k, v in meta},
               "rows": [{c: _jsonable(v) for c, v in zip(columns, r)} for r in rows]}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    for k, v in meta:
        buf.write(f"# {k}={fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Commands

FACTOR_KEYS = {"alpha": float, "rho": float, "which": str, "lambda": str, "grid": str, "format": str, "out": str}


def cmd_factors(args) -> int:
    cfg = _merge(args, FACTOR_KEYS)
    p = _params(cfg)
    which = cfg["which"] or "kappa_inv"
    if which not in FACTOR_FUNCS:
        raise UsageError(f"--which must be one of {', '.join(FACTOR_FUNCS)}")
    fn = FACTOR_FUNCS[which]
    rows = []
    for lam in _grid(cfg):
        try:
            m = fn(lam, p)
        except DeepWHError as exc:
            raise DomainError(f"lambda={lam!r}: {exc}") from None
        rows.append([lam, m[0, 0], m[0, 1], m[1, 0], m[1, 1]])
    meta = [("command", "factors"), ("which", which), ("alpha", p.alpha), ("rho", p.rho)]
    _emit(_table(["lambda", "m_pp", "m_pm", "m_mp", "m_mm"], rows, meta, cfg["format"]), cfg["out"])
    return EXIT_OK


DENSITY_KEYS = {"alpha": float, "rho": float, "which": str, "x": float, "grid": str, "format": str, "out": str}


def cmd_density(args) -> int:
    cfg = _merge(args, DENSITY_KEYS)
    p = _params(cfg)
    which = cfg["which"]
    if which not in DENSITIES:
        raise UsageError(f"--which must be one of {', '.join(DENSITIES)}")
    x = cfg["x"] if cfg["x"] is not None else 1.0
    if which == "closest":
        fn = lambda t: dens.closest_reach_density(t, x, p)
    elif which == "furthest":
        fn = lambda t: dens.furthest_reach_density(t, x, p)
    elif which == "stationary":
        fn = lambda t: dens.stationary_density(t, p)
    elif which == "phi":
        fn = lambda t: dens.phi_avoid(t, p)
    else:
        fn = lambda t: dens.phi_bar(t, p)
    rows = []
    for t in _grid(cfg):
        try:
            rows.append([t, float(fn(t)), ""])
        except DeepWHError as exc:
            # regime mismatches are fatal, support problems skip the row
            if isinstance(exc, RegimeError):
                raise
            rows.append([t, "", f"{type(exc).__name__}: {exc}"])
    meta = [("command", "density"), ("which", which), ("alpha", p.alpha), ("rho", p.rho)]
    if which in ("closest", "furthest"):
        meta.append(("x", x))
    _emit(_table(["point", "density", "warning"], rows, meta, cfg["format"]), cfg["out"])
    return EXIT_OK


SIM_KEYS = {
    "alpha": float, "rho": float, "functional": str, "x": float, "n": int, "dt": float, "seed": int,
    "workers": int, "r_stop": float, "eps_abs": float, "t_max": float, "format": str, "out": str,
}


def cmd_simulate(args) -> int:
    cfg = _merge(args, SIM_KEYS)
    p = _params(cfg)
    functional = cfg["functional"]
    if functional not in FUNCTIONALS:
        raise UsageError(f"--functional must be one of {', '.join(FUNCTIONALS)}")
    t_max = cfg["t_max"]
    if t_max is None:
        t_max = 1000.0 if functional == "reflected" else math.inf
    mc = sim.McConfig(
        n_paths=cfg["n"], dt=cfg["dt"], r_stop=cfg["r_stop"], eps_abs=cfg["eps_abs"], t_max=t_max,
        seed=cfg["seed"], workers=cfg["workers"] or sim.default_workers(),
    )
    extra = []
    if functional == "closest":
        x = cfg["x"] if cfg["x"] is not None else 1.0
        ss = sim.closest_reach_mc(x, p, mc)
    elif functional == "furthest":
        x = cfg["x"] if cfg["x"] is not None else 1.0
        ss = sim.furthest_reach_mc(x, p, mc)
    elif functional == "reflected":
        x = cfg["x"] if cfg["x"] is not None else 0.5
        ss = sim.reflected_stationary_mc(p, mc, x)
    else:
        x = cfg["x"] if cfg["x"] is not None else 2.0
        ss = sim.avoid_strip_samples(x, p, mc)
        est = sim.avoid_estimate(ss)
        extra = [("estimate", est.estimate), ("ci_low", est.ci_low), ("ci_high", est.ci_high),
                 ("ci_level", est.level), ("phi_avoid", dens.phi_avoid(x, p))]
    meta = [("command", "simulate")] + list(ss.meta.items())
    meta += [(k, v) for k, v in (("r_stop", mc.r_stop), ("eps_abs", mc.eps_abs), ("t_max", mc.t_max))
             if k not in ss.meta]
    meta += extra
    rows = [[int(i), v, r, int(s)] for i, v, r, s in zip(ss.path_index, ss.values, ss.stop_reason, ss.steps)]
    _emit(_table(["path_index", "value", "stop_reason", "steps"], rows, meta, cfg["format"]), cfg["out"])
    return EXIT_OK


def cmd_verify(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.n is not None:
        overrides["n"] = args.n
    try:
        reports = ver.run_suite(args.suite, args.config, overrides=overrides,
                                progress=lambda r: print(r.summary_line(), file=sys.stderr, flush=True))
    except OSError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    stem = out / f"verify_{args.suite}"
    with open(f"{stem}.json", "w", newline="") as fh:
        fh.write(ver.reports_to_json(reports))
    with open(f"{stem}.csv", "w", newline="") as fh:
        fh.write(ver.reports_to_csv(reports))
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} reports passed; wrote {stem}.json and {stem}.csv")
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_common(sp, *, grid=True):
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--rho", type=float)
    if grid:
        sp.add_argument("--grid", help="comma list or inclusive start:stop:step")
    sp.add_argument("--out", help="output file (default stdout)")
    sp.add_argument("--format", choices=("csv", "json"))
    sp.add_argument("--config", help="key=value file; flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="deepwh", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("factors", help="inverse Wiener-Hopf factor matrices on a lambda grid")
    _add_common(sp)
    sp.add_argument("--lambda", dest="lambda", help="lambda value(s), same syntax as --grid")
    sp.add_argument("--which", choices=tuple(FACTOR_FUNCS))
    sp.set_defaults(func=cmd_factors)

    sp = sub.add_parser("density", help="closed-form fluctuation densities on a grid")
    _add_common(sp)
    sp.add_argument("--which", choices=DENSITIES)
    sp.add_argument("--x", type=float, help="start point for reach densities (default 1)")
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("simulate", help="Monte Carlo samples of a fluctuation functional")
    _add_common(sp, grid=False)
    sp.add_argument("--functional", choices=FUNCTIONALS)
    sp.add_argument("--x", type=float, help="start point")
    sp.add_argument("--n", type=int, help="number of paths")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--r-stop", dest="r_stop", type=float)
    sp.add_argument("--eps-abs", dest="eps_abs", type=float)
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run an identity-verification suite")
    sp.add_argument("--suite", required=True, choices=ver.SUITES)
    sp.add_argument("--config", help="suite key=value file")
    sp.add_argument("--out", help="directory for verify_<suite>.json/.csv (default .)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--n", type=int)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        ap.error(str(exc))
    except DeepWHError as exc:
        print(f"deepwh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
