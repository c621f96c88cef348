"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 numerical-domain error,
3 sweep finished with failed points.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .. import specfun
from ..analytics import amplitude_and_fidelity, asymptotic_report, predicted_time, spectral_condition
from ..dynamics import (
    DENSE_CAP,
    NoiseSpec,
    SearchProblem,
    evolve_chebyshev,
    evolve_dense,
    find_peak,
    gamma_star,
    noisy_ensemble,
)
from ..errors import DenseCapError, MissingInputError, NumericalDomainError
from ..spectrum import ChainSpec, spectrum
from .figures import FIGURES, emit_figure_data, fmt, write_csv
from .sweep import SweepPlan, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_PARTIAL = 0, 1, 2, 3

GLOBAL_DEFAULTS = {"seed": 0, "workers": 1, "out": "lrsearch_out"}
ENV_OVERRIDES = {"workers": "LRSEARCH_WORKERS", "out": "LRSEARCH_OUT"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# ---------------------------------------------------------------- value parsers


def parse_ns(text: str) -> list[int]:
    """``64..2048`` doubles from 64 to 2048; otherwise a comma list."""
    text = str(text).strip()
    if ".." in text:
        lo, hi = (int(x) for x in text.split(".."))
        if lo < 1 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad n range {text!r}")
        out = []
        while lo <= hi:
            out.append(lo)
            lo *= 2
        return out
    return [int(x) for x in text.split(",") if x.strip()]


def parse_floats(text: str) -> list[float]:
    """Comma list, or ``start:stop:step`` with an inclusive stop."""
    text = str(text).strip()
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(x) for x in text.split(",") if x.strip()]


def load_config(path: str) -> dict:
    """JSON object, or ``key = value`` lines with ``#`` comments."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        cfg = json.loads(text)
    else:
        cfg = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line without '=': {raw!r}")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k] = v
    return {k.replace("-", "_"): v for k, v in cfg.items()}


# ---------------------------------------------------------------- parser


def _globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="key=value or JSON file; flags override it")
    p.add_argument("--seed", type=int, default=d)
    p.add_argument("--workers", type=int, default=d)
    p.add_argument("--out", default=d, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lrsearch", description="Spatial search on power-law spin rings.")
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(
        dest="command", metavar="{spectrum,analytics,search,sweep,figure}", parser_class=_Parser
    )

    sp = sub.add_parser("spectrum", help="eigenvalues as CSV")
    _globals(sp, True)
    sp.add_argument("--n", type=int)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--method", choices=["fft", "direct"])

    an = sub.add_parser("analytics", help="finite-n report as JSON")
    _globals(an, True)
    an.add_argument("--n", type=int)
    an.add_argument("--alpha", type=float)
    an.add_argument("--c", type=float, help="spectral-condition constant (default 1)")

    se = sub.add_parser("search", help="peak fidelity and trace")
    _globals(se, True)
    se.add_argument("--n", type=int)
    se.add_argument("--alpha", type=float)
    g = se.add_mutually_exclusive_group()
    g.add_argument("--gamma", type=float)
    g.add_argument("--auto-gamma", action="store_true", default=None)
    se.add_argument("--marked", type=int)
    se.add_argument("--t-max-factor", type=float)
    se.add_argument("--noise-sigma", type=float)
    se.add_argument("--realizations", type=int)
    se.add_argument("--method", choices=["dense", "chebyshev"])
    se.add_argument("--coarse-points", type=int)

    sw = sub.add_parser("sweep", help="grid of (alpha, n) records")
    _globals(sw, True)
    sw.add_argument("--alphas", type=parse_floats)
    sw.add_argument("--ns", type=parse_ns)
    sw.add_argument("--gamma", type=float)
    sw.add_argument("--noise-sigma", type=float)
    sw.add_argument("--realizations", type=int)
    sw.add_argument("--dense-cap", type=int)

    fg = sub.add_parser("figure", help="CSV data for one figure")
    _globals(fg, True)
    fg.add_argument("figure_id", choices=FIGURES)
    fg.add_argument("--alphas", type=parse_floats)
    fg.add_argument("--ns", type=parse_ns)
    fg.add_argument("--sigmas", type=parse_floats)
    fg.add_argument("--realizations", type=int)

    pr = sub.add_parser("specfun-probe")
    _globals(pr, True)
    pr.add_argument("function", choices=sorted(PROBES))
    pr.add_argument("args", nargs="*", type=float)
    return parser


PROBES = {
    "zeta": lambda s: specfun.riemann_zeta(s),
    "hurwitz": lambda s, a: specfun.hurwitz_zeta(s, a),
    "f": lambda a: specfun.f_alpha(a),
    "g0": lambda a: specfun.g0(a),
    "gm": lambda a, m: specfun.gm(a, int(m)),
    "h": lambda a, r: float(specfun.h_kernel(a, r)),
    "polylog-pair": lambda a, th: float(specfun.polylog_pair(a, th)),
    "harmonic": lambda m, s: specfun.harmonic_number(int(m), s),
}


def resolve(args: argparse.Namespace, env=None) -> argparse.Namespace:
    """Fill unset options: flags > environment > config file > defaults."""
    env = os.environ if env is None else env
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    for key, var in ENV_OVERRIDES.items():
        if var in env and getattr(args, key, None) is None:
            setattr(args, key, env[var])
    for key, value in cfg.items():
        if getattr(args, key, None) is None:
            setattr(args, key, _coerce(key, value))
    for key, value in GLOBAL_DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    args.seed, args.workers = int(args.seed), int(args.workers)
    return args


_COERCE = {
    "n": int, "alpha": float, "gamma": float, "marked": int, "t_max_factor": float,
    "noise_sigma": float, "realizations": int, "coarse_points": int, "dense_cap": int, "c": float,
    "alphas": parse_floats, "ns": parse_ns, "sigmas": parse_floats,
    "seed": int, "workers": int,
}


def _coerce(key, value):
    if key in ("alphas", "ns", "sigmas") and isinstance(value, list):
        return [_COERCE[key](str(v))[0] for v in value]
    if key == "auto_gamma":
        return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
    conv = _COERCE.get(key)
    return conv(value) if conv else value


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s) {', '.join(missing)}")


def _emit_json(obj: dict, path: Path | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(path)


# ---------------------------------------------------------------- commands


def cmd_spectrum(args) -> int:
    _require(args, "n", "alpha")
    chain = ChainSpec(args.n, args.alpha)
    spec = spectrum(chain, args.method or "fft")
    params = {"n": chain.n, "alpha": chain.alpha, "method": args.method or "fft"}
    path = Path(args.out) / f"spectrum_n{chain.n}_a{chain.alpha:g}.csv"
    rows = zip(spec.k(), spec.lam, spec.lam_tilde)
    print(write_csv(path, "spectrum", params, ["k", "lambda", "lambda_tilde"], rows))
    return EXIT_OK


def cmd_analytics(args) -> int:
    _require(args, "n", "alpha")
    chain = ChainSpec(args.n, args.alpha)
    out = asymptotic_report(chain).to_dict()
    c = args.c if args.c is not None else 1.0
    holds, margin = spectral_condition(chain, c)
    out["spectral_condition"] = {"c": c, "holds": holds, "margin": margin}
    _emit_json(out, None)
    return EXIT_OK


def cmd_search(args) -> int:
    _require(args, "n", "alpha")
    chain = ChainSpec(args.n, args.alpha)
    spec = spectrum(chain)
    gamma = args.gamma if args.gamma is not None else gamma_star(chain, spec=spec)
    method = args.method or ("dense" if chain.n <= DENSE_CAP else "chebyshev")
    w = args.marked or 1
    sigma = args.noise_sigma or 0.0
    factor = args.t_max_factor or 1.5
    points = args.coarse_points or 400
    f_inf = amplitude_and_fidelity(spec)[1]
    t_max = factor * predicted_time(chain.n, f_inf)
    times = np.linspace(0.0, t_max, points + 1)
    result = {"n": chain.n, "alpha": chain.alpha, "gamma": gamma, "method": method, "seed": args.seed}
    inputs = {**result, "marked": w, "noise_sigma": sigma, "t_max_factor": factor, "points": points}
    stem = Path(args.out) / f"search_n{chain.n}_a{chain.alpha:g}_s{sigma:g}"
    if sigma > 0:
        noise = NoiseSpec(sigma, args.realizations or 100, args.seed)
        ens = noisy_ensemble(chain, gamma, w, noise, times, method=method)
        result.update(
            t_star=ens.peak_time,
            f_star=ens.peak_fidelity,
            noise_sigma=sigma,
            realizations=noise.realizations,
            realization_peak_mean=ens.realization_peak_mean,
            realization_peak_std=ens.realization_peak_std,
        )
        cols, rows = ["t", "F_mean", "F_std"], zip(times, ens.trace.fidelities, ens.trace.std)
    else:
        problem = SearchProblem(chain, gamma, w)
        res = find_peak(problem, window_factor=factor, coarse_points=points, method=method, f_hat=f_inf)
        result.update(t_star=res.t_star, f_star=res.f_star, noise_sigma=0.0)
        if method == "dense":
            trace = evolve_dense(problem, times)
        else:
            trace = evolve_chebyshev(problem, t_max, t_max / points)
        cols, rows = ["t", "F_mean"], zip(trace.times, trace.fidelities)
    if sigma > 0:
        inputs["realizations"] = result["realizations"]
    print(write_csv(stem.parent / (stem.name + ".csv"), "search", inputs, cols, rows))
    _emit_json(result, stem.parent / (stem.name + ".json"))
    return EXIT_OK


def _sweep_plan(args, alphas, ns) -> SweepPlan:
    sigma = args.noise_sigma or 0.0
    noise = NoiseSpec(sigma, args.realizations or 100, args.seed) if sigma > 0 else None
    return SweepPlan(
        alphas=alphas,
        ns=ns,
        noise=noise,
        auto_gamma=args.gamma is None,
        gamma=args.gamma,
        dense_cap=getattr(args, "dense_cap", None) or DENSE_CAP,
        out_dir=Path(args.out) / "sweep",
        base_seed=args.seed,
        workers=args.workers,
    )


def cmd_sweep(args) -> int:
    _require(args, "alphas", "ns")
    records, errors = run_sweep(_sweep_plan(args, args.alphas, args.ns))
    for r in records:
        print(f"alpha={fmt(r.alpha)} n={r.n} t_star={fmt(r.t_star)} f_star={fmt(r.f_star)}")
    for e in errors:
        print(f"FAILED {e['key']}: {e['error']}: {e['message']}", file=sys.stderr)
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_figure(args) -> int:
    params = {}
    for key in ("alphas", "ns", "sigmas", "realizations"):
        if getattr(args, key, None) is not None:
            params[key] = getattr(args, key)
    if args.figure_id == "fig3":
        params["seed"] = args.seed
    records, errors = None, []
    if args.figure_id in ("fig1a", "fig1b"):
        from .figures import DEFAULTS

        p = {**DEFAULTS[args.figure_id], **params}
        args.gamma, args.noise_sigma, args.realizations = None, None, None
        records, errors = run_sweep(_sweep_plan(args, p["alphas"], p["ns"]))
    for e in errors:
        print(f"FAILED {e['key']}: {e['error']}: {e['message']}", file=sys.stderr)
    for path in emit_figure_data(args.figure_id, params, args.out, records):
        print(path)
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_probe(args) -> int:
    fn = PROBES[args.function]
    try:
        value = fn(*args.args)
    except TypeError as exc:
        raise UsageError(f"specfun-probe {args.function}: {exc}") from exc
    print(json.dumps({"function": args.function, "args": args.args, "value": value}))
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "analytics": cmd_analytics,
    "search": cmd_search,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
    "specfun-probe": cmd_probe,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage() + "lrsearch: error: a subcommand is required")
        resolve(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (NumericalDomainError, ArithmeticError) as exc:
        print(f"lrsearch: numerical domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (MissingInputError, DenseCapError, ValueError, OSError) as exc:
        print(f"lrsearch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
