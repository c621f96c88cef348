"""CSV emission for each plotted curve.

Every file opens with ``#`` comment lines carrying the schema version, a hash
of the generating configuration and the column units, followed by a plain
CSV header row.  Floats are written with 17 significant digits.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from ..analytics import (
    amplitude_and_fidelity,
    inset_value,
    nu_bar,
    predicted_time,
    s_q,
    s_q_bar,
)
from ..dynamics import NoiseSpec, SearchProblem, evolve_dense, gamma_star, noisy_ensemble
from ..errors import MissingInputError, NumericalDomainError
from ..spectrum import ChainSpec, gap_asymptotic, spectral_gap_exact, spectrum
from .sweep import SCHEMA_VERSION, SweepRecord, point_key

FIGURES = ("fig1a", "fig1b", "inset", "fig2", "fig3", "sm4", "sm5")

DEFAULTS = {
    "fig1a": {"alphas": [0.8, 1.0, 1.2], "ns": [64, 128, 256, 512, 1024, 2048]},
    "fig1b": {"alphas": [0.8, 1.0, 1.2], "ns": [64, 128, 256, 512, 1024, 2048]},
    "inset": {"alphas": [round(0.01 * i, 2) for i in range(0, 301)]},
    "fig2": {"alphas": [0.5, 1.0, 1.2, 1.4, 1.6, 2.0], "ns": [2**j for j in range(4, 21)]},
    "fig3": {"n": 256, "alpha": 1.0, "sigmas": [0.0, 0.01, 0.02, 0.05], "realizations": 100,
             "seed": 0, "t_max_factor": 1.5, "points": 600},
    "sm4": {"alphas": [1.2, 1.4, 1.6, 1.8], "ns": [2**j for j in range(6, 15)]},
    "sm5": {"alphas": [round(1.02 + 0.02 * i, 2) for i in range(24)], "ns": [256, 1024, 4096]},
}

UNITS = {
    "n": "sites",
    "inv_n": "1/sites",
    "alpha": "dimensionless",
    "t": "inverse marking-field units",
    "t_star": "inverse marking-field units",
    "t_pred": "inverse marking-field units",
    "F_mean": "probability",
    "F_std": "probability",
    "f_star": "probability",
    "f_inf": "probability",
    "f_inf_bar_limit": "probability",
    "source": "label",
    "delta_exact": "rescaled energy",
    "delta_asym": "rescaled energy",
    "inv_sqrt_n": "rescaled energy",
    "s1": "dimensionless",
    "s1_bar": "dimensionless",
    "nu": "dimensionless",
    "nu_bar": "dimensionless",
}


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def config_hash(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_csv(path: Path, figure: str, params: dict, columns: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# lrsearch figure data: {figure}\n")
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        fh.write(f"# config_hash: {config_hash(params)}\n")
        fh.write(f"# params: {json.dumps(params, sort_keys=True, default=str)}\n")
        fh.write("# units: " + ", ".join(f"{c}={UNITS.get(c, '-')}" for c in columns) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _safe(fn, *args):
    try:
        return fn(*args)
    except (NumericalDomainError, ArithmeticError):
        return None


def _need_records(records, alphas, ns) -> dict[str, SweepRecord]:
    have = {r.key: r for r in (records or [])}
    missing = [point_key(a, n) for a in alphas for n in ns if point_key(a, n) not in have]
    if missing:
        raise MissingInputError(f"missing sweep records: {', '.join(missing)}")
    return have


def _tag(alpha: float) -> str:
    return f"{float(alpha):g}"


def emit_figure_data(
    figure_id: str, params: dict | None, out_dir, records: list[SweepRecord] | None = None
) -> list[Path]:
    """Write the CSV files for one figure and return their paths.

    ``fig1a`` and ``fig1b`` read sweep records; the remaining figures are
    computed directly from spectra, analytics or dynamics.
    """
    if figure_id not in FIGURES:
        raise ValueError(f"unknown figure {figure_id!r}; choose from {', '.join(FIGURES)}")
    p = {**DEFAULTS[figure_id], **(params or {})}
    out = Path(out_dir) / figure_id
    return _EMITTERS[figure_id](p, out, records)


def _fig1a(p, out, records):
    have = _need_records(records, p["alphas"], p["ns"])
    paths = []
    for a in p["alphas"]:
        rows = [(n, have[point_key(a, n)].t_star, have[point_key(a, n)].t_pred) for n in p["ns"]]
        paths.append(write_csv(out / f"alpha_{_tag(a)}.csv", "fig1a", p, ["n", "t_star", "t_pred"], rows))
    return paths


def _fig1b(p, out, records):
    have = _need_records(records, p["alphas"], p["ns"])
    paths = []
    for a in p["alphas"]:
        rows = []
        for n in p["ns"]:
            r = have[point_key(a, n)]
            rows.append((n, 1.0 / n, r.f_star, r.f_inf))
        paths.append(
            write_csv(out / f"alpha_{_tag(a)}.csv", "fig1b", p, ["n", "inv_n", "f_star", "f_inf"], rows)
        )
    return paths


def _inset(p, out, records):
    rows = [(a, *inset_value(a)) for a in p["alphas"]]
    return [write_csv(out / "inset.csv", "inset", p, ["alpha", "f_inf_bar_limit", "source"], rows)]


def _fig2(p, out, records):
    paths = []
    for a in p["alphas"]:
        rows = []
        for n in p["ns"]:
            chain = ChainSpec(n, a)
            rows.append((n, spectral_gap_exact(spectrum(chain)), _safe(gap_asymptotic, chain), n**-0.5))
        cols = ["n", "delta_exact", "delta_asym", "inv_sqrt_n"]
        paths.append(write_csv(out / f"alpha_{_tag(a)}.csv", "fig2", p, cols, rows))
    return paths


def _fig3(p, out, records):
    chain = ChainSpec(int(p["n"]), float(p["alpha"]))
    spec = spectrum(chain)
    gamma = gamma_star(chain, spec=spec)
    f_inf = amplitude_and_fidelity(spec)[1]
    times = np.linspace(0.0, p["t_max_factor"] * predicted_time(chain.n, f_inf), int(p["points"]) + 1)
    paths = []
    for s in p["sigmas"]:
        if s == 0:
            trace = evolve_dense(SearchProblem(chain, gamma), times)
            mean, std = trace.fidelities, np.zeros_like(times)
        else:
            ens = noisy_ensemble(chain, gamma, 1, NoiseSpec(s, int(p["realizations"]), int(p["seed"])), times)
            mean, std = ens.trace.fidelities, ens.trace.std
        rows = zip(times, mean, std)
        paths.append(write_csv(out / f"sigma_{_tag(s)}.csv", "fig3", p, ["t", "F_mean", "F_std"], rows))
    return paths


def _sm4(p, out, records):
    paths = []
    for a in p["alphas"]:
        rows = []
        for n in p["ns"]:
            chain = ChainSpec(n, a)
            rows.append((n, s_q(spectrum(chain), 1), _safe(s_q_bar, chain, 1)))
        paths.append(write_csv(out / f"alpha_{_tag(a)}.csv", "sm4", p, ["n", "s1", "s1_bar"], rows))
    return paths


def _sm5(p, out, records):
    paths = []
    for n in p["ns"]:
        rows = []
        for a in p["alphas"]:
            chain = ChainSpec(n, a)
            nu = amplitude_and_fidelity(spectrum(chain))[0]
            rows.append((a, nu, _safe(nu_bar, chain)))
        paths.append(write_csv(out / f"n_{n}.csv", "sm5", p, ["alpha", "nu", "nu_bar"], rows))
    return paths


_EMITTERS = {
    "fig1a": _fig1a,
    "fig1b": _fig1b,
    "inset": _inset,
    "fig2": _fig2,
    "fig3": _fig3,
    "sm4": _sm4,
    "sm5": _sm5,
}


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """Parse a file written by :func:`write_csv` into (meta, columns, rows)."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# ") and ": " in line:
            k, v = line[2:].split(": ", 1)
            meta[k] = v
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def to_float(cell: str) -> float:
    return math.nan if cell == "" else float(cell)
