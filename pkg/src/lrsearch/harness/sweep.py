"""Parameter sweeps with a resumable flat-file record store."""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..analytics import asymptotic_report, predicted_time
from ..dynamics import (
    DENSE_CAP,
    NoiseSpec,
    SearchProblem,
    find_peak,
    gamma_star,
    noisy_ensemble,
)
from ..spectrum import ChainSpec, spectrum

SCHEMA_VERSION = 1
RECORDS_FILE = "records.jsonl"
ERRORS_FILE = "errors.jsonl"
TIMINGS_FILE = "timings.jsonl"


@dataclass
class SweepPlan:
    alphas: list[float]
    ns: list[int]
    noise: NoiseSpec | None = None
    auto_gamma: bool = True
    gamma: float | None = None
    dense_cap: int = DENSE_CAP
    out_dir: Path = Path("lrsearch_out")
    base_seed: int = 0
    workers: int = 1
    window_factor: float = 1.5
    coarse_points: int = 400

    def __post_init__(self):
        if not self.alphas or not self.ns:
            raise ValueError("alphas and ns must be non-empty")
        if any(int(n) != n or n < 3 for n in self.ns):
            raise ValueError("every n must be an integer >= 3")
        if not self.auto_gamma and not (self.gamma and self.gamma > 0):
            raise ValueError("a positive gamma is required when auto_gamma is off")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        self.alphas = sorted({float(a) for a in self.alphas})
        self.ns = sorted({int(n) for n in self.ns})
        self.out_dir = Path(self.out_dir)

    def points(self) -> list[tuple[float, int]]:
        return [(a, n) for a in self.alphas for n in self.ns]

    def method_for(self, n: int) -> str:
        return "dense" if n <= self.dense_cap else "chebyshev"


@dataclass
class SweepRecord:
    n: int
    alpha: float
    gamma_used: float
    t_star: float
    f_star: float
    delta_exact: float
    delta_asym: float | None
    s1: float
    s2: float
    nu: float
    f_inf: float
    f_inf_bar: float | None
    t_pred: float
    method: str
    seed: int
    wall_time_s: float = field(default=0.0, compare=False)

    @property
    def key(self) -> str:
        return point_key(self.alpha, self.n)

    def to_json(self) -> str:
        """Deterministic serialisation; wall time lives in a separate file."""
        d = asdict(self)
        d.pop("wall_time_s")
        d["schema_version"] = SCHEMA_VERSION
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> SweepRecord:
        d = json.loads(line)
        d.pop("schema_version", None)
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def point_key(alpha: float, n: int) -> str:
    return f"alpha={float(alpha)!r},n={int(n)}"


def point_seed(base_seed: int, alpha: float, n: int) -> int:
    """64-bit seed fixed by the base seed and the grid point alone."""
    digest = hashlib.sha256(point_key(alpha, n).encode()).digest()
    words = [base_seed & 0xFFFFFFFFFFFFFFFF, int.from_bytes(digest[:8], "little")]
    return int(np.random.SeedSequence(words).generate_state(1, np.uint64)[0])


def evaluate_point(plan: SweepPlan, alpha: float, n: int) -> SweepRecord:
    start = time.perf_counter()
    chain = ChainSpec(n, alpha)
    spec = spectrum(chain)
    report = asymptotic_report(chain, spec)
    gamma = gamma_star(chain, spec=spec) if plan.auto_gamma else float(plan.gamma)
    method = plan.method_for(n)
    seed = point_seed(plan.base_seed, alpha, n)
    if plan.noise is None or plan.noise.sigma == 0:
        res = find_peak(
            SearchProblem(chain, gamma),
            window_factor=plan.window_factor,
            coarse_points=plan.coarse_points,
            method=method,
            f_hat=report.f_inf,
        )
        t_star, f_star = res.t_star, res.f_star
    else:
        noise = NoiseSpec(plan.noise.sigma, plan.noise.realizations, seed)
        t_max = plan.window_factor * predicted_time(n, report.f_inf)
        times = np.linspace(0.0, t_max, plan.coarse_points + 1)
        ens = noisy_ensemble(chain, gamma, 1, noise, times, method=method)
        t_star, f_star = ens.peak_time, ens.peak_fidelity
    return SweepRecord(
        n=n,
        alpha=alpha,
        gamma_used=gamma,
        t_star=t_star,
        f_star=f_star,
        delta_exact=report.delta_exact,
        delta_asym=report.delta_asym,
        s1=report.s1,
        s2=report.s2,
        nu=report.nu,
        f_inf=report.f_inf,
        f_inf_bar=report.f_inf_bar,
        t_pred=report.t_pred,
        method=method,
        seed=seed,
        wall_time_s=time.perf_counter() - start,
    )


def _safe_evaluate(plan, alpha, n):
    try:
        return evaluate_point(plan, alpha, n), None
    except Exception as exc:  # recorded per point; the sweep carries on
        return None, {"key": point_key(alpha, n), "error": type(exc).__name__, "message": str(exc)}


def load_records(out_dir: Path) -> dict[str, SweepRecord]:
    path = Path(out_dir) / RECORDS_FILE
    if not path.exists():
        return {}
    recs = {}
    for line in path.read_text().splitlines():
        if line.strip():
            r = SweepRecord.from_json(line)
            recs[r.key] = r
    return recs


def _sorted(records) -> list[SweepRecord]:
    return sorted(records, key=lambda r: (r.alpha, r.n))


def _rewrite(path: Path, lines: list[str]) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("".join(line + "\n" for line in lines))
    os.replace(tmp, path)


def run_sweep(plan: SweepPlan) -> tuple[list[SweepRecord], list[dict]]:
    """Evaluate every grid point not already on disk; return (records, errors).

    Records are appended one line at a time as points finish, so an
    interrupted sweep keeps its progress; at the end the store is rewritten
    sorted by (alpha, n) so the final file does not depend on scheduling.
    """
    out = plan.out_dir
    out.mkdir(parents=True, exist_ok=True)
    store = out / RECORDS_FILE
    done = load_records(out)
    todo = [(a, n) for a, n in plan.points() if point_key(a, n) not in done]
    errors = []

    def accept(rec, err):
        if err is not None:
            errors.append(err)
            return
        done[rec.key] = rec
        with store.open("a") as fh:
            fh.write(rec.to_json() + "\n")
        with (out / TIMINGS_FILE).open("a") as fh:
            fh.write(json.dumps({"key": rec.key, "wall_time_s": rec.wall_time_s}) + "\n")

    if plan.workers == 1 or len(todo) <= 1:
        for a, n in todo:
            accept(*_safe_evaluate(plan, a, n))
    else:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            futures = [pool.submit(_safe_evaluate, plan, a, n) for a, n in todo]
            for fut in as_completed(futures):
                accept(*fut.result())

    records = _sorted(done.values())
    _rewrite(store, [r.to_json() for r in records])
    errors.sort(key=lambda e: e["key"])
    err_path = out / ERRORS_FILE
    if errors:
        _rewrite(err_path, [json.dumps(e, sort_keys=True) for e in errors])
    elif err_path.exists():
        err_path.unlink()
    wanted = {point_key(a, n) for a, n in plan.points()}
    return [r for r in records if r.key in wanted], errors


def fit_power_law(xs, ys) -> tuple[float, float]:
    """Least-squares ``y = a x^b`` in log-log space; returns (a, b)."""
    b, log_a = np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)
    return math.exp(log_a), float(b)
