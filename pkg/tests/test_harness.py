import json

import numpy as np
import pytest

from lrsearch.errors import MissingInputError
from lrsearch.harness import figures, sweep
from lrsearch.harness.figures import emit_figure_data, read_csv, to_float
from lrsearch.harness.sweep import (
    RECORDS_FILE,
    SweepPlan,
    fit_power_law,
    load_records,
    point_key,
    point_seed,
    run_sweep,
)


def _plan(tmp_path, **kw):
    base = dict(alphas=[1.0, 0.8], ns=[32, 16], out_dir=tmp_path, base_seed=5)
    base.update(kw)
    return SweepPlan(**base)


def test_plan_validation(tmp_path):
    with pytest.raises(ValueError):
        SweepPlan(alphas=[], ns=[16], out_dir=tmp_path)
    with pytest.raises(ValueError):
        SweepPlan(alphas=[1.0], ns=[2], out_dir=tmp_path)
    with pytest.raises(ValueError):
        SweepPlan(alphas=[1.0], ns=[16], auto_gamma=False, out_dir=tmp_path)
    p = _plan(tmp_path)
    assert p.points() == [(0.8, 16), (0.8, 32), (1.0, 16), (1.0, 32)]
    assert p.method_for(100) == "dense" and p.method_for(10**5) == "chebyshev"


def test_point_seed_is_stable():
    assert point_seed(1, 1.0, 64) == point_seed(1, 1.0, 64)
    assert point_seed(1, 1.0, 64) != point_seed(2, 1.0, 64)
    assert point_seed(1, 1.0, 64) != point_seed(1, 1.0, 128)
    assert 0 <= point_seed(7, 0.5, 10) < 2**64


def test_sweep_records_sorted_and_complete(tmp_path):
    records, errors = run_sweep(_plan(tmp_path))
    assert not errors
    assert [(r.alpha, r.n) for r in records] == [(0.8, 16), (0.8, 32), (1.0, 16), (1.0, 32)]
    for r in records:
        assert r.method == "dense" and r.f_star > 0.8 and r.t_pred > 0
        assert r.wall_time_s > 0
    lines = (tmp_path / RECORDS_FILE).read_text().splitlines()
    assert all("wall_time_s" not in line for line in lines)
    assert json.loads(lines[0])["schema_version"] == 1


def test_sweep_rerun_is_noop_and_byte_identical(tmp_path, monkeypatch):
    run_sweep(_plan(tmp_path))
    before = (tmp_path / RECORDS_FILE).read_bytes()

    def boom(*a, **k):
        raise AssertionError("recomputed a finished point")

    monkeypatch.setattr(sweep, "evaluate_point", boom)
    records, errors = run_sweep(_plan(tmp_path))
    assert not errors and len(records) == 4
    assert (tmp_path / RECORDS_FILE).read_bytes() == before


def test_sweep_resumes_after_interruption(tmp_path):
    full = tmp_path / "full"
    part = tmp_path / "part"
    run_sweep(_plan(full))
    run_sweep(_plan(part, alphas=[0.8]))  # stands in for an interrupted run
    run_sweep(_plan(part))
    assert (part / RECORDS_FILE).read_bytes() == (full / RECORDS_FILE).read_bytes()


def test_sweep_worker_count_does_not_change_output(tmp_path):
    run_sweep(_plan(tmp_path / "one", workers=1))
    run_sweep(_plan(tmp_path / "two", workers=2))
    a = (tmp_path / "one" / RECORDS_FILE).read_bytes()
    b = (tmp_path / "two" / RECORDS_FILE).read_bytes()
    assert a == b


def test_sweep_records_failures_and_continues(tmp_path, monkeypatch):
    real = sweep.evaluate_point

    def flaky(plan, alpha, n):
        if n == 32 and alpha == 1.0:
            raise FloatingPointError("synthetic failure")
        return real(plan, alpha, n)

    monkeypatch.setattr(sweep, "evaluate_point", flaky)
    records, errors = run_sweep(_plan(tmp_path))
    assert len(records) == 3
    assert errors == [
        {"key": point_key(1.0, 32), "error": "FloatingPointError", "message": "synthetic failure"}
    ]
    assert (tmp_path / sweep.ERRORS_FILE).exists()
    monkeypatch.setattr(sweep, "evaluate_point", real)
    records, errors = run_sweep(_plan(tmp_path))
    assert len(records) == 4 and not errors
    assert not (tmp_path / sweep.ERRORS_FILE).exists()


def test_noisy_sweep_is_seeded(tmp_path):
    from lrsearch.dynamics import NoiseSpec

    plan = _plan(tmp_path / "a", alphas=[1.0], ns=[32], noise=NoiseSpec(0.05, 4, 0))
    r1 = run_sweep(plan)[0][0]
    r2 = run_sweep(_plan(tmp_path / "b", alphas=[1.0], ns=[32], noise=NoiseSpec(0.05, 4, 0)))[0][0]
    assert r1.to_json() == r2.to_json()
    assert r1.seed == point_seed(5, 1.0, 32)


def test_fixed_gamma_sweep(tmp_path):
    records, _ = run_sweep(_plan(tmp_path, alphas=[1.0], ns=[16], auto_gamma=False, gamma=0.2))
    assert records[0].gamma_used == 0.2


def test_load_records_roundtrip(tmp_path):
    records, _ = run_sweep(_plan(tmp_path, alphas=[1.0], ns=[16]))
    loaded = load_records(tmp_path)
    assert loaded[records[0].key] == records[0]


def test_fit_power_law():
    xs = np.array([10, 20, 40, 80])
    a, b = fit_power_law(xs, 1.7 * xs**0.5)
    assert a == pytest.approx(1.7) and b == pytest.approx(0.5)


# ---------------------------------------------------------------- figures


def test_csv_header_and_precision(tmp_path):
    path = figures.write_csv(tmp_path / "x.csv", "demo", {"k": 1}, ["n", "f_star"], [(3, 1 / 3)])
    meta, cols, rows = read_csv(path)
    assert meta["schema_version"] == "1"
    assert meta["config_hash"] == figures.config_hash({"k": 1})
    assert "n=sites" in meta["units"]
    assert cols == ["n", "f_star"]
    assert rows == [["3", "0.33333333333333331"]]
    assert float(rows[0][1]) == 1 / 3


def test_unknown_figure(tmp_path):
    with pytest.raises(ValueError):
        emit_figure_data("fig9", None, tmp_path)


def test_fig1_requires_records(tmp_path):
    with pytest.raises(MissingInputError, match=r"alpha=1.0,n=64"):
        emit_figure_data("fig1a", {"alphas": [1.0], "ns": [64]}, tmp_path, records=[])


def test_fig1_from_sweep(tmp_path):
    records, _ = run_sweep(_plan(tmp_path / "sw"))
    params = {"alphas": [0.8, 1.0], "ns": [16, 32]}
    paths = emit_figure_data("fig1a", params, tmp_path, records)
    assert [p.name for p in paths] == ["alpha_0.8.csv", "alpha_1.csv"]
    _, cols, rows = read_csv(paths[1])
    assert cols == ["n", "t_star", "t_pred"] and len(rows) == 2
    (p,) = emit_figure_data("fig1b", {"alphas": [1.0], "ns": [16, 32]}, tmp_path, records)
    _, cols, rows = read_csv(p)
    assert cols == ["n", "inv_n", "f_star", "f_inf"]
    assert float(rows[0][1]) == 1 / 16


def test_inset_curve(tmp_path):
    (p,) = emit_figure_data("inset", None, tmp_path)
    _, cols, rows = read_csv(p)
    vals = {float(r[0]): float(r[1]) for r in rows}
    assert vals[0.5] == 1.0 and vals[1.0] == 1.0 and vals[2.0] == 0.0
    assert vals[1.25] == pytest.approx(0.5 / 0.5625, rel=1e-15)


def test_fig2_layout(tmp_path):
    params = {"alphas": [0.5, 1.0, 2.0], "ns": [2**j for j in range(4, 17)]}
    paths = emit_figure_data("fig2", params, tmp_path)
    below = {}
    for alpha, path in zip(params["alphas"], paths):
        _, cols, rows = read_csv(path)
        assert cols == ["n", "delta_exact", "delta_asym", "inv_sqrt_n"]
        d = np.array([to_float(r[1]) for r in rows])
        inv = np.array([to_float(r[3]) for r in rows])
        below[alpha] = bool(np.any(d < inv))
        if alpha == 1.0:
            assert all(r[2] == "" for r in rows)
    assert below == {0.5: False, 1.0: False, 2.0: True}


def test_fig3_noiseless_peak(tmp_path):
    paths = emit_figure_data("fig3", {"sigmas": [0.0, 0.02], "realizations": 5}, tmp_path)
    _, cols, rows = read_csv(paths[0])
    assert cols == ["t", "F_mean", "F_std"]
    assert float(rows[0][1]) == 1 / 256
    peak = max(float(r[1]) for r in rows)
    assert peak > 0.9
    _, _, noisy = read_csv(paths[1])
    assert max(float(r[1]) for r in noisy) < peak


def test_sm4_and_sm5(tmp_path):
    (p,) = emit_figure_data("sm4", {"alphas": [1.25], "ns": [1024, 4096]}, tmp_path)
    _, cols, rows = read_csv(p)
    assert cols == ["n", "s1", "s1_bar"]
    s1, s1b = float(rows[-1][1]), float(rows[-1][2])
    assert abs(s1 - s1b) / s1b < 0.1
    (p,) = emit_figure_data("sm5", {"alphas": [0.8, 1.2], "ns": [1024]}, tmp_path)
    _, cols, rows = read_csv(p)
    assert cols == ["alpha", "nu", "nu_bar"]
    assert rows[0][2] == "" and rows[1][2] != ""


def test_figures_are_deterministic(tmp_path):
    a = emit_figure_data("sm5", {"ns": [64]}, tmp_path / "a")[0].read_bytes()
    b = emit_figure_data("sm5", {"ns": [64]}, tmp_path / "b")[0].read_bytes()
    assert a == b
