import csv
import json

import numpy as np
import pytest

from so3fft.harmonics import ResourceLimitError
from so3fft.harness import (
    EquivarianceConfig,
    EquivarianceReport,
    config_digest,
    estimate_run_bytes,
    run_bench,
    run_equivariance,
    write_reports_csv,
    write_reports_jsonl,
)


def test_config_validation():
    with pytest.raises(ValueError):
        EquivarianceConfig(bandwidth=0)
    with pytest.raises(ValueError, match="layers"):
        EquivarianceConfig(bandwidth=4, layers=0)
    with pytest.raises(ValueError, match="channels"):
        EquivarianceConfig(bandwidth=4, channels=0)
    with pytest.raises(ValueError, match="trials"):
        EquivarianceConfig(bandwidth=4, trials=0)
    with pytest.raises(ValueError, match="rotation_source"):
        EquivarianceConfig(bandwidth=4, rotation_source="interpolate")


def test_config_digest_is_stable_and_discriminating():
    a = EquivarianceConfig(bandwidth=4, seed=1)
    assert config_digest(a) == config_digest(EquivarianceConfig(bandwidth=4, seed=1))
    assert config_digest(a) != config_digest(EquivarianceConfig(bandwidth=4, seed=2))
    assert len(config_digest(a)) == 12


def test_linear_spectral_pipeline_is_exactly_equivariant():
    report = run_equivariance(
        EquivarianceConfig(bandwidth=4, layers=2, channels=3, trials=4, seed=0)
    )
    assert report.delta < 1e-12
    assert len(report.trial_deltas) == 4
    assert all(d < 1e-12 for d in report.trial_deltas)


def test_runs_are_deterministic():
    cfg = EquivarianceConfig(bandwidth=4, layers=1, channels=2, trials=3, seed=7)
    a = run_equivariance(cfg)
    b = run_equivariance(cfg)
    assert a.trial_deltas == b.trial_deltas
    assert a.delta == b.delta


def test_seed_changes_the_trials():
    base = EquivarianceConfig(bandwidth=4, layers=1, channels=2, trials=3, seed=0)
    other = EquivarianceConfig(bandwidth=4, layers=1, channels=2, trials=3, seed=1)
    assert run_equivariance(base).trial_deltas != run_equivariance(other).trial_deltas


def test_relu_breaks_equivariance_measurably():
    report = run_equivariance(
        EquivarianceConfig(
            bandwidth=8, layers=1, channels=4, trials=3, with_relu=True, seed=0
        )
    )
    assert np.isfinite(report.delta)
    assert report.delta > 1e-3


def test_zero_inputs_hit_the_denominator_guard():
    report = run_equivariance(
        EquivarianceConfig(bandwidth=4, trials=2, channels=2, zero_inputs=True)
    )
    assert report.delta == 0.0
    assert report.trial_deltas == (0.0, 0.0)


def test_resampling_degrades_with_depth():
    # without any nonlinearity the only error source is the interpolating
    # rotation, which compounds through layers
    def delta_at(layers):
        return run_equivariance(
            EquivarianceConfig(
                bandwidth=4,
                layers=layers,
                channels=4,
                trials=8,
                rotation_source="resampling",
                seed=0,
            )
        ).delta

    assert delta_at(1) <= delta_at(6) * 1.25


def test_threads_do_not_change_results():
    cfg = EquivarianceConfig(bandwidth=4, layers=1, channels=2, trials=4, seed=3)
    serial = run_equivariance(cfg, threads=1)
    threaded = run_equivariance(cfg, threads=4)
    assert serial.trial_deltas == threaded.trial_deltas


def test_memory_cap_trips_before_allocation():
    huge = EquivarianceConfig(bandwidth=256, channels=64, trials=1)
    assert estimate_run_bytes(huge) > 4 << 30
    with pytest.raises(ResourceLimitError, match="cap"):
        run_equivariance(huge)


def test_report_percentiles_and_record():
    cfg = EquivarianceConfig(bandwidth=2, trials=4, channels=1)
    report = EquivarianceReport(
        config=cfg, delta=0.25, trial_deltas=(0.1, 0.2, 0.3, 0.4), seconds=1.5
    )
    assert report.delta_p50 == pytest.approx(0.25)
    assert report.delta_p95 == pytest.approx(0.385)
    record = report.to_record()
    assert record["bandwidth"] == 2
    assert record["delta"] == 0.25
    assert record["config_hash"] == config_digest(cfg)


def test_report_writers(tmp_path):
    reports = [
        run_equivariance(
            EquivarianceConfig(bandwidth=2, layers=1, channels=2, trials=2, seed=s)
        )
        for s in (0, 1)
    ]
    jl = tmp_path / "runs.jsonl"
    write_reports_jsonl(reports, jl)
    lines = jl.read_text().splitlines()
    assert len(lines) == 2
    parsed = [json.loads(line) for line in lines]
    assert parsed[0]["seed"] == 0 and parsed[1]["seed"] == 1

    cv = tmp_path / "runs.csv"
    write_reports_csv(reports, cv)
    with open(cv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert float(rows[0]["delta"]) == reports[0].delta

    with pytest.raises(ValueError, match="no reports"):
        write_reports_csv([], tmp_path / "empty.csv")


def test_bench_shape_and_validation():
    records = run_bench([2, 4], kind="s2", repetitions=2)
    assert len(records) == 8  # 2 bandwidths x {forward,inverse} x {fast,direct}
    for record in records:
        assert record["seconds"] is None or record["seconds"] > 0.0
    with pytest.raises(ValueError, match="kind"):
        run_bench([2], kind="torus")
    with pytest.raises(ValueError, match="repetitions"):
        run_bench([2], repetitions=0)


def test_bench_skips_direct_above_cap():
    records = run_bench([64], kind="so3", repetitions=1)
    fast = [r for r in records if r["path"] == "fast"]
    direct = [r for r in records if r["path"] == "direct"]
    assert all(r["seconds"] is not None for r in fast)
    assert all(r["seconds"] is None and "skipped" in r["note"] for r in direct)
