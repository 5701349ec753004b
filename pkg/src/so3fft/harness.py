"""Equivariance-error experiment and fast-vs-direct timing harness.

The experiment builds a stack of rotation-group correlation layers with
seeded random bandlimited filters, pushes random bandlimited inputs
through it, and measures how far "rotate then apply" drifts from "apply
then rotate":

    delta = mean_i  std(L_{R_i} Phi(f_i) - Phi(L_{R_i} f_i)) / std(Phi(f_i))

With linear layers and everything bandlimited this is roundoff; with a
pointwise ReLU in the stack the aliasing it introduces makes delta a real
number worth tracking as a regression baseline.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ._parallel import parallel_map, resolve_threads
from .correlation import (
    make_correlation_plan,
    multichannel_correlate,
    relu_spatial,
    rotate_so3_spectral,
)
from .gft import (
    S2Signal,
    SO3Signal,
    bandlimit_so3,
    s2_dft_forward,
    s2_dft_inverse,
    s2_fft_forward,
    s2_fft_inverse,
    so3_coefficient_count,
    so3_dft_forward,
    so3_dft_inverse,
    so3_fft_forward,
    so3_fft_inverse,
)
from .grids import random_rotation, validate_bandwidth
from .harmonics import ResourceLimitError, cached_tables, estimate_table_bytes
from .oracle import rotate_so3_by_resampling

__all__ = [
    "DIRECT_BENCH_CAPS",
    "HARNESS_MEMORY_CAP",
    "EquivarianceConfig",
    "EquivarianceReport",
    "config_digest",
    "estimate_run_bytes",
    "run_bench",
    "run_equivariance",
    "write_reports_csv",
    "write_reports_jsonl",
]

HARNESS_MEMORY_CAP = 4 << 30
DIRECT_BENCH_CAPS = {"s2": 64, "so3": 32}

_ROTATION_SOURCES = ("spectral", "resampling")
_STD_FLOOR = 1e-30


@dataclass(frozen=True)
class EquivarianceConfig:
    bandwidth: int
    layers: int = 1
    channels: int = 10
    trials: int = 20
    with_relu: bool = False
    rotation_source: str = "spectral"
    seed: int = 0
    # diagnostic mode: all-zero inputs exercise the std(Phi(f)) = 0 guard
    zero_inputs: bool = False

    def __post_init__(self) -> None:
        validate_bandwidth(self.bandwidth)
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if self.channels < 1:
            raise ValueError(f"channels must be >= 1, got {self.channels}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.rotation_source not in _ROTATION_SOURCES:
            raise ValueError(
                f"rotation_source must be one of {_ROTATION_SOURCES}, "
                f"got {self.rotation_source!r}"
            )


def config_digest(config: EquivarianceConfig) -> str:
    blob = json.dumps(asdict(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class EquivarianceReport:
    config: EquivarianceConfig
    delta: float
    trial_deltas: tuple[float, ...]
    seconds: float
    delta_p50: float = field(init=False)
    delta_p95: float = field(init=False)

    def __post_init__(self) -> None:
        self.delta_p50 = float(np.percentile(self.trial_deltas, 50))
        self.delta_p95 = float(np.percentile(self.trial_deltas, 95))

    def to_record(self) -> dict:
        cfg = self.config
        return {
            "config_hash": config_digest(cfg),
            "bandwidth": cfg.bandwidth,
            "layers": cfg.layers,
            "channels": cfg.channels,
            "trials": cfg.trials,
            "relu": cfg.with_relu,
            "rotation": cfg.rotation_source,
            "seed": cfg.seed,
            "delta": self.delta,
            "delta_p50": self.delta_p50,
            "delta_p95": self.delta_p95,
            "seconds": self.seconds,
        }


def estimate_run_bytes(config: EquivarianceConfig) -> int:
    """Rough peak-memory estimate for run_equivariance, checked up front."""
    n = 2 * config.bandwidth
    k = config.channels
    tables = estimate_table_bytes(config.bandwidth)
    banks = config.layers * k * k * so3_coefficient_count(config.bandwidth) * 16
    # a trial keeps a handful of K-channel grids plus their complex FFT
    # workspace alive at once; 12 real copies is a generous envelope
    working = 12 * k * n**3 * 8
    # the widest transform is the bank's own forward pass
    working += 3 * k * k * n**3 * 16
    return tables + banks + working


def run_equivariance(
    config: EquivarianceConfig, threads: int | None = None
) -> EquivarianceReport:
    """Run the rotate-vs-apply experiment; deterministic for a given seed."""
    estimate = estimate_run_bytes(config)
    if estimate > HARNESS_MEMORY_CAP:
        raise ResourceLimitError(
            f"estimated working set {estimate} bytes exceeds the "
            f"{HARNESS_MEMORY_CAP} byte harness cap"
        )

    b = config.bandwidth
    k = config.channels
    n = 2 * b
    tables = cached_tables(b)
    plan = make_correlation_plan(b)

    filter_rng = np.random.default_rng((config.seed, 0, 0))
    banks = []
    for _ in range(config.layers):
        raw = SO3Signal(b, filter_rng.standard_normal((k * k, n, n, n)))
        # keeping the spectrum IS the bandlimited filter; transforming the
        # bank once here instead of once per trial dominates the runtime
        spec = so3_fft_forward(raw, tables)
        # flatten each degree to unit RMS: the transform of white grid noise
        # is colored, and without this every layer low-passes the stack a
        # little more, which drags the ReLU drift DOWN with depth instead of
        # keeping it flat
        for l in range(b):
            blk = spec.blocks(l)
            rms = np.sqrt(np.mean(np.abs(blk) ** 2))
            if rms > 0.0:
                blk /= rms
        banks.append(spec)

    if config.rotation_source == "spectral":
        def rotate(sig, rot):
            return rotate_so3_spectral(sig, rot, tables)
    else:
        def rotate(sig, rot):
            return rotate_so3_by_resampling(sig, rot)

    def pipeline(sig: SO3Signal) -> SO3Signal:
        for bank in banks:
            sig = multichannel_correlate(bank, sig, plan, out_channels=k)
            if config.with_relu:
                sig = relu_spatial(sig)
        return sig

    def one_trial(i: int) -> float:
        rng = np.random.default_rng((config.seed, 1, i))
        raw = (
            np.zeros((k, n, n, n))
            if config.zero_inputs
            else rng.standard_normal((k, n, n, n))
        )
        f = bandlimit_so3(SO3Signal(b, raw), tables)
        rot = random_rotation(rng)
        applied = pipeline(f)
        applied_after_rotate = pipeline(rotate(f, rot))
        rotated_after_apply = rotate(applied, rot)
        denom = float(np.std(applied.samples))
        if denom < _STD_FLOOR:
            return 0.0
        err = np.std(rotated_after_apply.samples - applied_after_rotate.samples)
        return float(err) / denom

    start = time.perf_counter()
    deltas = parallel_map(one_trial, range(config.trials), resolve_threads(threads))
    seconds = time.perf_counter() - start
    return EquivarianceReport(
        config=config,
        delta=float(np.mean(deltas)),
        trial_deltas=tuple(deltas),
        seconds=seconds,
    )


def write_reports_jsonl(reports, path) -> None:
    """One JSON record per line, one line per report."""
    with open(path, "w", encoding="utf-8") as fh:
        for report in reports:
            fh.write(json.dumps(report.to_record(), sort_keys=True))
            fh.write("\n")


def write_reports_csv(reports, path) -> None:
    """Flat plot-ready table, one row per report."""
    records = [report.to_record() for report in reports]
    if not records:
        raise ValueError("no reports to write")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(records[0]))
        writer.writeheader()
        writer.writerows(records)


def _median_seconds(fn, repetitions: int) -> float:
    fn()  # warmup, outside the clock
    times = []
    for _ in range(repetitions):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def run_bench(bandwidths, kind: str = "so3", repetitions: int = 5) -> list[dict]:
    """Median wall-clock of fast vs. dense-direct transform paths.

    The direct path is skipped (with a note) above its cost cap so a sweep
    over large bandwidths stays bounded.
    """
    if kind not in DIRECT_BENCH_CAPS:
        raise ValueError(f"kind must be 's2' or 'so3', got {kind!r}")
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")

    if kind == "s2":
        fast_fwd, fast_inv = s2_fft_forward, s2_fft_inverse
        direct_fwd, direct_inv = s2_dft_forward, s2_dft_inverse
    else:
        fast_fwd, fast_inv = so3_fft_forward, so3_fft_inverse
        direct_fwd, direct_inv = so3_dft_forward, so3_dft_inverse
    cap = DIRECT_BENCH_CAPS[kind]

    records = []
    for b in bandwidths:
        validate_bandwidth(b)
        tables = cached_tables(b)
        n = 2 * b
        shape = (1, n, n) if kind == "s2" else (1, n, n, n)
        rng = np.random.default_rng((2718, b))
        sig = (S2Signal if kind == "s2" else SO3Signal)(
            b, rng.standard_normal(shape)
        )
        spec = fast_fwd(sig, tables)

        plans = [
            ("forward", "fast", lambda: fast_fwd(sig, tables), False),
            ("inverse", "fast", lambda: fast_inv(spec, tables), False),
            ("forward", "direct", lambda: direct_fwd(sig, tables), b > cap),
            ("inverse", "direct", lambda: direct_inv(spec, tables), b > cap),
        ]
        for op, path, fn, skipped in plans:
            record = {
                "kind": kind,
                "bandwidth": b,
                "op": op,
                "path": path,
                "repetitions": repetitions,
            }
            if skipped:
                record["seconds"] = None
                record["note"] = f"skipped: direct path capped at bandwidth {cap}"
            else:
                record["seconds"] = _median_seconds(fn, repetitions)
            records.append(record)
    return records
